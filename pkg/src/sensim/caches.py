"""Multi-level set-associative cache hierarchy with tree-PLRU replacement.

Lookups walk the levels nearest-first; a miss at every configured level hits
the memory backstop (a geometry-less last level, or an implicit free one).
Bandwidth is consumed on the path from L2 down to the hit level: transfers
between the core and L1 are not modeled, so L1 hits are free.
"""

from __future__ import annotations

from .machine import CacheLevelConfig


def line_accesses(addr: int, size: int, line_size: int) -> list[int]:
    """Base addresses of every cache line the byte range [addr, addr+size) touches."""
    first = addr - addr % line_size
    return list(range(first, addr + size, line_size))


def plru_victim(bits: int, associativity: int) -> int:
    """Way picked by following the PLRU tree bits from the root to a leaf."""
    node = 0
    while node < associativity - 1:
        node = 2 * node + 1 + ((bits >> node) & 1)
    return node - (associativity - 1)


def plru_touch(bits: int, associativity: int, way: int) -> int:
    """Flip the bits on `way`'s path so the tree points away from it."""
    node = way + associativity - 1
    while node:
        parent = (node - 1) >> 1
        if node == 2 * parent + 1:
            bits |= 1 << parent
        else:
            bits &= ~(1 << parent)
        node = parent
    return bits


class CacheLevelState:
    """Tag arrays, PLRU bits, bandwidth availability and counters for one level."""

    def __init__(self, config: CacheLevelConfig):
        self.config = config
        self.name = config.name
        self.gap = config.gap
        self.t_avail = 0.0
        self.hits = 0
        self.misses = 0
        self.transfers = 0
        if config.is_backstop:
            self.n_sets = 0
            self.ways = 0
            self.sets: list[list[int | None]] = []
            self.plru: list[int] = []
        else:
            self.ways = config.associativity
            self.line_size = config.line_size
            self.n_sets = config.total_size // (self.ways * self.line_size)
            self.sets = [[None] * self.ways for _ in range(self.n_sets)]
            self.plru = [0] * self.n_sets

    @property
    def is_backstop(self) -> bool:
        return self.config.is_backstop

    def probe(self, line: int) -> bool:
        """Hit test promoting the line's way in the PLRU tree on a hit."""
        if self.is_backstop:
            return True
        si = (line // self.line_size) % self.n_sets
        ways = self.sets[si]
        for w, tag in enumerate(ways):
            if tag == line:
                self.plru[si] = plru_touch(self.plru[si], self.ways, w)
                return True
        return False

    def fill(self, line: int) -> None:
        """Install the line, evicting the PLRU victim if the set is full."""
        if self.is_backstop:
            return
        si = (line // self.line_size) % self.n_sets
        ways = self.sets[si]
        for w, tag in enumerate(ways):
            if tag is None:
                ways[w] = line
                self.plru[si] = plru_touch(self.plru[si], self.ways, w)
                return
        w = plru_victim(self.plru[si], self.ways)
        ways[w] = line
        self.plru[si] = plru_touch(self.plru[si], self.ways, w)


class CacheHierarchy:
    """Per-run state of the whole hierarchy, built fresh from a config."""

    def __init__(self, levels: tuple[CacheLevelConfig, ...]):
        self.levels = [CacheLevelState(c) for c in levels]

    def lookup_and_fill(self, line: int) -> int:
        """Index of the nearest level holding the line; fills all levels above.

        Returns len(levels) when the line misses every configured level (the
        implicit always-hit memory behind the last one).
        """
        hit = len(self.levels)
        for i, level in enumerate(self.levels):
            if level.probe(line):
                level.hits += 1
                hit = i
                break
            level.misses += 1
        for j in range(hit if hit < len(self.levels) else len(self.levels)):
            self.levels[j].fill(line)
        return hit

    def consume_bandwidth(self, hit_level: int, direction: str = "load") -> float:
        """Availability of the L2..hit path, then one gap consumed per level.

        Returns 0 with no state change when the path is empty (an L1 hit).
        Stores travel the same path as loads; `direction` only labels the use.
        """
        end = min(hit_level, len(self.levels) - 1)
        if end < 1:
            return 0.0
        avail = 0.0
        for i in range(1, end + 1):
            t = self.levels[i].t_avail
            if t > avail:
                avail = t
        for i in range(1, end + 1):
            level = self.levels[i]
            level.t_avail += level.gap
            level.transfers += 1
        return avail
