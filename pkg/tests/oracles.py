"""Independent reference models used to check the simulator.

These are deliberately naive: explicit per-set lists, recursive tree walks,
timestamped LRU.  They share no code with the package implementations.
"""

from __future__ import annotations


class TreePlruOracle:
    """One cache set's PLRU tree kept as an explicit dict of node bits."""

    def __init__(self, associativity: int):
        self.assoc = associativity
        self.bits: dict[int, int] = {}

    def victim(self) -> int:
        node = 0
        while node < self.assoc - 1:
            node = 2 * node + 1 + self.bits.get(node, 0)
        return node - (self.assoc - 1)

    def touch(self, way: int) -> None:
        node = way + self.assoc - 1
        while node:
            parent = (node - 1) // 2
            self.bits[parent] = 1 if node == 2 * parent + 1 else 0
            node = parent


class RefCacheLevel:
    """Naive set-associative level: per-set tag lists plus a PLRU oracle."""

    def __init__(self, total_size: int, assoc: int, line: int):
        self.line = line
        self.assoc = assoc
        self.n_sets = total_size // (assoc * line)
        self.tags: list[list[int | None]] = [[None] * assoc for _ in range(self.n_sets)]
        self.trees = [TreePlruOracle(assoc) for _ in range(self.n_sets)]

    def _set(self, line_addr: int) -> int:
        return (line_addr // self.line) % self.n_sets

    def access(self, line_addr: int) -> bool:
        """Hit test with promotion; installs on miss. Returns hit?"""
        si = self._set(line_addr)
        tags, tree = self.tags[si], self.trees[si]
        for way, tag in enumerate(tags):
            if tag == line_addr:
                tree.touch(way)
                return True
        self.install(line_addr)
        return False

    def install(self, line_addr: int) -> None:
        si = self._set(line_addr)
        tags, tree = self.tags[si], self.trees[si]
        for way, tag in enumerate(tags):
            if tag is None:
                tags[way] = line_addr
                tree.touch(way)
                return
        way = tree.victim()
        tags[way] = line_addr
        tree.touch(way)


class RefHierarchy:
    """Reference multi-level lookup with fill-on-miss into upper levels."""

    def __init__(self, geometries: list[tuple[int, int, int]]):
        self.levels = [RefCacheLevel(*g) for g in geometries]

    def access(self, line_addr: int) -> int:
        """Index of the nearest level that hit (len(levels) if none)."""
        hit = len(self.levels)
        for i, level in enumerate(self.levels):
            si = level._set(line_addr)
            tags, tree = level.tags[si], level.trees[si]
            found = None
            for way, tag in enumerate(tags):
                if tag == line_addr:
                    found = way
                    break
            if found is not None:
                tree.touch(found)
                hit = i
                break
        for j in range(min(hit, len(self.levels))):
            self.levels[j].install(line_addr)
        return hit


class LruSet:
    """True least-recently-used set with way-level timestamps."""

    def __init__(self, assoc: int):
        self.slots: list[int | None] = [None] * assoc
        self.stamp = [0] * assoc
        self.clock = 0

    def access(self, tag: int) -> tuple[bool, int]:
        """Returns (hit, way used); misses evict the least recent way."""
        self.clock += 1
        for way, existing in enumerate(self.slots):
            if existing == tag:
                self.stamp[way] = self.clock
                return True, way
        for way, existing in enumerate(self.slots):
            if existing is None:
                self.slots[way] = tag
                self.stamp[way] = self.clock
                return False, way
        way = min(range(len(self.slots)), key=lambda w: self.stamp[w])
        self.slots[way] = tag
        self.stamp[way] = self.clock
        return False, way
