"""Core simulation: the per-instruction timing recurrence over resolved events.

For each event, in order: load-side cache bandwidth is consumed and folded
into the shadow memory of the read locations; the start time is the max of
the window floor, the shadow of every read location and the availability of
every used resource; the end time adds the (scaled) latency; each used
resource's availability advances by its gap; store-side bandwidth is
consumed; written locations get the end time (registers are renamed, so
their shadow is set; memory shadow is max-merged); the end time enters the
instruction window.  The total is the max end time over the trace.

Two phases keep reruns cheap: everything timing-independent (resolution,
cache hit levels, branch prediction verdicts, use counts) is computed once
into a Schedule; the timing recurrence then runs per configuration.  This is
exact, not an approximation: cache replacement and branch prediction depend
only on the event stream, never on simulated time.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .branch import PredictorState, misprediction_delay
from .caches import CacheHierarchy, line_accesses
from .machine import MachineConfig
from .trace import InstructionEvent, bind_semantics, validate_event


class ZeroTimeTrace(ValueError):
    """Raised when a per-cycle report is asked of a zero-cycle result."""


class InstructionWindow:
    """Bounded FIFO of in-flight end times modeling the reorder buffer.

    An instruction needing a slot in a full window first forces the oldest
    entry out; that entry's end time max-merges into `t_min`, the floor on
    every later start time.  `t_min` stays 0 until the window has been full.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("window capacity must be >= 1")
        self.capacity = capacity
        self.t_min = 0.0
        self._slots: deque[float] = deque()

    @property
    def occupancy(self) -> int:
        return len(self._slots)

    def make_room(self) -> float:
        """Evict the oldest entry if full; returns the t_min now in force."""
        if len(self._slots) == self.capacity:
            evicted = self._slots.popleft()
            if evicted > self.t_min:
                self.t_min = evicted
        return self.t_min

    def insert(self, t_end: float) -> None:
        self._slots.append(t_end)


def window_push(window: InstructionWindow, t_end: float) -> float:
    """Reserve a slot (evicting if full) and insert t_end; returns t_min."""
    t_min = window.make_room()
    window.insert(t_end)
    return t_min


@dataclass(frozen=True)
class PcStats:
    """Per-static-pc accounting accumulated over a run."""

    pc: int
    label: str
    count: int
    latency: float
    resources: tuple[str, ...]
    resource_uses: dict[str, int]


@dataclass(frozen=True)
class LevelCounters:
    hits: int
    misses: int
    transfers: int


@dataclass(frozen=True)
class SimResult:
    """Counts and timing estimated for one run."""

    total_cycles: float
    instruction_count: int
    ipc: float
    resource_uses: dict[str, int]
    resource_busy: dict[str, float]
    per_pc: dict[int, PcStats]
    cache_stats: dict[str, LevelCounters]
    cache_busy: dict[str, float]
    branch_predicted: int
    branch_mispredicted: int
    event_end_times: tuple[float, ...] | None = None


class _PcAccum:
    __slots__ = ("label", "latency", "resources", "count", "res_uses", "cache_uses")

    def __init__(self, label, latency, resources, n_res, n_levels):
        self.label = label
        self.latency = latency
        self.resources = resources
        self.count = 0
        self.res_uses = [0] * n_res
        self.cache_uses = [0] * n_levels


# Step layout (plain tuples keep the timing loop lean):
#   (resources, latency, reg_reads, reg_writes, read_keys, write_keys,
#    loads, stores, penalty)
# where loads/stores are tuples of (path_end, fold_keys) per line access.
class Schedule:
    """Timing-independent digest of a trace resolved against a config."""

    def __init__(self, config: MachineConfig):
        self.n_resources = len(config.resources)
        self.n_levels = len(config.cache_levels)
        self.steps: list[tuple] = []
        self.resource_uses = [0] * self.n_resources
        self.level_hits = [0] * self.n_levels
        self.level_misses = [0] * self.n_levels
        self.level_transfers = [0] * self.n_levels
        self.branch_predicted = 0
        self.branch_mispredicted = 0
        self.per_pc: dict[int, _PcAccum] = {}
        self.resource_names = tuple(r.name for r in config.resources)
        self.level_names = tuple(l.name for l in config.cache_levels)


def _shadow_keys(addr: int, size: int, shift: int | None) -> tuple[int, ...]:
    if shift is None:
        return tuple(range(addr, addr + size))
    return tuple(range(addr >> shift, (addr + size - 1 >> shift) + 1))


def build_schedule(events: Iterable[InstructionEvent], config: MachineConfig) -> Schedule:
    """Resolve a trace and precompute everything timing does not change."""
    schedule = Schedule(config)
    hierarchy = CacheHierarchy(config.cache_levels) if config.cache_levels else None
    predictor = PredictorState(config.branch) if config.branch.enabled else None
    shift = None
    if config.shadow_granularity == "line":
        shift = config.line_size.bit_length() - 1
    line_size = config.line_size
    last_path = len(config.cache_levels) - 1
    key_memo: dict[tuple[int, int], tuple] = {}
    uses = schedule.resource_uses

    def access_plan(accesses, count_per_pc):
        """Per access: shadow keys plus (path_end, keys-in-line) bandwidth ops."""
        all_keys = []
        ops = []
        for acc in accesses:
            memo = key_memo.get((acc.addr, acc.size))
            if memo is None:
                keys = _shadow_keys(acc.addr, acc.size, shift)
                per_line = tuple(
                    (line, tuple(k for k in keys
                                 if line <= (k if shift is None else k << shift) < line + line_size))
                    for line in line_accesses(acc.addr, acc.size, line_size))
                memo = (keys, per_line)
                key_memo[(acc.addr, acc.size)] = memo
            keys, per_line = memo
            all_keys.extend(keys)
            if hierarchy is None:
                continue
            for line, line_keys in per_line:
                hit = hierarchy.lookup_and_fill(line)
                end = min(hit, last_path)
                if end >= 1:
                    ops.append((end, line_keys))
                    for i in range(1, end + 1):
                        schedule.level_transfers[i] += 1
                        count_per_pc[i] += 1
        return tuple(all_keys), tuple(ops)

    frontend_appended = config.frontend_id is not None
    semantics_memo: dict[tuple, tuple] = {}
    for event in events:
        validate_event(event)
        sem_key = (event.kind, event.resources, event.latency)
        sem = semantics_memo.get(sem_key)
        if sem is None:
            sem = semantics_memo[sem_key] = bind_semantics(event, config)
        resources, latency, label = sem

        accum = schedule.per_pc.get(event.pc)
        if accum is None:
            explicit = resources[:-1] if frontend_appended else resources
            names = tuple(schedule.resource_names[i] for i in explicit)
            accum = _PcAccum(label, latency, names,
                             schedule.n_resources, schedule.n_levels)
            schedule.per_pc[event.pc] = accum
        accum.count += 1
        for rid in resources:
            uses[rid] += 1
            accum.res_uses[rid] += 1

        read_keys, loads = access_plan(event.mem_reads, accum.cache_uses)
        write_keys, stores = access_plan(event.mem_writes, accum.cache_uses)

        penalty = 0.0
        if predictor is not None and event.branch.kind != "none":
            prediction = predictor.predict(event.pc, event.branch.kind)
            penalty = misprediction_delay(prediction, event.branch.taken,
                                          event.branch.target, config.branch)
            predictor.update(event.pc, event.branch.taken, event.branch.target)
            schedule.branch_predicted += 1
            if penalty:
                schedule.branch_mispredicted += 1

        schedule.steps.append((resources, latency, event.reg_reads,
                               event.reg_writes, read_keys, write_keys,
                               loads, stores, penalty))

    if hierarchy is not None:
        for i, level in enumerate(hierarchy.levels):
            schedule.level_hits[i] = level.hits
            schedule.level_misses[i] = level.misses
    return schedule


def run_schedule(schedule: Schedule, config: MachineConfig,
                 record_event_times: bool = False) -> SimResult:
    """Run the timing recurrence for one (possibly weight-derived) config."""
    if schedule.n_resources != len(config.resources):
        raise ValueError("schedule was built against a different machine")
    gaps = [r.gap for r in config.resources]
    cache_gaps = [l.gap for l in config.cache_levels]
    cache_avail = [0.0] * schedule.n_levels
    avail = [0.0] * schedule.n_resources
    lat_scale = config.latency_scale
    capacity = config.window_capacity
    fe = config.frontend_id if config.frontend_id is not None else -1

    window: deque[float] = deque()
    window_pop = window.popleft
    window_add = window.append
    t_min = 0.0
    total = 0.0
    shadow_reg: dict[int, float] = {}
    shadow_mem: dict[int, float] = {}
    sr_get = shadow_reg.get
    sm_get = shadow_mem.get
    t_ends: list[float] | None = [] if record_event_times else None

    for (resources, latency, reg_reads, reg_writes, read_keys, write_keys,
         loads, stores, penalty) in schedule.steps:
        if len(window) == capacity:
            evicted = window_pop()
            if evicted > t_min:
                t_min = evicted
        t = t_min
        for end, fold_keys in loads:
            a = 0.0
            for i in range(1, end + 1):
                v = cache_avail[i]
                if v > a:
                    a = v
                cache_avail[i] = v + cache_gaps[i]
            if a > 0.0:
                for k in fold_keys:
                    if sm_get(k, 0.0) < a:
                        shadow_mem[k] = a
        for r in reg_reads:
            v = sr_get(r, 0.0)
            if v > t:
                t = v
        for k in read_keys:
            v = sm_get(k, 0.0)
            if v > t:
                t = v
        for rid in resources:
            v = avail[rid]
            if v > t:
                t = v
        t_end = t + latency * lat_scale
        for rid in resources:
            a = avail[rid]
            avail[rid] = (a if a > t_min else t_min) + gaps[rid]
        for end, fold_keys in stores:
            a = 0.0
            for i in range(1, end + 1):
                v = cache_avail[i]
                if v > a:
                    a = v
                cache_avail[i] = v + cache_gaps[i]
            if a > 0.0:
                for k in fold_keys:
                    if sm_get(k, 0.0) < a:
                        shadow_mem[k] = a
        for r in reg_writes:
            shadow_reg[r] = t_end
        for k in write_keys:
            if sm_get(k, 0.0) < t_end:
                shadow_mem[k] = t_end
        if penalty:
            avail[fe] += penalty
        window_add(t_end)
        if t_end > total:
            total = t_end
        if t_ends is not None:
            t_ends.append(t_end)

    count = len(schedule.steps)
    names = schedule.resource_names
    resource_uses = {names[i]: schedule.resource_uses[i]
                     for i in range(schedule.n_resources)}
    resource_busy = {names[i]: schedule.resource_uses[i] * gaps[i]
                     for i in range(schedule.n_resources)}
    per_pc = {}
    for pc, accum in schedule.per_pc.items():
        pc_uses = {names[i]: n for i, n in enumerate(accum.res_uses) if n}
        pc_uses.update({schedule.level_names[i]: n
                        for i, n in enumerate(accum.cache_uses) if n})
        per_pc[pc] = PcStats(pc=pc, label=accum.label, count=accum.count,
                             latency=accum.latency, resources=accum.resources,
                             resource_uses=pc_uses)
    cache_stats = {
        schedule.level_names[i]: LevelCounters(
            hits=schedule.level_hits[i], misses=schedule.level_misses[i],
            transfers=schedule.level_transfers[i])
        for i in range(schedule.n_levels)}
    cache_busy = {schedule.level_names[i]: schedule.level_transfers[i] * cache_gaps[i]
                  for i in range(schedule.n_levels)}
    return SimResult(
        total_cycles=total,
        instruction_count=count,
        ipc=count / total if total > 0 else 0.0,
        resource_uses=resource_uses,
        resource_busy=resource_busy,
        per_pc=per_pc,
        cache_stats=cache_stats,
        cache_busy=cache_busy,
        branch_predicted=schedule.branch_predicted,
        branch_mispredicted=schedule.branch_mispredicted,
        event_end_times=tuple(t_ends) if t_ends is not None else None)


def simulate(trace: Iterable[InstructionEvent], config: MachineConfig,
             record_event_times: bool = False) -> SimResult:
    """Estimate the execution of a trace on the configured machine."""
    return run_schedule(build_schedule(trace, config), config,
                        record_event_times=record_event_times)


def occupancy_report(result: SimResult) -> dict[str, float]:
    """Fraction of total cycles each resource spent busy (uses x gap / total)."""
    if result.total_cycles <= 0:
        raise ZeroTimeTrace("occupancy is undefined on a zero-cycle run")
    return {name: busy / result.total_cycles
            for name, busy in result.resource_busy.items()}
