"""Built-in synthetic kernels: deterministic trace+config generators for the
archetypal bottleneck classes (port pressure, dependency latency, memory
bandwidth) used by tests, demos and the gen-kernel CLI subcommand.
"""

from __future__ import annotations

from dataclasses import dataclass

from .branch import BranchConfig
from .machine import (CacheLevelConfig, MachineConfig, Resource, builtin_config,
                      load_config)
from .trace import BranchInfo, InstructionEvent, MemAccess

_REG_RAX = 0
_REG_RCX = 1
_REG_XMM0 = 2
_REG_XMM1 = 3
_REG_FLAGS = 4
_REG_RDX = 5


@dataclass(frozen=True)
class KernelSpec:
    """Name plus parameters identifying one deterministic kernel instance."""

    name: str
    iters: int | None = None
    footprint: int | None = None

    def build(self) -> tuple[list[InstructionEvent], MachineConfig]:
        return generate(self.name, iters=self.iters, footprint=self.footprint)


def gen_port_block() -> tuple[list[InstructionEvent], MachineConfig]:
    """Twelve single-resource instructions through a 4-slot window.

    Every port has gap 1 and every instruction latency 1.  The p1 conflict
    between the first and fourth instructions delays window turnover enough
    to set the critical path, so accelerating p1 alone shortens the run even
    though busier-looking ports do nothing: the canonical demo that
    saturation does not equal bottleneck.
    """
    ports = ["p1", "p0", "p6", "p1", "p0", "p2", "p3", "p6", "p2", "p0", "p6", "p5"]
    events = [
        InstructionEvent(seq=i, pc=0x1000 + 4 * i, resources=(port,), latency=1.0)
        for i, port in enumerate(ports)]
    config = MachineConfig(
        resources=tuple(Resource(id=i, name=name, gap=1.0)
                        for i, name in enumerate(["p0", "p1", "p2", "p3", "p5", "p6"])),
        window_capacity=4)
    return events, config


def gen_jacobi_like(iters: int) -> tuple[list[InstructionEvent], MachineConfig]:
    """A 17-instruction stencil loop body iterated `iters` times.

    Two L1-resident arrays are read/written through combined load ports (p23)
    heavily enough that p23 is the steady-state bottleneck; stores go through
    p4 and every instruction costs one frontend slot.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    config = load_config(builtin_config("skylake-like"))
    stack_a, stack_b = 0x7000, 0x7000 + 8
    base_a, base_b = 0x10000, 0x20000
    footprint = 8192  # per array; both stay L1-resident
    wrap = (footprint - 32) // 24

    events: list[InstructionEvent] = []
    seq = 0

    def emit(pc, kind, reg_reads=(), reg_writes=(), mem_reads=(), mem_writes=(),
             branch=BranchInfo()):
        nonlocal seq
        events.append(InstructionEvent(
            seq=seq, pc=pc, kind=kind,
            reg_reads=tuple(reg_reads), reg_writes=tuple(reg_writes),
            mem_reads=tuple(MemAccess(a, s) for a, s in mem_reads),
            mem_writes=tuple(MemAccess(a, s) for a, s in mem_writes),
            branch=branch))
        seq += 1

    for i in range(iters):
        rax = 24 * (i % wrap) + 8
        a = base_a + rax
        b = base_b + rax
        emit(0x12BB, "mov-load", mem_reads=[(stack_a, 8)], reg_writes=[_REG_RDX])
        emit(0x12C0, "vmovsd-load", reg_reads=[_REG_RDX, _REG_RAX],
             mem_reads=[(a, 8)], reg_writes=[_REG_XMM0])
        emit(0x12C5, "vaddsd-load", reg_reads=[_REG_XMM0, _REG_RDX, _REG_RAX],
             mem_reads=[(a + 8, 8)], reg_writes=[_REG_XMM0])
        emit(0x12CB, "vaddsd-load", reg_reads=[_REG_XMM0, _REG_RDX, _REG_RAX],
             mem_reads=[(a + 16, 8)], reg_writes=[_REG_XMM0])
        emit(0x12D1, "vmulsd", reg_reads=[_REG_XMM0, _REG_XMM1], reg_writes=[_REG_XMM0])
        emit(0x12D5, "mov-load", mem_reads=[(stack_b, 8)], reg_writes=[_REG_RDX])
        emit(0x12DA, "vmovsd-store", reg_reads=[_REG_RDX, _REG_RAX, _REG_XMM0],
             mem_writes=[(b + 8, 8)])
        emit(0x12E0, "mov-load", mem_reads=[(stack_b, 8)], reg_writes=[_REG_RDX])
        emit(0x12E5, "vmovsd-load", reg_reads=[_REG_RDX, _REG_RAX],
             mem_reads=[(b - 8, 8)], reg_writes=[_REG_XMM0])
        emit(0x12EB, "vaddsd-load", reg_reads=[_REG_XMM0, _REG_RDX, _REG_RAX],
             mem_reads=[(b, 8)], reg_writes=[_REG_XMM0])
        emit(0x12F0, "vaddsd-load", reg_reads=[_REG_XMM0, _REG_RDX, _REG_RAX],
             mem_reads=[(b + 8, 8)], reg_writes=[_REG_XMM0])
        emit(0x12F6, "vmulsd", reg_reads=[_REG_XMM0, _REG_XMM1], reg_writes=[_REG_XMM0])
        emit(0x12FA, "mov-load", mem_reads=[(stack_a, 8)], reg_writes=[_REG_RDX])
        emit(0x12FF, "vmovsd-store", reg_reads=[_REG_RDX, _REG_RAX, _REG_XMM0],
             mem_writes=[(a, 8)])
        emit(0x1304, "add", reg_reads=[_REG_RAX], reg_writes=[_REG_RAX])
        emit(0x1308, "cmp", reg_reads=[_REG_RAX, _REG_RCX], reg_writes=[_REG_FLAGS])
        emit(0x130B, "jne", reg_reads=[_REG_FLAGS],
             branch=BranchInfo(kind="conditional", taken=i < iters - 1, target=0x12BB))
    return events, config


def gen_latency_chain(n: int) -> tuple[list[InstructionEvent], MachineConfig]:
    """n instructions each reading the register the previous one wrote.

    Latency 4 with a non-binding port and frontend, so the dependency chain
    alone sets the total: exactly 4n cycles, and only accelerating latencies
    (INST_LAT) can help.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    events = [
        InstructionEvent(seq=k, pc=0x4000 + 4 * k, resources=("p0",), latency=4.0,
                         reg_reads=(0,), reg_writes=(0,))
        for k in range(n)]
    config = MachineConfig(
        resources=(Resource(0, "FRONTEND", 0.25), Resource(1, "p0", 1.0)),
        window_capacity=64,
        frontend_resource="FRONTEND",
        cache_levels=_small_hierarchy(),
        branch=BranchConfig())
    return events, config


def gen_stream(n: int, footprint: int = 4 * 1024 * 1024) -> tuple[list[InstructionEvent], MachineConfig]:
    """n loads striding one cache line over a `footprint`-byte buffer.

    With the default footprint far beyond the last cache level every access
    walks the whole hierarchy, so memory bandwidth (MEM_THR) dominates.
    Shrinking the footprint below L1 leaves only compulsory misses.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    base = 0x100000
    events = [
        InstructionEvent(seq=k, pc=0x5000, resources=("p23",), latency=4.0,
                         mem_reads=(MemAccess(base + (64 * k) % footprint, 8),),
                         reg_writes=(0,))
        for k in range(n)]
    config = MachineConfig(
        resources=(Resource(0, "FRONTEND", 0.25), Resource(1, "p23", 0.5)),
        window_capacity=64,
        frontend_resource="FRONTEND",
        cache_levels=_small_hierarchy(),
        branch=BranchConfig())
    return events, config


def _small_hierarchy():
    return (
        CacheLevelConfig("L1", gap=1.0, total_size=32768, associativity=8, line_size=64),
        CacheLevelConfig("L2", gap=1.0, total_size=262144, associativity=8, line_size=64),
        CacheLevelConfig("L3", gap=2.0, total_size=524288, associativity=8, line_size=64),
        CacheLevelConfig("MEM", gap=4.0),
    )


KERNELS = {
    "portblock": lambda iters=None, footprint=None: gen_port_block(),
    "jacobi": lambda iters=1000, footprint=None: gen_jacobi_like(iters),
    "chain": lambda iters=1000, footprint=None: gen_latency_chain(iters),
    "stream": lambda iters=10000, footprint=None: gen_stream(
        iters, footprint if footprint else 4 * 1024 * 1024),
}


def generate(name: str, iters: int | None = None,
             footprint: int | None = None) -> tuple[list[InstructionEvent], MachineConfig]:
    """Look up and run a named kernel generator with optional overrides."""
    try:
        gen = KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; choose from "
                         f"{', '.join(sorted(KERNELS))}") from None
    kwargs = {}
    if iters is not None:
        kwargs["iters"] = iters
    if footprint is not None:
        kwargs["footprint"] = footprint
    return gen(**kwargs)
