"""Instruction-event stream: record types, the newline-delimited file format,
and resolution of events against a machine configuration.

Each record carries observed truth for one dynamic instruction (actual branch
outcome, actual addresses); the simulator never re-derives control flow or
aliasing.  Execution semantics come either from a `kind` looked up in the
config's kind table or from inline `resources` + `latency` (the inline pair
wins when both are present, so small examples need no kind table).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .machine import MachineConfig, UnknownKind

ADDRESS_BITS = 64
_ADDRESS_LIMIT = 1 << ADDRESS_BITS

BRANCH_KINDS = ("none", "conditional", "direct", "indirect")


class TraceError(ValueError):
    """Base class for trace parsing and validation failures."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MalformedRecord(TraceError):
    pass


class NegativeLatency(TraceError):
    pass


class OverflowingAccess(TraceError):
    pass


@dataclass(frozen=True)
class MemAccess:
    """One byte range touched by an instruction."""

    addr: int
    size: int


@dataclass(frozen=True)
class BranchInfo:
    kind: str = "none"
    taken: bool = False
    target: int = 0


NO_BRANCH = BranchInfo()


@dataclass(frozen=True)
class InstructionEvent:
    """One dynamic instruction occurrence."""

    seq: int
    pc: int
    kind: str | None = None
    resources: tuple[str, ...] | None = None
    latency: float | None = None
    reg_reads: tuple[int, ...] = ()
    reg_writes: tuple[int, ...] = ()
    mem_reads: tuple[MemAccess, ...] = ()
    mem_writes: tuple[MemAccess, ...] = ()
    branch: BranchInfo = NO_BRANCH


@dataclass(frozen=True, slots=True)
class ResolvedEvent:
    """An event with execution semantics bound to a config.

    `resources` holds dense resource ids, with the config's frontend resource
    appended once beyond whatever the event listed explicitly.
    """

    seq: int
    pc: int
    label: str
    resources: tuple[int, ...]
    latency: float
    reg_reads: tuple[int, ...]
    reg_writes: tuple[int, ...]
    mem_reads: tuple[MemAccess, ...]
    mem_writes: tuple[MemAccess, ...]
    branch: BranchInfo


def validate_event(event: InstructionEvent, line: int | None = None) -> None:
    """Check the structural invariants of one event, raising a TraceError."""
    if event.pc < 0:
        raise MalformedRecord("pc must be >= 0", line)
    has_inline = event.resources is not None or event.latency is not None
    if has_inline and (event.resources is None or event.latency is None):
        raise MalformedRecord("resources and latency must be given together", line)
    if event.kind is None and not has_inline:
        raise MalformedRecord("record needs a kind or inline resources+latency", line)
    if event.latency is not None and event.latency < 0:
        raise NegativeLatency(f"latency {event.latency} is negative", line)
    for acc in (*event.mem_reads, *event.mem_writes):
        if acc.size < 1:
            raise MalformedRecord("memory access size must be >= 1", line)
        if acc.addr < 0 or acc.addr + acc.size > _ADDRESS_LIMIT:
            raise OverflowingAccess(
                f"access [{acc.addr}, +{acc.size}) leaves the {ADDRESS_BITS}-bit "
                "address space", line)
    b = event.branch
    if b.kind not in BRANCH_KINDS:
        raise MalformedRecord(f"unknown branch kind {b.kind!r}", line)
    if b.kind == "none" and (b.taken or b.target != 0):
        raise MalformedRecord("non-branch records cannot be taken or have a target", line)
    if b.kind == "direct" and not b.taken:
        raise MalformedRecord("direct branches are always taken", line)


_RECORD_FIELDS = {"pc", "kind", "resources", "latency", "reg_reads", "reg_writes",
                  "mem_reads", "mem_writes", "branch", "seq"}


def _int_list(raw, name: str, line: int) -> tuple[int, ...]:
    if not isinstance(raw, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in raw):
        raise MalformedRecord(f"{name} must be an array of integers", line)
    return tuple(raw)


def _accesses(raw, name: str, line: int) -> tuple[MemAccess, ...]:
    if not isinstance(raw, list):
        raise MalformedRecord(f"{name} must be an array", line)
    out = []
    for entry in raw:
        if (not isinstance(entry, dict) or set(entry) != {"addr", "size"}
                or not all(isinstance(entry[k], int) for k in ("addr", "size"))):
            raise MalformedRecord(f'{name} entries must be {{"addr":int,"size":int}}', line)
        out.append(MemAccess(addr=entry["addr"], size=entry["size"]))
    return tuple(out)


def parse_trace(lines: Iterable[str]) -> Iterator[InstructionEvent]:
    """Lazily parse newline-delimited records into validated events.

    `seq` defaults to the record's position; an explicit seq must keep the
    stream strictly increasing.  Any violation aborts the stream with a
    diagnostic naming the offending line.
    """
    last_seq = -1
    position = 0
    for lineno, raw_line in enumerate(lines, 1):
        if not raw_line.strip():
            continue
        try:
            raw = json.loads(raw_line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"invalid record: {exc.msg}", lineno) from None
        if not isinstance(raw, dict):
            raise MalformedRecord("record must be an object", lineno)
        unknown = set(raw) - _RECORD_FIELDS
        if unknown:
            raise MalformedRecord(f"unknown field {sorted(unknown)[0]!r}", lineno)
        if "pc" not in raw or not isinstance(raw["pc"], int) or isinstance(raw["pc"], bool):
            raise MalformedRecord("pc is required and must be an integer", lineno)

        kind = raw.get("kind")
        if kind is not None and not isinstance(kind, str):
            raise MalformedRecord("kind must be a string", lineno)
        resources = raw.get("resources")
        if resources is not None:
            if not isinstance(resources, list) or not all(
                    isinstance(r, str) for r in resources):
                raise MalformedRecord("resources must be an array of strings", lineno)
            resources = tuple(resources)
        latency = raw.get("latency")
        if latency is not None:
            if isinstance(latency, bool) or not isinstance(latency, (int, float)):
                raise MalformedRecord("latency must be a number", lineno)
            latency = float(latency)

        branch = NO_BRANCH
        if "branch" in raw:
            b = raw["branch"]
            if not isinstance(b, dict) or not set(b) <= {"kind", "taken", "target"}:
                raise MalformedRecord("branch must be {kind, taken, target}", lineno)
            branch = BranchInfo(
                kind=b.get("kind", "none"),
                taken=bool(b.get("taken", False)),
                target=b.get("target", 0))

        seq = raw.get("seq", position)
        if not isinstance(seq, int) or isinstance(seq, bool):
            raise MalformedRecord("seq must be an integer", lineno)
        if seq <= last_seq:
            raise MalformedRecord(f"seq {seq} does not increase", lineno)

        event = InstructionEvent(
            seq=seq,
            pc=raw["pc"],
            kind=kind,
            resources=resources,
            latency=latency,
            reg_reads=_int_list(raw.get("reg_reads", []), "reg_reads", lineno),
            reg_writes=_int_list(raw.get("reg_writes", []), "reg_writes", lineno),
            mem_reads=_accesses(raw.get("mem_reads", []), "mem_reads", lineno),
            mem_writes=_accesses(raw.get("mem_writes", []), "mem_writes", lineno),
            branch=branch)
        validate_event(event, lineno)
        last_seq = seq
        position = max(position, seq) + 1
        yield event


def write_trace(events: Iterable[InstructionEvent]) -> str:
    """Serialize events to the record-per-line text form; inverse of parse_trace."""
    out = []
    for position, event in enumerate(events):
        record: dict = {"pc": event.pc}
        if event.kind is not None:
            record["kind"] = event.kind
        if event.resources is not None:
            record["resources"] = list(event.resources)
        if event.latency is not None:
            record["latency"] = event.latency
        if event.reg_reads:
            record["reg_reads"] = list(event.reg_reads)
        if event.reg_writes:
            record["reg_writes"] = list(event.reg_writes)
        if event.mem_reads:
            record["mem_reads"] = [{"addr": a.addr, "size": a.size} for a in event.mem_reads]
        if event.mem_writes:
            record["mem_writes"] = [{"addr": a.addr, "size": a.size} for a in event.mem_writes]
        if event.branch.kind != "none":
            record["branch"] = {"kind": event.branch.kind, "taken": event.branch.taken,
                                "target": event.branch.target}
        if event.seq != position:
            record["seq"] = event.seq
        out.append(json.dumps(record, separators=(",", ":")))
    return "".join(line + "\n" for line in out)


def bind_semantics(event: InstructionEvent,
                   config: MachineConfig) -> tuple[tuple[int, ...], float, str]:
    """Resource ids, latency and label for one event under a config.

    Inline resources+latency take precedence over the kind table; the
    frontend resource, when configured, is appended once to the multiset.
    The result depends only on (kind, resources, latency), so callers may
    memoize on that triple.
    """
    if event.resources is not None and event.latency is not None:
        names = event.resources
        latency = event.latency
        label = event.kind or ""
    else:
        try:
            kind = config.kinds[event.kind]
        except KeyError:
            raise UnknownKind(event.kind) from None
        names = kind.resources
        latency = kind.latency
        label = kind.name
    ids = [config.resource_id(n) for n in names]
    if config.frontend_id is not None:
        ids.append(config.frontend_id)
    return tuple(ids), latency, label


def resolve_event(event: InstructionEvent, config: MachineConfig) -> ResolvedEvent:
    """Bind an event's execution semantics to a config."""
    validate_event(event)
    ids, latency, label = bind_semantics(event, config)
    return ResolvedEvent(
        seq=event.seq, pc=event.pc, label=label,
        resources=ids, latency=latency,
        reg_reads=event.reg_reads, reg_writes=event.reg_writes,
        mem_reads=event.mem_reads, mem_writes=event.mem_writes,
        branch=event.branch)
