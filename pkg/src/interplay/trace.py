"""Memory-access traces: text format, streaming reader/writer, synthetic workloads.

A trace is one record per committed instruction::

    I 0x400104              # fetch only
    L 0x400100 0x7fff0010   # load
    S 0x400108 0x7fff0018   # store

Simulation works on :class:`TraceArrays`, a columnar view of the same data.
"""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Sequence, Union

import numpy as np

__all__ = [
    "Kind",
    "TraceRecord",
    "TraceParseError",
    "parse_record",
    "format_record",
    "read_trace",
    "write_trace",
    "TraceArrays",
    "RegionKind",
    "Region",
    "WorkloadSpec",
    "WorkloadSpecError",
    "generate_arrays",
    "generate_trace",
]


class Kind(enum.IntEnum):
    FETCH = 0
    LOAD = 1
    STORE = 2


_LETTER = {Kind.FETCH: "I", Kind.LOAD: "L", Kind.STORE: "S"}
_KIND_OF = {v: k for k, v in _LETTER.items()}


class TraceParseError(ValueError):
    """Malformed trace line."""

    def __init__(self, message: str, line: str, lineno: Optional[int] = None):
        self.reason = message
        self.line = line
        self.lineno = lineno
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"{where}{message}: {line!r}")


@dataclass(frozen=True, slots=True)
class TraceRecord:
    kind: Kind
    pc: int
    mem_addr: Optional[int] = None

    def __post_init__(self):
        if (self.kind == Kind.FETCH) != (self.mem_addr is None):
            raise ValueError(f"{self.kind.name} record with mem_addr={self.mem_addr!r}")


def _parse_hex(token: str, line: str) -> int:
    if not token.startswith(("0x", "0X")):
        raise TraceParseError(f"expected 0x-prefixed hex, got {token!r}", line)
    try:
        value = int(token[2:], 16)
    except ValueError:
        raise TraceParseError(f"bad hex token {token!r}", line) from None
    if value >= 1 << 64:
        raise TraceParseError(f"address {token} exceeds 64 bits", line)
    return value


def parse_record(line: str) -> TraceRecord:
    """Parse a single trace line (no comment handling)."""
    parts = line.split()
    if not parts:
        raise TraceParseError("empty record", line)
    kind = _KIND_OF.get(parts[0])
    if kind is None:
        raise TraceParseError(f"unknown record kind {parts[0]!r}", line)
    want = 2 if kind == Kind.FETCH else 3
    if len(parts) != want:
        raise TraceParseError(f"{parts[0]} record needs {want - 1} field(s)", line)
    pc = _parse_hex(parts[1], line)
    addr = _parse_hex(parts[2], line) if kind != Kind.FETCH else None
    return TraceRecord(kind, pc, addr)


def format_record(rec: TraceRecord) -> str:
    """Canonical text form: upper-case kind letter, lower-case hex, single spaces."""
    if rec.mem_addr is None:
        return f"I {rec.pc:#x}"
    return f"{_LETTER[rec.kind]} {rec.pc:#x} {rec.mem_addr:#x}"


def _lines(source: Union[IO[str], IO[bytes], Iterable]) -> Iterator[str]:
    for raw in source:
        yield raw.decode("utf-8") if isinstance(raw, bytes) else raw


def read_trace(source) -> Iterator[TraceRecord]:
    """Yield records from a text or binary stream, skipping blanks and ``#`` comments.

    Parse errors are re-raised with the 1-based line number attached.
    """
    for lineno, line in enumerate(_lines(source), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            yield parse_record(stripped)
        except TraceParseError as exc:
            raise TraceParseError(exc.reason, stripped, lineno) from None


def write_trace(records: Iterable[TraceRecord], sink: IO[str]) -> int:
    n = 0
    for rec in records:
        sink.write(format_record(rec))
        sink.write("\n")
        n += 1
    return n


@dataclass(frozen=True)
class TraceArrays:
    """Columnar trace: ``kinds`` (uint8), ``pcs`` and ``addrs`` (uint64).

    ``addrs`` is 0 for fetch-only records.
    """

    kinds: np.ndarray
    pcs: np.ndarray
    addrs: np.ndarray

    def __post_init__(self):
        n = len(self.kinds)
        if len(self.pcs) != n or len(self.addrs) != n:
            raise ValueError("trace columns differ in length")

    def __len__(self) -> int:
        return len(self.kinds)

    @classmethod
    def from_records(cls, records: Iterable[TraceRecord]) -> "TraceArrays":
        kinds, pcs, addrs = [], [], []
        for rec in records:
            kinds.append(int(rec.kind))
            pcs.append(rec.pc)
            addrs.append(rec.mem_addr or 0)
        return cls(
            np.array(kinds, dtype=np.uint8),
            np.array(pcs, dtype=np.uint64),
            np.array(addrs, dtype=np.uint64),
        )

    @classmethod
    def load(cls, path) -> "TraceArrays":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_records(read_trace(fh))

    def records(self) -> Iterator[TraceRecord]:
        for k, pc, a in zip(self.kinds.tolist(), self.pcs.tolist(), self.addrs.tolist()):
            kind = Kind(k)
            yield TraceRecord(kind, pc, None if kind == Kind.FETCH else a)

    def dump(self, sink: IO[str]) -> int:
        return write_trace(self.records(), sink)

    def to_text(self) -> str:
        buf = io.StringIO()
        self.dump(buf)
        return buf.getvalue()

    @property
    def n_data(self) -> int:
        return int(np.count_nonzero(self.kinds != Kind.FETCH))


def as_arrays(trace: Union[TraceArrays, Iterable[TraceRecord]]) -> TraceArrays:
    return trace if isinstance(trace, TraceArrays) else TraceArrays.from_records(trace)


# --- synthetic workloads -------------------------------------------------------


class RegionKind(str, enum.Enum):
    SEQUENTIAL_STREAM = "SequentialStream"
    STRIDED_LOOP = "StridedLoop"
    POINTER_CHASE = "PointerChase"
    HOT_SET = "HotSet"


class WorkloadSpecError(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("invalid workload spec: " + "; ".join(self.problems))


@dataclass(frozen=True)
class Region:
    kind: RegionKind
    working_set_bytes: int
    stride_bytes: int = 64
    store_fraction: float = 0.0
    weight: float = 1.0


CODE_BASE = 0x400000
DATA_BASE = 0x10000000
# distinct regions live 4 GiB apart
REGION_SPACING = 1 << 32
ELEM_BYTES = 8


@dataclass(frozen=True)
class WorkloadSpec:
    """Parameters of a synthetic workload.

    ``mem_fraction`` is the probability that an instruction carries a memory
    operand; the region is then drawn by weight and the store/load choice by
    that region's ``store_fraction``.
    """

    n_instructions: int
    regions: tuple[Region, ...] = field(default_factory=tuple)
    code_footprint_bytes: int = 4096
    seed: int = 0
    mem_fraction: float = 0.4

    def problems(self) -> list[str]:
        out = []
        if self.n_instructions < 0:
            out.append("n_instructions must be >= 0")
        if self.code_footprint_bytes <= 0:
            out.append("code_footprint_bytes must be > 0")
        if not 0.0 <= self.mem_fraction <= 1.0:
            out.append("mem_fraction must be in [0, 1]")
        if not 0 <= self.seed < 1 << 64:
            out.append("seed must fit in 64 bits")
        if self.mem_fraction > 0 and not self.regions:
            out.append("regions must be non-empty when mem_fraction > 0")
        for i, r in enumerate(self.regions):
            tag = f"regions[{i}]"
            if r.working_set_bytes <= 0:
                out.append(f"{tag}.working_set_bytes must be > 0")
            if r.stride_bytes <= 0:
                out.append(f"{tag}.stride_bytes must be > 0")
            if not 0.0 <= r.store_fraction <= 1.0:
                out.append(f"{tag}.store_fraction must be in [0, 1]")
            if r.weight < 0:
                out.append(f"{tag}.weight must be >= 0")
        if self.regions and sum(r.weight for r in self.regions) <= 0:
            out.append("region weights must not all be zero")
        return out

    def validate(self) -> "WorkloadSpec":
        problems = self.problems()
        if problems:
            raise WorkloadSpecError(problems)
        return self


def _region_offsets(region: Region, count: int, rng: np.random.Generator) -> np.ndarray:
    """Byte offsets within the region for its ``count`` successive accesses."""
    ws = region.working_set_bytes
    stride = region.stride_bytes
    k = np.arange(count, dtype=np.uint64)
    slots = max(1, ws // stride)
    if region.kind == RegionKind.SEQUENTIAL_STREAM:
        return (k % np.uint64(slots)) * np.uint64(stride)
    if region.kind == RegionKind.STRIDED_LOOP:
        # column-major walk: stride down the rows, then shift one element over
        cols = max(1, stride // ELEM_BYTES)
        row = k % np.uint64(slots)
        col = (k // np.uint64(slots)) % np.uint64(cols)
        return row * np.uint64(stride) + col * np.uint64(ELEM_BYTES)
    if region.kind == RegionKind.POINTER_CHASE:
        order = rng.permutation(slots).astype(np.uint64)
        return order[k % np.uint64(slots)] * np.uint64(stride)
    if region.kind == RegionKind.HOT_SET:
        elems = max(1, ws // ELEM_BYTES)
        return rng.integers(0, elems, size=count, dtype=np.uint64) * np.uint64(ELEM_BYTES)
    raise WorkloadSpecError([f"unknown region kind {region.kind!r}"])


def generate_arrays(spec: WorkloadSpec) -> TraceArrays:
    """Deterministically generate the trace for ``spec`` as arrays."""
    spec.validate()
    n = spec.n_instructions
    rng = np.random.default_rng(spec.seed)

    code_slots = max(1, spec.code_footprint_bytes // 4)
    pcs = np.uint64(CODE_BASE) + (np.arange(n, dtype=np.uint64) % np.uint64(code_slots)) * np.uint64(4)

    kinds = np.zeros(n, dtype=np.uint8)
    addrs = np.zeros(n, dtype=np.uint64)
    if n == 0 or not spec.regions:
        return TraceArrays(kinds, pcs, addrs)

    is_mem = rng.random(n) < spec.mem_fraction
    mem_idx = np.flatnonzero(is_mem)
    weights = np.array([r.weight for r in spec.regions], dtype=np.float64)
    choice = rng.choice(len(spec.regions), size=len(mem_idx), p=weights / weights.sum())
    store_draw = rng.random(len(mem_idx))

    for ri, region in enumerate(spec.regions):
        sel = mem_idx[choice == ri]
        base = np.uint64(DATA_BASE + ri * REGION_SPACING)
        addrs[sel] = base + _region_offsets(region, len(sel), rng)
        stores = store_draw[choice == ri] < region.store_fraction
        kinds[sel] = np.where(stores, Kind.STORE, Kind.LOAD)
    return TraceArrays(kinds, pcs, addrs)


def generate_trace(spec: WorkloadSpec) -> Iterator[TraceRecord]:
    return generate_arrays(spec).records()
