"""Two-level cache hierarchy simulation under a blocking in-order timing model.

Timing: every instruction costs one cycle.  An IL1 miss or a DL1 miss (load
or store) stalls for ``lat_l2_hit`` cycles when L2 hits and ``lat_mem`` when
it misses; the two latencies do not add.  Writebacks are free.

L1 misses fill both L1 and L2.  Dirty DL1 victims are written into L2
(allocating) but are not demand accesses and never appear in the L2 counters.
Dirty L2 victims go to memory at no cost.  Under a blocking core misses never
overlap, so every demand miss is also an MSHR allocation.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Iterable, Union

import numpy as np

from . import kernels
from .cache import CacheGeometry, ConfigError
from .configspace import ConfigSpace, WayConfig
from .trace import Kind, TraceArrays, TraceRecord, as_arrays

STATS_COLUMNS = (
    "config",
    "instructions",
    "cycles",
    "m_i",
    "m_d",
    "m_l2",
    "m_l2_from_i",
    "m_l2_from_d",
    "a_l2_from_i",
    "a_l2_from_d",
)


@dataclass(frozen=True)
class HierarchyParams:
    il1: CacheGeometry = CacheGeometry(32 * 1024, 4, 64)
    dl1: CacheGeometry = CacheGeometry(32 * 1024, 4, 64)
    l2: CacheGeometry = CacheGeometry(256 * 1024, 8, 64)
    lat_l2_hit: int = 12
    lat_mem: int = 100

    def __post_init__(self):
        if self.lat_l2_hit < 1 or self.lat_mem < 1:
            raise ConfigError("latencies must be >= 1")
        if not self.il1.block_bytes == self.dl1.block_bytes == self.l2.block_bytes:
            raise ConfigError("all caches must share one block size")

    @property
    def block_bytes(self) -> int:
        return self.l2.block_bytes

    @property
    def way_totals(self) -> tuple[int, int, int]:
        return (self.l2.assoc, self.dl1.assoc, self.il1.assoc)

    def baseline(self) -> WayConfig:
        return WayConfig(*self.way_totals)

    def space(self) -> ConfigSpace:
        return ConfigSpace(self.way_totals)


def check_config(params: HierarchyParams, cfg: WayConfig) -> WayConfig:
    """Validate ``cfg`` against the hierarchy's associativities."""
    if len(cfg) != 3:
        raise ConfigError(f"expected (l2, dl1, il1) ways, got {tuple(cfg)}")
    cfg = WayConfig(*cfg)
    for name, ways, total in zip(("l2", "dl1", "il1"), cfg, params.way_totals):
        if not 1 <= ways <= total:
            raise ConfigError(f"{cfg.label}: {name} ways must be in [1, {total}], got {ways}")
    return cfg


@dataclass(frozen=True)
class SimStats:
    instructions: int
    cycles: int
    m_i: int
    m_d: int
    m_l2: int
    m_l2_from_i: int
    m_l2_from_d: int
    a_l2_from_i: int
    a_l2_from_d: int

    @classmethod
    def empty(cls) -> "SimStats":
        return cls(0, 0, 0, 0, 0, 0, 0, 0, 0)

    def problems(self) -> list[str]:
        out = []
        if self.m_l2 != self.m_l2_from_d + self.m_l2_from_i:
            out.append("m_l2 != m_l2_from_d + m_l2_from_i")
        if self.a_l2_from_d != self.m_d or self.a_l2_from_i != self.m_i:
            out.append("L2 demand accesses do not match L1 misses")
        if self.cycles < self.instructions:
            out.append("cycles < instructions")
        if min(asdict(self).values()) < 0:
            out.append("negative counter")
        return out

    def to_row(self, label: str) -> list:
        return [label] + [getattr(self, f.name) for f in fields(self)]

    @classmethod
    def from_row(cls, row: dict) -> "SimStats":
        return cls(**{f.name: int(row[f.name]) for f in fields(cls)})


class UndefinedCPIError(ZeroDivisionError):
    pass


def cpi(stats: SimStats) -> float:
    if stats.instructions == 0:
        raise UndefinedCPIError("CPI is undefined for zero instructions")
    return stats.cycles / stats.instructions


def stall_cycles(stats: SimStats, params: HierarchyParams) -> int:
    """Cycles attributable to misses, rebuilt from the counters alone."""
    l1_misses = stats.m_i + stats.m_d
    return (l1_misses - stats.m_l2) * params.lat_l2_hit + stats.m_l2 * params.lat_mem


class PreparedTrace:
    """Block-number columns of a trace, computed once and reused across configs."""

    def __init__(self, trace: Union[TraceArrays, Iterable[TraceRecord]], block_bytes: int):
        arrays = as_arrays(trace)
        shift = np.uint64(block_bytes.bit_length() - 1)
        self.n = len(arrays)
        self.block_bytes = block_bytes
        self.kinds = np.ascontiguousarray(arrays.kinds, dtype=np.uint8)
        self.iblocks = (arrays.pcs >> shift).astype(np.int64)
        self.dblocks = (arrays.addrs >> shift).astype(np.int64)
        self.dblocks[self.kinds == Kind.FETCH] = 0


def _geo_vector(params: HierarchyParams, cfg: WayConfig) -> np.ndarray:
    return np.array(
        [params.il1.sets, cfg.il1_ways, params.dl1.sets, cfg.dl1_ways, params.l2.sets, cfg.l2_ways],
        dtype=np.int64,
    )


def simulate(trace, params: HierarchyParams, cfg: WayConfig, jit: bool | None = None) -> SimStats:
    """Simulate ``trace`` (records, TraceArrays or PreparedTrace) from cold caches."""
    cfg = check_config(params, cfg)
    if not isinstance(trace, PreparedTrace):
        trace = PreparedTrace(trace, params.block_bytes)
    elif trace.block_bytes != params.block_bytes:
        raise ConfigError(f"trace prepared for {trace.block_bytes} B blocks, hierarchy uses {params.block_bytes} B")
    if trace.n == 0:
        return SimStats.empty()
    out = kernels.hierarchy(
        trace.kinds, trace.iblocks, trace.dblocks, _geo_vector(params, cfg), params.lat_l2_hit, params.lat_mem, jit=jit
    )
    return SimStats(*(int(v) for v in out))


def simulate_reference(records: Iterable[TraceRecord], params: HierarchyParams, cfg: WayConfig) -> SimStats:
    """Object-model replay with :class:`~interplay.cache.Cache`; slow, used as an oracle."""
    from .cache import Cache

    cfg = check_config(params, cfg)
    il1 = Cache(params.il1, cfg.il1_ways)
    dl1 = Cache(params.dl1, cfg.dl1_ways)
    l2 = Cache(params.l2, cfg.l2_ways)
    mask = ~(params.block_bytes - 1)
    n = cycles = m_l2_i = m_l2_d = 0
    for rec in records:
        n += 1
        cycles += 1
        if not il1.access(rec.pc & mask).hit:
            if l2.access(rec.pc & mask).hit:
                cycles += params.lat_l2_hit
            else:
                m_l2_i += 1
                cycles += params.lat_mem
        if rec.kind != Kind.FETCH:
            addr = rec.mem_addr & mask
            out = dl1.access(addr, rec.kind == Kind.STORE)
            if not out.hit:
                if l2.access(addr).hit:
                    cycles += params.lat_l2_hit
                else:
                    m_l2_d += 1
                    cycles += params.lat_mem
                if out.writeback is not None:
                    l2.access(out.writeback, True)
    return SimStats(n, cycles, il1.misses, dl1.misses, m_l2_i + m_l2_d, m_l2_i, m_l2_d, il1.misses, dl1.misses)
