"""INI run configuration.

::

    [hierarchy]
    il1_size = 32K
    il1_assoc = 4
    dl1_size = 32K
    dl1_assoc = 4
    l2_size = 256K
    l2_assoc = 8
    block_bytes = 64
    lat_l2_hit = 12
    lat_mem = 100

    [space]
    ways = 8,4,4              ; optional, must match the associativities

    [run]
    mode = consistent
    error_thresholds = 5,2,1
    pd_threshold = 20
    out = out
    workers = 1
    seed = 1

    [workload.stream]
    n_instructions = 100000
    code_footprint_bytes = 16K
    mem_fraction = 0.4
    region.a = SequentialStream working_set_bytes=64K stride_bytes=64 store_fraction=0.2 weight=1
    region.b = HotSet working_set_bytes=8K

    [workload.captured]
    trace = traces/captured.trace

Trace paths are relative to the config file.  A generated workload without a
``seed`` gets ``run.seed + <its position among workloads>``.
"""
from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .cache import CacheGeometry, ConfigError
from .configspace import ConfigSpace
from .predictor import PredictorMode
from .simulator import HierarchyParams
from .trace import Region, RegionKind, TraceArrays, WorkloadSpec, generate_arrays


class ConfigFileError(ConfigError):
    pass


_SIZE = re.compile(r"^\s*(\d+)\s*([kKmMgG]?)i?[bB]?\s*$")
_UNITS = {"": 1, "k": 1 << 10, "m": 1 << 20, "g": 1 << 30}


def parse_size(text: str) -> int:
    """``"64"``, ``"32K"``, ``"256KiB"``, ``"1M"`` -> bytes."""
    m = _SIZE.match(str(text))
    if not m:
        raise ConfigFileError(f"bad size {text!r}")
    return int(m.group(1)) * _UNITS[m.group(2).lower()]


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError:
        raise ConfigFileError(f"bad number list {text!r}") from None


_REGION_KEYS = {
    "working_set_bytes": parse_size,
    "stride_bytes": parse_size,
    "store_fraction": float,
    "weight": float,
}


def parse_region(text: str) -> Region:
    tokens = text.split()
    if not tokens:
        raise ConfigFileError("empty region description")
    try:
        kind = RegionKind(tokens[0])
    except ValueError:
        known = ", ".join(k.value for k in RegionKind)
        raise ConfigFileError(f"unknown region kind {tokens[0]!r} (expected one of {known})") from None
    kw = {}
    for tok in tokens[1:]:
        key, sep, value = tok.partition("=")
        if not sep or key not in _REGION_KEYS:
            raise ConfigFileError(f"bad region field {tok!r}")
        try:
            kw[key] = _REGION_KEYS[key](value)
        except ValueError:
            raise ConfigFileError(f"bad value in region field {tok!r}") from None
    if "working_set_bytes" not in kw:
        raise ConfigFileError(f"region {text!r} needs working_set_bytes")
    return Region(kind, **kw)


@dataclass(frozen=True)
class Workload:
    name: str
    trace_path: Optional[Path] = None
    spec: Optional[WorkloadSpec] = None

    def load(self) -> TraceArrays:
        if self.spec is not None:
            return generate_arrays(self.spec)
        return TraceArrays.load(self.trace_path)


@dataclass
class RunConfig:
    params: HierarchyParams = field(default_factory=HierarchyParams)
    workloads: list[Workload] = field(default_factory=list)
    mode: PredictorMode = PredictorMode.CONSISTENT
    error_thresholds: list[float] = field(default_factory=lambda: [5.0, 2.0, 1.0])
    pd_threshold: float = 20.0
    out: Path = Path("out")
    workers: int = 1
    seed: int = 1

    @property
    def space(self) -> ConfigSpace:
        return self.params.space()

    def workload(self, name: Optional[str]) -> Workload:
        if name is None:
            return self.workloads[0]
        for w in self.workloads:
            if w.name == name:
                return w
        raise ConfigFileError(f"no workload named {name!r}")

    def check(self) -> "RunConfig":
        if not self.workloads:
            raise ConfigFileError("at least one [workload.NAME] section is required")
        if any(t <= 0 for t in self.error_thresholds) or self.pd_threshold <= 0:
            raise ConfigFileError("thresholds must be positive")
        if self.workers < 1:
            raise ConfigFileError("workers must be >= 1")
        for w in self.workloads:
            if w.trace_path is not None and not w.trace_path.is_file():
                raise ConfigFileError(f"workload {w.name!r}: trace file {w.trace_path} not found")
            if w.spec is not None:
                w.spec.validate()
        return self


def _geometry(sec, prefix: str, default: CacheGeometry, block: int) -> CacheGeometry:
    size = parse_size(sec.get(f"{prefix}_size", str(default.size_bytes)))
    assoc = int(sec.get(f"{prefix}_assoc", str(default.assoc)))
    return CacheGeometry(size, assoc, block)


def _hierarchy(cp: configparser.ConfigParser) -> HierarchyParams:
    d = HierarchyParams()
    if not cp.has_section("hierarchy"):
        return d
    sec = cp["hierarchy"]
    block = parse_size(sec.get("block_bytes", str(d.block_bytes)))
    return HierarchyParams(
        il1=_geometry(sec, "il1", d.il1, block),
        dl1=_geometry(sec, "dl1", d.dl1, block),
        l2=_geometry(sec, "l2", d.l2, block),
        lat_l2_hit=int(sec.get("lat_l2_hit", str(d.lat_l2_hit))),
        lat_mem=int(sec.get("lat_mem", str(d.lat_mem))),
    )


def _workload(name: str, sec, base_dir: Path, default_seed: int) -> Workload:
    if "trace" in sec:
        path = Path(sec["trace"])
        return Workload(name, trace_path=path if path.is_absolute() else base_dir / path)
    regions = tuple(parse_region(sec[k]) for k in sorted(sec) if k.startswith("region"))
    spec = WorkloadSpec(
        n_instructions=int(sec.get("n_instructions", "100000")),
        regions=regions,
        code_footprint_bytes=parse_size(sec.get("code_footprint_bytes", "4K")),
        seed=int(sec.get("seed", str(default_seed))),
        mem_fraction=float(sec.get("mem_fraction", "0.4")),
    )
    return Workload(name, spec=spec)


def load_config(path, seed: Optional[int] = None) -> RunConfig:
    """Read ``path``; ``seed`` overrides ``[run] seed``."""
    path = Path(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise ConfigFileError(f"config file {path} not found") from None
    except configparser.Error as exc:
        raise ConfigFileError(f"{path}: {exc}") from None

    try:
        params = _hierarchy(cp)
        run = cp["run"] if cp.has_section("run") else {}
        cfg = RunConfig(params=params)
        cfg.mode = PredictorMode(run.get("mode", cfg.mode.value).lower())
        if "error_thresholds" in run:
            cfg.error_thresholds = parse_float_list(run["error_thresholds"])
        cfg.pd_threshold = float(run.get("pd_threshold", cfg.pd_threshold))
        out = Path(run.get("out", str(cfg.out)))
        cfg.out = out if out.is_absolute() else path.parent / out
        cfg.workers = int(run.get("workers", cfg.workers))
        cfg.seed = int(run.get("seed", cfg.seed)) if seed is None else seed

        if cp.has_section("space") and "ways" in cp["space"]:
            ways = tuple(int(w) for w in parse_float_list(cp["space"]["ways"]))
            if ConfigSpace(ways) != params.space():
                raise ConfigFileError(
                    f"[space] ways {ways} disagree with hierarchy associativities {params.way_totals}"
                )

        names = [s for s in cp.sections() if s.startswith("workload.")]
        for i, section in enumerate(names):
            cfg.workloads.append(_workload(section.split(".", 1)[1], cp[section], path.parent, cfg.seed + i))
    except ConfigFileError:
        raise
    except (ValueError, ConfigError) as exc:
        raise ConfigFileError(f"{path}: {exc}") from None
    return cfg


def default_workers(configured: int) -> int:
    env = os.environ.get("INTERPLAY_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigFileError(f"INTERPLAY_WORKERS={env!r} is not an integer") from None
    return configured
