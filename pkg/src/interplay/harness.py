"""Sweeps, prediction over a whole space, validation against an exhaustive oracle,
and the field-return policy analysis.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from . import kernels
from .configspace import ConfigSpace, WayConfig, canonical_key, full_space, predicted_set, trainings_for, training_set
from .predictor import DataError, Prediction, PredictorMode, TrainingData, predict
from .simulator import HierarchyParams, PreparedTrace, SimStats, check_config, cpi, simulate


class SweepInvariantError(AssertionError):
    """A simulator post-condition failed over a sweep."""


@dataclass
class SweepResult:
    workload: str
    stats: dict[str, SimStats]
    wall_seconds: float = 0.0

    @property
    def simulation_count(self) -> int:
        return len(self.stats)

    def get(self, cfg) -> SimStats:
        key = cfg if isinstance(cfg, str) else WayConfig(*cfg).label
        try:
            return self.stats[key]
        except KeyError:
            raise DataError(f"workload {self.workload!r}: no simulation for configuration {key}") from None


def _canonical(labels: Iterable[str]) -> list[str]:
    return sorted(labels, key=lambda s: canonical_key(WayConfig.parse(s)))


def check_sweep(result: SweepResult) -> None:
    """Origin decomposition, L1 independence and L2 monotonicity over one sweep."""
    by_l1: dict[tuple[int, int], dict[int, SimStats]] = {}
    for lab, s in result.stats.items():
        problems = s.problems()
        if problems:
            raise SweepInvariantError(f"{result.workload}/{lab}: " + "; ".join(problems))
        cfg = WayConfig.parse(lab)
        by_l1.setdefault((cfg.dl1_ways, cfg.il1_ways), {})[cfg.l2_ways] = s
    for (d, i), group in by_l1.items():
        ref = next(iter(group.values()))
        for l2, s in group.items():
            if (s.m_d, s.m_i) != (ref.m_d, ref.m_i):
                raise SweepInvariantError(
                    f"{result.workload}: L1 misses vary with L2 ways at dl1={d}, il1={i}"
                )
        ways = sorted(group)
        for lo, hi in zip(ways, ways[1:]):
            if hi == lo + 1 and group[lo].m_l2 < group[hi].m_l2:
                raise SweepInvariantError(
                    f"{result.workload}: L2 misses grow from {lo} to {hi} ways at dl1={d}, il1={i}"
                )


def run_sweep(
    trace,
    params: HierarchyParams,
    configs: Sequence[Sequence[int]],
    workload: str = "",
    workers: int = 1,
    jit: Optional[bool] = None,
    check: bool = True,
) -> SweepResult:
    """Simulate every configuration in ``configs`` over one trace.

    Results are keyed by label in canonical order regardless of ``workers``.
    """
    configs = [check_config(params, c) for c in configs]
    prepared = trace if isinstance(trace, PreparedTrace) else PreparedTrace(trace, params.block_bytes)
    if kernels.jit_enabled() if jit is None else jit:
        kernels.warm_up()
    start = time.perf_counter()

    def one(cfg):
        return simulate(prepared, params, cfg, jit=jit)

    if workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, configs))
    else:
        results = [one(c) for c in configs]
    elapsed = time.perf_counter() - start
    stats = {c.label: s for c, s in zip(configs, results)}
    result = SweepResult(workload, {k: stats[k] for k in _canonical(stats)}, elapsed)
    if check:
        check_sweep(result)
    return result


def run_training_sweep(trace, params: HierarchyParams, space: Optional[ConfigSpace] = None, **kw) -> SweepResult:
    space = space or params.space()
    return run_sweep(trace, params, training_set(space), **kw)


def run_exhaustive_sweep(trace, params: HierarchyParams, space: Optional[ConfigSpace] = None, **kw) -> SweepResult:
    space = space or params.space()
    return run_sweep(trace, params, full_space(space), **kw)


def training_data(space: ConfigSpace, training: SweepResult, cfg) -> TrainingData:
    roles = trainings_for(space, cfg)
    return TrainingData(
        training.get(roles["B"]),
        training.get(roles["DT"]),
        training.get(roles["IT"]),
        training.get(roles["L2T"]),
    )


def predict_all(
    space: ConfigSpace,
    training: SweepResult,
    mode: PredictorMode = PredictorMode.CONSISTENT,
    include_training: bool = False,
) -> list[Prediction]:
    targets = full_space(space) if include_training else predicted_set(space)
    return [predict(training_data(space, training, c), mode, config=c.label) for c in targets]


# --- validation ----------------------------------------------------------------


def error_pct(predicted: float, actual: float) -> float:
    return 100.0 * (predicted - actual) / actual


# binary floats put 1.05 vs 1.00 at 5.000000000000004%; that still counts as 5%
_BAND_SLACK = 1e-9


def accuracy(errors: Sequence[float], threshold: float) -> float:
    """Percentage of errors whose magnitude is within ``threshold`` percent."""
    if not errors:
        return 0.0
    return 100.0 * sum(1 for e in errors if abs(e) <= threshold + _BAND_SLACK) / len(errors)


@dataclass(frozen=True)
class ValidationRow:
    workload: str
    config: str
    cpi_actual: float
    cpi_pred: float
    cpi_linear: float
    error_pct: float
    linear_error_pct: float
    tm_pred: float
    m_l2_actual: int
    miss_error_pct: Optional[float]
    clamped: bool


@dataclass
class ValidationReport:
    thresholds: list[float]
    rows: list[ValidationRow]
    summary: dict = field(default_factory=dict)
    linear_summary: dict = field(default_factory=dict)
    miss_summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rows": len(self.rows),
            "thresholds": self.thresholds,
            "cpi_p": self.summary,
            "cpi_l": self.linear_summary,
            "l2_misses": self.miss_summary,
        }


def _error_summary(errors: Sequence[float], thresholds: Sequence[float]) -> dict:
    mags = [abs(e) for e in errors]
    return {
        "mean_abs_error_pct": sum(mags) / len(mags) if mags else 0.0,
        "max_abs_error_pct": max(mags) if mags else 0.0,
        "accuracy_pct": {_tkey(t): accuracy(errors, t) for t in thresholds},
    }


def _tkey(t: float) -> str:
    return f"{t:g}"


def validate(
    predictions: Mapping[str, Sequence],
    oracles: Mapping[str, SweepResult],
    thresholds: Sequence[float] = (5.0, 2.0, 1.0),
) -> ValidationReport:
    """Compare predicted CPI and L2 misses with exhaustive simulation.

    ``predictions`` maps workload to objects exposing ``config``, ``cpi_p``,
    ``cpi_l``, ``tm_l2`` and ``clamped``.
    """
    thresholds = sorted((float(t) for t in thresholds), reverse=True)
    if any(t <= 0 for t in thresholds):
        raise DataError("error thresholds must be positive")
    rows = []
    for workload in sorted(predictions):
        if workload not in oracles:
            raise DataError(f"no oracle simulations for workload {workload!r}")
        oracle = oracles[workload]
        seen = set()
        for p in sorted(predictions[workload], key=lambda p: canonical_key(WayConfig.parse(p.config))):
            if p.config in seen:
                raise DataError(f"{workload}: configuration {p.config} predicted twice")
            seen.add(p.config)
            actual = oracle.get(p.config)
            cpi_actual = cpi(actual)
            m_l2 = actual.m_l2
            tm = float(p.tm_l2)
            if m_l2:
                miss_err = error_pct(tm, m_l2)
            else:
                miss_err = 0.0 if tm == 0 else None
            rows.append(
                ValidationRow(
                    workload,
                    p.config,
                    cpi_actual,
                    float(p.cpi_p),
                    float(p.cpi_l),
                    error_pct(float(p.cpi_p), cpi_actual),
                    error_pct(float(p.cpi_l), cpi_actual),
                    tm,
                    m_l2,
                    miss_err,
                    bool(p.clamped),
                )
            )
    report = ValidationReport(list(thresholds), rows)
    report.summary = _error_summary([r.error_pct for r in rows], thresholds)
    report.summary["clamp_count"] = sum(r.clamped for r in rows)
    report.linear_summary = _error_summary([r.linear_error_pct for r in rows], thresholds)
    miss_errs = [r.miss_error_pct for r in rows if r.miss_error_pct is not None]
    report.miss_summary = {
        "mean_abs_error_pct": sum(abs(e) for e in miss_errs) / len(miss_errs) if miss_errs else 0.0,
        "max_abs_error_pct": max((abs(e) for e in miss_errs), default=0.0),
        "undefined_rows": sum(r.miss_error_pct is None for r in rows),
    }
    return report


# --- field-return policy -------------------------------------------------------


@dataclass(frozen=True)
class PolicyRow:
    config: str
    max_pd_pct: float
    worst_workload: str
    flagged: bool


@dataclass
class PolicyReport:
    pd_threshold: float
    rows: list[PolicyRow]

    @property
    def flagged(self) -> list[str]:
        return [r.config for r in self.rows if r.flagged]

    @property
    def flagged_count(self) -> int:
        return len(self.flagged)

    @property
    def flagged_fraction(self) -> float:
        return self.flagged_count / len(self.rows) if self.rows else 0.0

    def to_dict(self) -> dict:
        return {
            "pd_threshold_pct": self.pd_threshold,
            "configs": len(self.rows),
            "flagged_count": self.flagged_count,
            "flagged_fraction": self.flagged_fraction,
        }


def performance_degradation(cpi_cfg: float, cpi_base: float) -> float:
    return 100.0 * (cpi_cfg - cpi_base) / cpi_base


def policy_analysis(
    cpis: Mapping[str, Mapping[str, float]],
    pd_threshold: float = 20.0,
    baseline: str = "8_4_4",
) -> PolicyReport:
    """Flag configurations whose worst-case degradation exceeds ``pd_threshold``.

    ``cpis`` maps workload to {config label: CPI}; each workload must include
    its baseline.  Rows are ordered by worst-case degradation, ties canonical.
    """
    worst: dict[str, tuple[float, str]] = {}
    for workload in sorted(cpis):
        table = cpis[workload]
        if baseline not in table:
            raise DataError(f"workload {workload!r} has no baseline ({baseline}) CPI")
        base = table[baseline]
        for lab, value in table.items():
            pd = performance_degradation(value, base)
            if lab not in worst or pd > worst[lab][0]:
                worst[lab] = (pd, workload)
    order = sorted(worst, key=lambda lab: (worst[lab][0], canonical_key(WayConfig.parse(lab))))
    rows = [PolicyRow(lab, worst[lab][0], worst[lab][1], worst[lab][0] > pd_threshold) for lab in order]
    return PolicyReport(pd_threshold, rows)


def oracle_cpis(oracles: Mapping[str, SweepResult]) -> dict[str, dict[str, float]]:
    return {w: {lab: cpi(s) for lab, s in r.stats.items()} for w, r in oracles.items()}


def model_cpis(
    training: Mapping[str, SweepResult], predictions: Mapping[str, Sequence]
) -> dict[str, dict[str, float]]:
    """CPI per configuration as the framework sees it: simulated for training
    configurations, predicted for the rest."""
    out = {}
    for w, result in training.items():
        table = {lab: cpi(s) for lab, s in result.stats.items()}
        for p in predictions.get(w, ()):
            table.setdefault(p.config, float(p.cpi_p))
        out[w] = table
    return out


def count_ratio(space: ConfigSpace) -> float:
    return space.full_count / space.training_count


def degeneracy_errors(space: ConfigSpace, training: SweepResult, mode=PredictorMode.CONSISTENT) -> dict[str, float]:
    """Error of predicting each training configuration from its own training data."""
    out = {}
    for cfg in training_set(space):
        p = predict(training_data(space, training, cfg), mode, config=cfg.label)
        out[cfg.label] = error_pct(p.cpi_p, cpi(training.get(cfg)))
    return out
