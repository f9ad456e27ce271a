"""Analytical CPI prediction for multi-cache way-disabling configurations.

Inputs are four simulations: the baseline ``B`` and the three single-cache
training runs ``DT`` (DL1 reduced), ``IT`` (IL1 reduced) and ``L2T`` (L2
reduced) that match the target configuration cache by cache.

    cycles_p = C_L + EM_L2 * penalty_L2
    C_L      = (C_DT - C_B) + (C_IT - C_B) + (C_L2T - C_B) + C_B
    EM_L2    = max(0, TM_L2 - captured)
    TM_L2    = M_D * MR_d + M_I * MR_i

Two readings of the captured-miss and penalty terms are available:

``LITERAL``
    captured = sum of the three training runs' extra L2 misses over baseline;
    penalty = (C_L2T - C_B) / M_L2,L2T.
``CONSISTENT`` (default)
    captured additionally includes the baseline L2 misses and the penalty
    divides by the *extra* L2T misses.  Predicting a training configuration
    then returns that configuration's simulated cycles exactly.

All internal arithmetic is exact (:class:`fractions.Fraction`); floats are
produced only for the reported CPI and rate fields.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .simulator import SimStats

PREDICTION_COLUMNS = (
    "config",
    "mode",
    "cpi_l",
    "cpi_em",
    "cpi_p",
    "em_l2",
    "tm_l2",
    "m_l2_captured",
    "mr_l2_d",
    "mr_l2_i",
    "penalty_l2",
)


class PredictorMode(str, enum.Enum):
    LITERAL = "literal"
    CONSISTENT = "consistent"


class DataError(ValueError):
    """Training or oracle data that cannot feed the model."""


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


@dataclass(frozen=True)
class TrainingData:
    stats_b: SimStats
    stats_dt: SimStats
    stats_it: SimStats
    stats_l2t: SimStats

    def __post_init__(self):
        counts = {s.instructions for s in self.all()}
        if len(counts) != 1:
            raise DataError(f"training runs disagree on instruction count: {sorted(counts)}")

    def all(self) -> tuple[SimStats, SimStats, SimStats, SimStats]:
        return (self.stats_b, self.stats_dt, self.stats_it, self.stats_l2t)

    @property
    def instructions(self) -> int:
        return self.stats_b.instructions


def linear_cycles(t: TrainingData) -> int:
    c_b = t.stats_b.cycles
    return (t.stats_dt.cycles - c_b) + (t.stats_it.cycles - c_b) + (t.stats_l2t.cycles - c_b) + c_b


def l2_miss_rates(t: TrainingData) -> tuple[Fraction, Fraction]:
    """L2 miss rates of D-side and I-side L2 accesses.

    Each rate is taken from whichever training run (L2T, or the matching L1
    training run) shows more L2 misses of that origin; L2T wins ties.
    """
    l2t, dt, it = t.stats_l2t, t.stats_dt, t.stats_it
    if l2t.m_l2_from_d >= dt.m_l2_from_d:
        mr_d = _ratio(l2t.m_l2_from_d, l2t.m_d)
    else:
        mr_d = _ratio(dt.m_l2_from_d, dt.m_d)
    if l2t.m_l2_from_i >= it.m_l2_from_i:
        mr_i = _ratio(l2t.m_l2_from_i, l2t.m_i)
    else:
        mr_i = _ratio(it.m_l2_from_i, it.m_i)
    return mr_d, mr_i


def total_l2_misses(t: TrainingData) -> Fraction:
    # L1 miss counts do not depend on the L2 configuration, so DT and IT
    # carry the exact DL1/IL1 misses of the target configuration.
    mr_d, mr_i = l2_miss_rates(t)
    return t.stats_dt.m_d * mr_d + t.stats_it.m_i * mr_i


def captured_l2_misses(t: TrainingData, mode: PredictorMode = PredictorMode.CONSISTENT) -> int:
    base = t.stats_b.m_l2
    literal = (t.stats_dt.m_l2 - base) + (t.stats_it.m_l2 - base) + (t.stats_l2t.m_l2 - base)
    if PredictorMode(mode) is PredictorMode.LITERAL:
        return literal
    return literal + base


def l2_penalty(t: TrainingData, mode: PredictorMode = PredictorMode.CONSISTENT) -> Fraction:
    extra_cycles = t.stats_l2t.cycles - t.stats_b.cycles
    if PredictorMode(mode) is PredictorMode.LITERAL:
        return _ratio(extra_cycles, t.stats_l2t.m_l2)
    return _ratio(extra_cycles, t.stats_l2t.m_l2 - t.stats_b.m_l2)


@dataclass(frozen=True)
class Prediction:
    config: str
    mode: PredictorMode
    instructions: int
    cycles_l: int
    cycles_p: Fraction
    cpi_l: float
    cpi_em: float
    cpi_p: float
    em_l2: Fraction
    tm_l2: Fraction
    m_l2_captured: int
    mr_l2_d: Fraction
    mr_l2_i: Fraction
    penalty_l2: Fraction
    clamped: bool

    def to_row(self) -> list:
        return [
            self.config,
            self.mode.value,
            _fmt(self.cpi_l),
            _fmt(self.cpi_em),
            _fmt(self.cpi_p),
            _fmt(self.em_l2),
            _fmt(self.tm_l2),
            self.m_l2_captured,
            _fmt(self.mr_l2_d),
            _fmt(self.mr_l2_i),
            _fmt(self.penalty_l2),
        ]


def _fmt(x) -> str:
    # shortest round-trip repr keeps CSV output byte-stable
    return repr(float(x))


def predict(
    t: TrainingData,
    mode: PredictorMode = PredictorMode.CONSISTENT,
    config: Optional[str] = None,
) -> Prediction:
    mode = PredictorMode(mode)
    n = t.instructions
    if n == 0:
        raise DataError("cannot predict CPI for a zero-instruction run")
    c_l = linear_cycles(t)
    tm = total_l2_misses(t)
    captured = captured_l2_misses(t, mode)
    raw_em = tm - captured
    em = max(Fraction(0), raw_em)
    penalty = l2_penalty(t, mode)
    c_em = em * penalty
    cycles_p = c_l + c_em
    mr_d, mr_i = l2_miss_rates(t)
    return Prediction(
        config=config or "",
        mode=mode,
        instructions=n,
        cycles_l=c_l,
        cycles_p=cycles_p,
        cpi_l=float(Fraction(c_l, n)),
        cpi_em=float(c_em / n),
        cpi_p=float(cycles_p / n),
        em_l2=em,
        tm_l2=tm,
        m_l2_captured=captured,
        mr_l2_d=mr_d,
        mr_l2_i=mr_i,
        penalty_l2=penalty,
        clamped=raw_em < 0,
    )
