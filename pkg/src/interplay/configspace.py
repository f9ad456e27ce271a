"""Way-disabling configuration space and training-set selection.

A configuration gives the number of enabled ways per cache.  The training set
is the baseline plus every configuration that disables ways in exactly one
cache; everything else is predicted.  Enumeration order is canonical:
lexicographic on the way counts, descending, so the baseline comes first.
"""
from __future__ import annotations

import itertools
import math
from typing import NamedTuple, Sequence, Union

from .cache import ConfigError

__all__ = [
    "WayConfig",
    "ConfigSpace",
    "label",
    "parse_label",
    "full_space",
    "training_set",
    "predicted_set",
    "trainings_for",
    "canonical_key",
]


class WayConfig(NamedTuple):
    """Enabled ways per cache, in L2, DL1, IL1 order."""

    l2_ways: int
    dl1_ways: int
    il1_ways: int

    @property
    def label(self) -> str:
        return label(self)

    @classmethod
    def parse(cls, text: str) -> "WayConfig":
        point = parse_label(text)
        if len(point) != 3:
            raise ConfigError(f"configuration label {text!r} must have 3 fields")
        return cls(*point)


Point = Union[WayConfig, tuple]


def label(cfg: Sequence[int]) -> str:
    return "_".join(str(w) for w in cfg)


def parse_label(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.strip().split("_"))
    except ValueError:
        raise ConfigError(f"bad configuration label {text!r}") from None


def canonical_key(cfg: Sequence[int]) -> tuple[int, ...]:
    """Sort key giving canonical (descending) order."""
    return tuple(-w for w in cfg)


class ConfigSpace:
    """Total way counts per cache; for the reference hierarchy ``(L2, DL1, IL1)``."""

    def __init__(self, ways: Sequence[int]):
        ways = tuple(int(w) for w in ways)
        if not ways or any(w < 1 for w in ways):
            raise ConfigError(f"every way count must be >= 1, got {ways}")
        self.ways = ways

    def __repr__(self) -> str:
        return f"ConfigSpace({self.ways})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ConfigSpace) and other.ways == self.ways

    def __hash__(self) -> int:
        return hash(self.ways)

    def point(self, values: Sequence[int]) -> Point:
        values = tuple(values)
        return WayConfig(*values) if len(self.ways) == 3 else values

    @property
    def baseline(self) -> Point:
        return self.point(self.ways)

    def contains(self, cfg: Sequence[int]) -> bool:
        return len(cfg) == len(self.ways) and all(1 <= w <= t for w, t in zip(cfg, self.ways))

    def check(self, cfg: Sequence[int]) -> Point:
        if not self.contains(cfg):
            raise ConfigError(f"configuration {label(cfg)} is outside the space {label(self.ways)}")
        return self.point(cfg)

    def disabled_caches(self, cfg: Sequence[int]) -> int:
        return sum(w != t for w, t in zip(cfg, self.ways))

    @property
    def full_count(self) -> int:
        return math.prod(self.ways)

    @property
    def training_count(self) -> int:
        return 1 + sum(t - 1 for t in self.ways)


def full_space(space: ConfigSpace) -> list[Point]:
    ranges = [range(t, 0, -1) for t in space.ways]
    return [space.point(p) for p in itertools.product(*ranges)]


def training_set(space: ConfigSpace) -> list[Point]:
    return [p for p in full_space(space) if space.disabled_caches(p) <= 1]


def predicted_set(space: ConfigSpace) -> list[Point]:
    return [p for p in full_space(space) if space.disabled_caches(p) >= 2]


def single_cache_trainings(space: ConfigSpace, predicted: Sequence[int]) -> list[Point]:
    """For each cache, the baseline with only that cache reduced to ``predicted``'s ways."""
    predicted = space.check(predicted)
    out = []
    for i, w in enumerate(predicted):
        values = list(space.ways)
        values[i] = w
        out.append(space.point(values))
    return out


def trainings_for(space: ConfigSpace, predicted: Sequence[int]) -> dict[str, WayConfig]:
    """The baseline and the L2/DL1/IL1 training configurations of ``predicted``."""
    if len(space.ways) != 3:
        raise ConfigError("trainings_for needs the three-cache (L2, DL1, IL1) space")
    l2t, dt, it = single_cache_trainings(space, predicted)
    return {"B": space.baseline, "DT": dt, "IT": it, "L2T": l2t}
