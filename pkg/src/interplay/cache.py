"""Set-associative, true-LRU, write-back/write-allocate cache with way-disabling.

Disabling ways shrinks the associativity of every set; the set count (and so
the index function) stays that of the full geometry.  Only the number of
enabled ways matters, not which physical ways were switched off.

This is the readable reference model.  Sweeps use the array kernels in
:mod:`interplay.kernels`, which are tested for equivalence against it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


class ConfigError(ValueError):
    """Invalid cache geometry or way configuration."""


@dataclass(frozen=True)
class CacheGeometry:
    size_bytes: int
    assoc: int
    block_bytes: int = 64

    def __post_init__(self):
        if self.assoc < 1:
            raise ConfigError(f"assoc must be >= 1, got {self.assoc}")
        if self.block_bytes < 1 or self.block_bytes & (self.block_bytes - 1):
            raise ConfigError(f"block_bytes must be a power of two, got {self.block_bytes}")
        line_group = self.assoc * self.block_bytes
        if self.size_bytes < line_group or self.size_bytes % line_group:
            raise ConfigError(
                f"size_bytes={self.size_bytes} is not a positive multiple of "
                f"assoc*block_bytes={line_group}"
            )

    @property
    def sets(self) -> int:
        return self.size_bytes // (self.assoc * self.block_bytes)

    @property
    def offset_bits(self) -> int:
        return self.block_bytes.bit_length() - 1


@dataclass(frozen=True)
class AccessOutcome:
    hit: bool
    # block-aligned byte address of a dirty victim, if one was evicted
    writeback: Optional[int] = None


class Cache:
    """Mutable cache state.

    Each set is a list of ``[block_number, dirty]`` entries ordered LRU first,
    MRU last, holding at most ``enabled_ways`` entries.
    """

    def __init__(self, geometry: CacheGeometry, enabled_ways: Optional[int] = None):
        if enabled_ways is None:
            enabled_ways = geometry.assoc
        if not 1 <= enabled_ways <= geometry.assoc:
            raise ConfigError(
                f"enabled_ways must be in [1, {geometry.assoc}], got {enabled_ways}"
            )
        self.geometry = geometry
        self.enabled_ways = enabled_ways
        self._sets: list[list[list]] = [[] for _ in range(geometry.sets)]
        self.hits = 0
        self.misses = 0

    @property
    def accesses(self) -> int:
        return self.hits + self.misses

    def set_index(self, block_addr: int) -> int:
        return (block_addr >> self.geometry.offset_bits) % self.geometry.sets

    def contents(self, set_index: int) -> list[int]:
        """Block addresses resident in a set, LRU first."""
        shift = self.geometry.offset_bits
        return [blk << shift for blk, _ in self._sets[set_index]]

    def access(self, block_addr: int, is_write: bool = False) -> AccessOutcome:
        if block_addr & (self.geometry.block_bytes - 1):
            raise ValueError(f"address {block_addr:#x} is not block aligned")
        blk = block_addr >> self.geometry.offset_bits
        ways = self._sets[blk % self.geometry.sets]
        for i, entry in enumerate(ways):
            if entry[0] == blk:
                del ways[i]
                entry[1] = entry[1] or is_write
                ways.append(entry)
                self.hits += 1
                return AccessOutcome(True)
        self.misses += 1
        victim = None
        if len(ways) >= self.enabled_ways:
            old_blk, dirty = ways.pop(0)
            if dirty:
                victim = old_blk << self.geometry.offset_bits
        ways.append([blk, is_write])
        return AccessOutcome(False, victim)


def new_cache(geometry: CacheGeometry, enabled_ways: int) -> Cache:
    return Cache(geometry, enabled_ways)
