"""Hot loops: single-cache replay and full IL1/DL1/L2 hierarchy replay.

Each kernel is written once and built twice: compiled with numba ``@njit``
and as plain Python.  ``INTERPLAY_DISABLE_JIT=1`` (or a missing numba) selects
the plain path; both produce identical counters.

Cache state is kept in flat per-cache arrays of length ``sets * ways`` where
``ways`` is the number of *enabled* ways: block tags (``-1`` marks an empty
slot), last-use stamps, and dirty bits.  The set index always uses the
full-geometry set count.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

# return codes of _access; a value >= 0 is the block number of a dirty victim
HIT = -2
MISS_CLEAN = -1

# positions in the hierarchy counter vector
(
    C_INSTRUCTIONS,
    C_CYCLES,
    C_M_I,
    C_M_D,
    C_M_L2,
    C_M_L2_FROM_I,
    C_M_L2_FROM_D,
    C_A_L2_FROM_I,
    C_A_L2_FROM_D,
) = range(9)
N_COUNTERS = 9


def _access(tags, stamps, dirty, base, ways, blk, is_write, clock):
    # slot with the smallest stamp is the LRU victim; empty slots carry -1
    victim = base
    oldest = stamps[base]
    for j in range(base, base + ways):
        if tags[j] == blk:
            stamps[j] = clock
            if is_write:
                dirty[j] = 1
            return HIT
        if stamps[j] < oldest:
            oldest = stamps[j]
            victim = j
    out = MISS_CLEAN
    if tags[victim] != -1 and dirty[victim]:
        out = tags[victim]
    tags[victim] = blk
    stamps[victim] = clock
    dirty[victim] = 1 if is_write else 0
    return out


def _make_kernels(jit):
    access = jit(_access)

    def replay(blocks, writes, sets, ways):
        """Drive one cache; returns (misses, writebacks)."""
        n_slots = sets * ways
        tags = np.full(n_slots, -1, dtype=np.int64)
        stamps = np.full(n_slots, -1, dtype=np.int64)
        dirty = np.zeros(n_slots, dtype=np.uint8)
        misses = 0
        writebacks = 0
        for r in range(len(blocks)):
            blk = blocks[r]
            res = access(tags, stamps, dirty, (blk % sets) * ways, ways, blk, writes[r], r)
            if res != HIT:
                misses += 1
                if res >= 0:
                    writebacks += 1
        return misses, writebacks

    def hierarchy(kinds, iblocks, dblocks, geo, lat_l2_hit, lat_mem):
        """Replay a trace through IL1/DL1 -> L2 under the blocking timing model.

        ``geo`` is int64[6]: il1 sets, il1 ways, dl1 sets, dl1 ways, l2 sets, l2 ways.
        """
        i_sets, i_ways, d_sets, d_ways, l_sets, l_ways = geo[0], geo[1], geo[2], geo[3], geo[4], geo[5]
        i_tags = np.full(i_sets * i_ways, -1, dtype=np.int64)
        i_st = np.full(i_sets * i_ways, -1, dtype=np.int64)
        i_dirty = np.zeros(i_sets * i_ways, dtype=np.uint8)
        d_tags = np.full(d_sets * d_ways, -1, dtype=np.int64)
        d_st = np.full(d_sets * d_ways, -1, dtype=np.int64)
        d_dirty = np.zeros(d_sets * d_ways, dtype=np.uint8)
        l_tags = np.full(l_sets * l_ways, -1, dtype=np.int64)
        l_st = np.full(l_sets * l_ways, -1, dtype=np.int64)
        l_dirty = np.zeros(l_sets * l_ways, dtype=np.uint8)

        out = np.zeros(N_COUNTERS, dtype=np.int64)
        n = len(kinds)
        cycles = 0
        m_i = 0
        m_d = 0
        m_l2_i = 0
        m_l2_d = 0
        clock = 0
        for r in range(n):
            cycles += 1
            blk = iblocks[r]
            clock += 1
            res = access(i_tags, i_st, i_dirty, (blk % i_sets) * i_ways, i_ways, blk, False, clock)
            if res != HIT:
                m_i += 1
                clock += 1
                res2 = access(l_tags, l_st, l_dirty, (blk % l_sets) * l_ways, l_ways, blk, False, clock)
                if res2 == HIT:
                    cycles += lat_l2_hit
                else:
                    m_l2_i += 1
                    cycles += lat_mem
            k = kinds[r]
            if k != 0:
                blk = dblocks[r]
                clock += 1
                res = access(d_tags, d_st, d_dirty, (blk % d_sets) * d_ways, d_ways, blk, k == 2, clock)
                if res != HIT:
                    m_d += 1
                    clock += 1
                    res2 = access(l_tags, l_st, l_dirty, (blk % l_sets) * l_ways, l_ways, blk, False, clock)
                    if res2 == HIT:
                        cycles += lat_l2_hit
                    else:
                        m_l2_d += 1
                        cycles += lat_mem
                    if res >= 0:
                        # dirty DL1 victim allocates in L2; not a demand access
                        clock += 1
                        access(l_tags, l_st, l_dirty, (res % l_sets) * l_ways, l_ways, res, True, clock)
        out[C_INSTRUCTIONS] = n
        out[C_CYCLES] = cycles
        out[C_M_I] = m_i
        out[C_M_D] = m_d
        out[C_M_L2] = m_l2_i + m_l2_d
        out[C_M_L2_FROM_I] = m_l2_i
        out[C_M_L2_FROM_D] = m_l2_d
        out[C_A_L2_FROM_I] = m_i
        out[C_A_L2_FROM_D] = m_d
        return out

    return jit(replay), jit(hierarchy)


replay_py, hierarchy_py = _make_kernels(lambda f: f)

if njit is not None:
    replay_jit, hierarchy_jit = _make_kernels(njit(cache=True, nogil=True))
else:  # pragma: no cover
    replay_jit = hierarchy_jit = None


def jit_enabled() -> bool:
    flag = os.environ.get("INTERPLAY_DISABLE_JIT", "").strip().lower()
    return njit is not None and flag in ("", "0", "false", "no")


_warm = False


def warm_up() -> None:
    """Compile (or load from the on-disk cache) the jitted kernels once, so
    that sweep timings measure simulation only."""
    global _warm
    if _warm or hierarchy_jit is None:
        return
    one = np.zeros(1, dtype=np.int64)
    replay_jit(one, np.zeros(1, dtype=np.bool_), 1, 1)
    hierarchy_jit(np.zeros(1, dtype=np.uint8), one, one, np.ones(6, dtype=np.int64), 1, 1)
    _warm = True


def _as_list(a):
    return a.tolist() if isinstance(a, np.ndarray) else list(a)


def replay(blocks, writes, sets: int, ways: int, jit: bool | None = None) -> tuple[int, int]:
    """Misses and dirty evictions of one cache over a block-number stream."""
    if jit is None:
        jit = jit_enabled()
    if jit:
        return replay_jit(np.asarray(blocks, dtype=np.int64), np.asarray(writes, dtype=np.bool_), sets, ways)
    return replay_py(_as_list(blocks), _as_list(writes), sets, ways)


def hierarchy(kinds, iblocks, dblocks, geo, lat_l2_hit: int, lat_mem: int, jit: bool | None = None) -> np.ndarray:
    if jit is None:
        jit = jit_enabled()
    if jit:
        return hierarchy_jit(
            np.asarray(kinds, dtype=np.uint8),
            np.asarray(iblocks, dtype=np.int64),
            np.asarray(dblocks, dtype=np.int64),
            np.asarray(geo, dtype=np.int64),
            int(lat_l2_hit),
            int(lat_mem),
        )
    return hierarchy_py(
        _as_list(kinds), _as_list(iblocks), _as_list(dblocks), [int(g) for g in geo], int(lat_l2_hit), int(lat_mem)
    )
