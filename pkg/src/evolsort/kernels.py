"""
Compiled inner loops for Naive Sort runs without observers.

The kernel consumes pre-drawn index/shift arrays (see the draw protocol in
``model``), so it contains no RNG and a run through the kernel is
bit-identical to the plain Python path.  Alongside the permutation it
maintains a histogram of the deviations |pi(i) - i|, which gives O(1) access
to the current and peak maximum deviation and to the first step at which the
maximum deviation dropped to a configured threshold (used by the lower-bound
drivers).
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f
        return deco(args[0]) if args and callable(args[0]) else deco


# scalars layout
CUR_MDEV, PEAK_MDEV, FIRST_BELOW, THRESH, SWAPS, DEV_SUM, CNT_ABOVE, T_ABS = range(8)


class StateArrays:
    __slots__ = ("fwd", "inv", "dev_hist", "scalars")

    def __init__(self, fwd, inv, dev_hist, scalars):
        self.fwd = fwd
        self.inv = inv
        self.dev_hist = dev_hist
        self.scalars = scalars


def state_arrays(state, below_threshold: int = -1) -> StateArrays:
    """Build kernel arrays from a ProcessState (1-based, slot 0 unused)."""
    n = state.pi.n
    fwd = np.asarray(state.pi.fwd, dtype=np.int64).copy()
    inv = np.asarray(state.pi.inv, dtype=np.int64).copy()
    devs = np.abs(fwd[1:] - np.arange(1, n + 1))
    dev_hist = np.bincount(devs, minlength=n).astype(np.int64)
    scalars = np.zeros(8, dtype=np.int64)
    scalars[CUR_MDEV] = devs.max(initial=0)
    scalars[PEAK_MDEV] = scalars[CUR_MDEV]
    scalars[FIRST_BELOW] = -1
    scalars[THRESH] = below_threshold
    scalars[DEV_SUM] = devs.sum()
    if below_threshold >= 0:
        scalars[CNT_ABOVE] = int(np.count_nonzero(devs > below_threshold))
        if scalars[CNT_ABOVE] == 0:
            scalars[FIRST_BELOW] = state.t
    scalars[T_ABS] = state.t
    return StateArrays(fwd, inv, dev_hist, scalars)


def sync_state(state, arrays: StateArrays) -> None:
    """Copy kernel arrays back into the ProcessState's permutation."""
    state.pi.fwd[:] = arrays.fwd.tolist()
    state.pi.inv[:] = arrays.inv.tolist()


def _apply_impl(fwd, inv, kinds, sort_idx, mix_i, mix_s, start, stop,
                si, mi, n, hist, sc):
    cur = sc[CUR_MDEV]
    peak = sc[PEAK_MDEV]
    first_below = sc[FIRST_BELOW]
    thresh = sc[THRESH]
    swaps = sc[SWAPS]
    dev_sum = sc[DEV_SUM]
    cnt_above = sc[CNT_ABOVE]
    t = sc[T_ABS]
    for idx in range(start, stop):
        t += 1
        if kinds[idx] == 0:
            i = sort_idx[si]
            si += 1
            if i > 0:
                u = fwd[i]
                w = fwd[i + 1]
                if u > w:
                    o1 = u - i
                    if o1 < 0:
                        o1 = -o1
                    o2 = w - (i + 1)
                    if o2 < 0:
                        o2 = -o2
                    n1 = w - i
                    if n1 < 0:
                        n1 = -n1
                    n2 = u - (i + 1)
                    if n2 < 0:
                        n2 = -n2
                    hist[o1] -= 1
                    hist[o2] -= 1
                    hist[n1] += 1
                    hist[n2] += 1
                    dev_sum += n1 + n2 - o1 - o2
                    if n1 > cur:
                        cur = n1
                    if n2 > cur:
                        cur = n2
                    if thresh >= 0:
                        cnt_above += (1 if n1 > thresh else 0) + (1 if n2 > thresh else 0) \
                            - (1 if o1 > thresh else 0) - (1 if o2 > thresh else 0)
                    fwd[i] = w
                    fwd[i + 1] = u
                    inv[u] = i + 1
                    inv[w] = i
                    swaps += 1
        else:
            i = mix_i[mi]
            s = mix_s[mi]
            mi += 1
            if s > 0:
                hi2 = i + s
                if hi2 > n:
                    hi2 = n
                for b in range(i + 1, hi2 + 1):
                    pa = inv[i]
                    pb = inv[b]
                    o1 = i - pa
                    if o1 < 0:
                        o1 = -o1
                    o2 = b - pb
                    if o2 < 0:
                        o2 = -o2
                    n1 = i - pb
                    if n1 < 0:
                        n1 = -n1
                    n2 = b - pa
                    if n2 < 0:
                        n2 = -n2
                    hist[o1] -= 1
                    hist[o2] -= 1
                    hist[n1] += 1
                    hist[n2] += 1
                    dev_sum += n1 + n2 - o1 - o2
                    if n1 > cur:
                        cur = n1
                    if n2 > cur:
                        cur = n2
                    if thresh >= 0:
                        cnt_above += (1 if n1 > thresh else 0) + (1 if n2 > thresh else 0) \
                            - (1 if o1 > thresh else 0) - (1 if o2 > thresh else 0)
                    fwd[pa] = b
                    fwd[pb] = i
                    inv[i] = pb
                    inv[b] = pa
            elif s < 0:
                lo = i + s
                if lo < 1:
                    lo = 1
                for b in range(i - 1, lo - 1, -1):
                    pa = inv[i]
                    pb = inv[b]
                    o1 = i - pa
                    if o1 < 0:
                        o1 = -o1
                    o2 = b - pb
                    if o2 < 0:
                        o2 = -o2
                    n1 = i - pb
                    if n1 < 0:
                        n1 = -n1
                    n2 = b - pa
                    if n2 < 0:
                        n2 = -n2
                    hist[o1] -= 1
                    hist[o2] -= 1
                    hist[n1] += 1
                    hist[n2] += 1
                    dev_sum += n1 + n2 - o1 - o2
                    if n1 > cur:
                        cur = n1
                    if n2 > cur:
                        cur = n2
                    if thresh >= 0:
                        cnt_above += (1 if n1 > thresh else 0) + (1 if n2 > thresh else 0) \
                            - (1 if o1 > thresh else 0) - (1 if o2 > thresh else 0)
                    fwd[pa] = b
                    fwd[pb] = i
                    inv[i] = pb
                    inv[b] = pa
        while cur > 0 and hist[cur] == 0:
            cur -= 1
        if cur > peak:
            peak = cur
        if thresh >= 0 and first_below < 0 and cnt_above == 0:
            first_below = t
    sc[CUR_MDEV] = cur
    sc[PEAK_MDEV] = peak
    sc[FIRST_BELOW] = first_below
    sc[SWAPS] = swaps
    sc[DEV_SUM] = dev_sum
    sc[CNT_ABOVE] = cnt_above
    sc[T_ABS] = t


_apply = njit(cache=True)(_apply_impl) if HAVE_NUMBA else _apply_impl


def apply_chunk(state, arrays: StateArrays, kinds, sort_idx, mix_i, mix_s,
                start: int, stop: int) -> None:
    """Apply steps [start, stop) of the chunk to the kernel state."""
    si = int(np.count_nonzero(kinds[:start] == 0))
    mi = start - si
    _apply(arrays.fwd, arrays.inv, kinds, sort_idx, mix_i, mix_s,
           start, stop, si, mi, state.pi.n, arrays.dev_hist, arrays.scalars)
    n_sort = int(np.count_nonzero(kinds[start:stop] == 0))
    state.t += stop - start
    state.sort_steps += n_sort
    state.mix_steps += stop - start - n_sort
