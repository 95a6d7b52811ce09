"""
The auxiliary analysis process that runs alongside the simulated permutation:
a gap-padded list, two target permutations, the repair procedures that keep
them admissible and locally optimal, the block decomposition of the list, the
two exponential potentials, and the full/partial target reset interventions.

Layout conventions follow ``perm``: arrays are 1-based with slot 0 unused, and
the padded list stores 0 for a gap.  A padded list of a permutation on [n]
with padding factor d > 1 has length N = (n+1)*d - 1, and the element with
target rank r wants to sit at slot d*r.

Overflow policy for the potentials: values are evaluated in double precision
from an exact integer histogram of displacements; when alpha*displacement
exceeds the float range the returned potential is ``inf`` while
``log1p``-style log-domain accessors stay finite.  Monotonicity checks never
go through floats when alpha = log(B) for an integer B (the default alpha is
log 20): they compare sums of exact integer powers of B.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable

from .perm import Permutation

__all__ = [
    "DEFAULT_ALPHA",
    "PaddedList",
    "PotentialConfig",
    "Block",
    "TrackerSyncError",
    "make_padding",
    "lopt",
    "adm",
    "theta_filter",
    "tail_displacement",
    "mdsp",
    "dsp",
    "phi_of",
    "psi_of",
    "decompose_blocks",
    "head_dominance_gap",
    "AuxTracker",
    "aux_step",
    "phi",
    "psi",
    "reset_full",
    "reset_partial",
]

DEFAULT_ALPHA = math.log(20.0)
_EXP_CAP = 700.0  # alpha * displacement above this overflows doubles


class TrackerSyncError(RuntimeError):
    """The tracker and the process disagree about the step counter."""


@dataclass
class PotentialConfig:
    """Smoothing parameters for the two potentials.

    The displacement potential's drift guarantees need alpha*(d-1) >= log 20;
    ``for_d`` picks the minimal such alpha for a given padding factor.
    """

    alpha: float = DEFAULT_ALPHA
    alpha_tilde: float = DEFAULT_ALPHA / 42.0
    d: int = 2

    def __post_init__(self):
        if self.d <= 1:
            raise ValueError(f"padding factor d must be > 1, got {self.d}")
        if self.alpha <= 0 or self.alpha_tilde <= 0:
            raise ValueError("smoothing parameters must be positive")
        if self.alpha * (self.d - 1) < DEFAULT_ALPHA - 1e-12:
            raise ValueError(
                f"alpha*(d-1) = {self.alpha * (self.d - 1):.4f} < log 20; "
                "too small for the drift guarantees")

    @classmethod
    def for_d(cls, d: int) -> "PotentialConfig":
        alpha = DEFAULT_ALPHA / (d - 1)
        return cls(alpha=alpha, alpha_tilde=alpha / 42.0, d=d)


# ============================================================================
# Padded lists
# ============================================================================

@dataclass
class PaddedList:
    """Length-N list over [n] plus gaps, containing a permutation in order."""

    n: int
    d: int
    entries: list[int]  # slot 0 unused; 0 denotes a gap

    @property
    def N(self) -> int:
        return (self.n + 1) * self.d - 1

    def copy(self) -> "PaddedList":
        return PaddedList(self.n, self.d, self.entries.copy())

    def gap_slots(self) -> list[int]:
        return [j for j in range(1, self.N + 1) if not self.entries[j]]

    def reading(self) -> list[int]:
        """The non-gap entries left to right."""
        return [v for v in self.entries[1:] if v]

    def validate(self, pi: Permutation | None = None) -> None:
        if len(self.entries) != self.N + 1:
            raise AssertionError("padded list has wrong length")
        seen = [False] * (self.n + 1)
        for v in self.entries[1:]:
            if v:
                if not 1 <= v <= self.n or seen[v]:
                    raise AssertionError(f"bad or duplicate entry {v}")
                seen[v] = True
        if not all(seen[1:]):
            raise AssertionError("missing values")
        if pi is not None and self.reading() != pi.fwd[1:]:
            raise AssertionError("padded list does not read back the permutation")


def make_padding(pi: Permutation, d: int, gaps: Iterable[int] | None = None) -> PaddedList:
    """Embed pi into a length-(n+1)d-1 list.

    Canonical placement (gaps=None) puts the i-th listed value pi(i) at slot
    d*i.  With an explicit gap set, the non-gap slots in ascending order
    receive pi(1), ..., pi(n); the gap set must leave exactly n free slots.
    """
    if d <= 1:
        raise ValueError(f"padding factor d must be > 1, got {d}")
    n = pi.n
    N = (n + 1) * d - 1
    entries = [0] * (N + 1)
    if gaps is None:
        for i in range(1, n + 1):
            entries[d * i] = pi.fwd[i]
    else:
        gap_set = set(gaps)
        if len(gap_set) != N - n or not all(1 <= g <= N for g in gap_set):
            raise ValueError(f"gap set must be {N - n} distinct slots in 1..{N}")
        i = 1
        for j in range(1, N + 1):
            if j not in gap_set:
                entries[j] = pi.fwd[i]
                i += 1
    return PaddedList(n, d, entries)


def _lopt_into(entries: list[int], pos: list[int], tau: list[int], d: int, N: int,
               seeds: Iterable[int], on_shift=None) -> None:
    """Repair local optimality in place, smallest violating slot first.

    Every violated slot is always present in the heap: a shift moves a gap by
    one slot and can only disturb the two adjacent slots, which are re-pushed.
    """
    heap = list(seeds)
    heapq.heapify(heap)
    push = heapq.heappush
    pop = heapq.heappop
    while heap:
        j = pop(heap)
        if j < 1 or j > N:
            continue
        v = entries[j]
        if not v:
            continue
        target = d * tau[v]
        if j < target and not entries[j + 1]:
            entries[j] = 0
            entries[j + 1] = v
            pos[v] = j + 1
            if on_shift is not None:
                on_shift(target - j, target - j - 1)
            push(heap, j - 1)
            push(heap, j + 1)
        elif j > target and not entries[j - 1]:
            entries[j] = 0
            entries[j - 1] = v
            pos[v] = j - 1
            if on_shift is not None:
                on_shift(j - target, j - target - 1)
            push(heap, j - 1)
            push(heap, j + 1)


def lopt(l: PaddedList, tau: Permutation) -> PaddedList:
    """Shift elements over adjacent gaps toward their targets until no element
    has a gap on its target side; non-gap relative order is preserved."""
    out = l.copy()
    pos = [0] * (l.n + 1)
    for j in range(1, l.N + 1):
        if out.entries[j]:
            pos[out.entries[j]] = j
    _lopt_into(out.entries, pos, tau.fwd, l.d, l.N, range(1, l.N + 1))
    return out


def is_locally_optimal(l: PaddedList, tau: Permutation) -> bool:
    d, N, entries, tf = l.d, l.N, l.entries, tau.fwd
    for j in range(1, N + 1):
        v = entries[j]
        if not v:
            continue
        target = d * tf[v]
        if j < target and not entries[j + 1]:
            return False
        if j > target and not entries[j - 1]:
            return False
    return True


# ============================================================================
# Admissibility
# ============================================================================

def _any_adm_violation(tau: list[int], pif: list[int], n: int, seeds) -> bool:
    for q in seeds:
        if 1 <= q < n:
            u = pif[q]
            w = pif[q + 1]
            if u < w and tau[u] > tau[w]:
                return True
    return False


def _adm_into(tau: list[int], pif: list[int], n: int, seeds: Iterable[int],
              on_swap=None) -> None:
    """Repair admissibility in place, smallest violating index first.

    A violation is a sorted adjacent pair of the permutation whose targets are
    out of order; the repair swaps the two targets.  Only the conditions at
    i-1, i, i+1 can change after a swap at i, so a heap of candidates visits
    violations in exactly ascending order.
    """
    heap = list(seeds)
    heapq.heapify(heap)
    push = heapq.heappush
    pop = heapq.heappop
    while heap:
        q = pop(heap)
        if q < 1 or q >= n:
            continue
        u = pif[q]
        w = pif[q + 1]
        if u < w and tau[u] > tau[w]:
            tu = tau[u]
            tw = tau[w]
            tau[u] = tw
            tau[w] = tu
            if on_swap is not None:
                on_swap(u, w, tw, tu)
            push(heap, q - 1)
            push(heap, q + 1)


def adm(tau: Permutation, pi: Permutation) -> Permutation:
    """Return tau made admissible w.r.t. pi: wherever pi(i) < pi(i+1), the
    targets of those two values end up in the same order."""
    if tau.n != pi.n:
        raise ValueError(f"dimension mismatch: {tau.n} vs {pi.n}")
    out = tau.fwd.copy()
    _adm_into(out, pi.fwd, pi.n, range(1, pi.n))
    return Permutation.from_one_line(out[1:])


def is_admissible(tau: Permutation, pi: Permutation) -> bool:
    tf, pf = tau.fwd, pi.fwd
    return all(not (pf[i] < pf[i + 1] and tf[pf[i]] > tf[pf[i + 1]])
               for i in range(1, pi.n))


# ============================================================================
# Filtering, displacements, potentials
# ============================================================================

def theta_filter(tau: Permutation, theta: int) -> Permutation:
    """Partial target reset: keep entries deviating by more than theta, and
    sort the remaining values into the remaining positions in order."""
    if theta < 0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    n = tau.n
    out = [0] * (n + 1)
    taken = [False] * (n + 1)
    for i in range(1, n + 1):
        if abs(tau.fwd[i] - i) > theta:
            out[i] = tau.fwd[i]
            taken[tau.fwd[i]] = True
    free_vals = [v for v in range(1, n + 1) if not taken[v]]
    k = 0
    for i in range(1, n + 1):
        if not out[i]:
            out[i] = free_vals[k]
            k += 1
    return Permutation.from_one_line(out[1:])


def tail_displacement(sigma: Permutation, threshold: int) -> int:
    """Sum of the target displacements delta(i) = |sigma^-1(i) - i| over the
    items with delta(i) >= threshold."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    inv = sigma.inv
    total = 0
    for i in range(1, sigma.n + 1):
        delta = abs(inv[i] - i)
        if delta >= threshold:
            total += delta
    return total


def _displacements(l: PaddedList, tau: Permutation | None):
    tf = tau.fwd if tau is not None else None
    d = l.d
    for j in range(1, l.N + 1):
        v = l.entries[j]
        if v:
            target = d * (tf[v] if tf is not None else v)
            yield abs(j - target)


def mdsp(l: PaddedList, tau: Permutation | None = None) -> int:
    """Maximum displacement of the padded list w.r.t. tau (identity default)."""
    return max(_displacements(l, tau), default=0)


def dsp(l: PaddedList, tau: Permutation | None = None) -> int:
    """Total displacement of the padded list w.r.t. tau (identity default)."""
    return sum(_displacements(l, tau))


def phi_of(l: PaddedList, tau: Permutation, alpha: float) -> float:
    """Displacement potential: sum over non-gap slots of exp(alpha*disp) - 1."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    total = 0.0
    for disp in _displacements(l, tau):
        x = alpha * disp
        total += math.exp(x) - 1.0 if x <= _EXP_CAP else math.inf
    return total


def psi_of(sigma: Permutation, alpha: float) -> float:
    """Target-deviation potential: sum over items of exp(alpha*|sigma(i)-i|)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    total = 0.0
    for i in range(1, sigma.n + 1):
        x = alpha * abs(sigma.fwd[i] - i)
        total += math.exp(x) if x <= _EXP_CAP else math.inf
    return total


# ============================================================================
# Blocks
# ============================================================================

@dataclass
class Block:
    start: int
    end: int
    kind: str  # "left" | "right" | "stationary"
    head_position: int


def decompose_blocks(l, tau: Permutation | None = None) -> list[Block]:
    """Partition the non-gap slots into maximal blocks.

    Accepts either (PaddedList, targets) or an AuxTracker.  Within a
    gap-free, target-monotone run the signed slack d*tau(v) - j is strictly
    increasing (targets are d apart, slots 1 apart), so each run splits into
    a negative-slack prefix (a left block, head at its left end), at most one
    zero-slack singleton (stationary), and a positive-slack suffix (a right
    block, head at its right end).
    """
    if tau is None:
        l, tau = l.padded_list(), l.tau_perm()
    d, N, entries, tf = l.d, l.N, l.entries, tau.fwd
    blocks: list[Block] = []

    def close_segment(seg_start: int, seg_end: int) -> None:
        neg_end = seg_start - 1
        pos_start = seg_end + 1
        for j in range(seg_start, seg_end + 1):
            e = d * tf[entries[j]] - j
            if e < 0:
                neg_end = j
            elif e == 0:
                blocks.append(Block(j, j, "stationary", j))
            else:
                pos_start = j
                break
        if neg_end >= seg_start:
            blocks.append(Block(seg_start, neg_end, "left", seg_start))
        if pos_start <= seg_end:
            blocks.append(Block(pos_start, seg_end, "right", seg_end))

    run_start = 0
    prev_t = 0
    for j in range(1, N + 2):
        v = entries[j] if j <= N else 0
        if v and run_start and tf[v] > prev_t:
            prev_t = tf[v]
            continue
        if run_start:
            close_segment(run_start, j - 1)
        run_start = j if v else 0
        prev_t = tf[v] if v else 0
    blocks.sort(key=lambda blk: blk.start)
    return blocks


def head_dominance_gap(l, tau: Permutation | None = None,
                       alpha: float | None = None) -> float:
    """Worst ratio over non-stationary blocks of (block potential sum) to the
    head's potential term; bounded by 1/(1 - exp(-alpha*(d-1))).

    Accepts either (PaddedList, targets, alpha) or (AuxTracker, alpha=...).
    """
    if tau is None:
        if alpha is None:
            alpha = l.alpha
        l, tau = l.padded_list(), l.tau_perm()
    if alpha is None:
        raise ValueError("alpha required")
    d, tf = l.d, tau.fwd
    worst = 0.0
    for blk in decompose_blocks(l, tau):
        if blk.kind == "stationary":
            continue
        head_disp = abs(d * tf[l.entries[blk.head_position]] - blk.head_position)
        ratio = 0.0
        for j in range(blk.start, blk.end + 1):
            disp = abs(d * tf[l.entries[j]] - j)
            ratio += math.exp(alpha * (disp - head_disp))
        worst = max(worst, ratio)
    return worst


# ============================================================================
# The incremental tracker
# ============================================================================

def _exact_base(alpha: float) -> int | None:
    base = round(math.exp(alpha))
    if base >= 2 and math.log(base) == alpha:
        return base
    return None


class AuxTracker:
    """Co-evolves (padded list, target permutations) with a ProcessState.

    All per-step maintenance is incremental: a step touches O(|s|) values and
    each repair swap or shift is O(1) against exact integer displacement
    histograms; the potentials are evaluated lazily from those histograms.

    With ``assert_monotone=True`` the tracker verifies after every step that
    the displacement potential did not increase, comparing the multiset of
    changed displacements exactly (integer powers of 20 for the default
    smoothing).  Every admissibility swap is also checked against the two
    scalar swap inequalities; violations of either kind are counted, never
    silently dropped.
    """

    def __init__(self, state, d: int = 2, alpha: float | None = None,
                 tau: Permutation | None = None, sigma: Permutation | None = None,
                 gaps: Iterable[int] | None = None, assert_monotone: bool = False):
        if d <= 1:
            raise ValueError(f"padding factor d must be > 1, got {d}")
        self.state = state
        self.n = state.pi.n
        self.d = d
        self.alpha = DEFAULT_ALPHA / (d - 1) if alpha is None else float(alpha)
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        self.N = (self.n + 1) * d - 1
        self.t = state.t
        n = self.n
        self.tau = list(range(n + 1)) if tau is None else tau.fwd.copy()
        self.sigma = list(range(n + 1)) if sigma is None else sigma.fwd.copy()
        _adm_into(self.tau, state.pi.fwd, n, range(1, n))
        _adm_into(self.sigma, state.pi.fwd, n, range(1, n))
        padded = make_padding(state.pi, d, gaps)
        self.l = padded.entries
        self.pos = [0] * (n + 1)
        for j in range(1, self.N + 1):
            if self.l[j]:
                self.pos[self.l[j]] = j
        _lopt_into(self.l, self.pos, self.tau, d, self.N, range(1, self.N + 1))
        self.assert_monotone = assert_monotone
        self.exact_base = _exact_base(self.alpha)
        self._pow: list[int] = [1]
        self.monotone_violations = 0
        self.adm_violations = 0
        self.adm_swaps = 0
        self.resets = 0
        self._changes_old: list[int] = []
        self._changes_new: list[int] = []
        self._rebuild_histograms()

    # -- histogram bookkeeping -------------------------------------------

    def _rebuild_histograms(self) -> None:
        n, d = self.n, self.d
        self.phi_hist = [0] * (n * d)
        for j in range(1, self.N + 1):
            v = self.l[j]
            if v:
                self.phi_hist[abs(j - d * self.tau[v])] += 1
        self.psi_hist = [0] * n
        for i in range(1, n + 1):
            self.psi_hist[abs(self.sigma[i] - i)] += 1
        self.sigma_max = max((k for k in range(n) if self.psi_hist[k]), default=0)

    def _move_phi(self, old: int, new: int) -> None:
        self.phi_hist[old] -= 1
        self.phi_hist[new] += 1
        if self.assert_monotone:
            self._changes_old.append(old)
            self._changes_new.append(new)

    def _move_psi(self, old: int, new: int) -> None:
        self.psi_hist[old] -= 1
        self.psi_hist[new] += 1
        if new > self.sigma_max:
            self.sigma_max = new

    # -- potentials and metrics -------------------------------------------

    def phi(self, alpha: float | None = None) -> float:
        """Displacement potential of the padded list against tau."""
        a = self.alpha if alpha is None else alpha
        total = 0.0
        for k, cnt in enumerate(self.phi_hist):
            if cnt:
                x = a * k
                total += cnt * (math.exp(x) - 1.0) if x <= _EXP_CAP else math.inf
        return total

    def log_phi(self, alpha: float | None = None) -> float:
        """log(phi + #nongaps) = log sum exp(alpha*disp); finite at any scale."""
        a = self.alpha if alpha is None else alpha
        terms = [math.log(cnt) + a * k for k, cnt in enumerate(self.phi_hist) if cnt]
        if not terms:
            return -math.inf
        m = max(terms)
        return m + math.log(sum(math.exp(t - m) for t in terms))

    def psi(self, alpha: float | None = None) -> float:
        """Deviation potential of sigma."""
        a = self.alpha if alpha is None else alpha
        total = 0.0
        for k, cnt in enumerate(self.psi_hist):
            if cnt:
                x = a * k
                total += cnt * math.exp(x) if x <= _EXP_CAP else math.inf
        return total

    def max_target_displacement(self) -> int:
        return self.sigma_max

    def tau_perm(self) -> Permutation:
        return Permutation.from_one_line(self.tau[1:])

    def sigma_perm(self) -> Permutation:
        return Permutation.from_one_line(self.sigma[1:])

    def padded_list(self) -> PaddedList:
        return PaddedList(self.n, self.d, self.l.copy())

    def dev_tau(self) -> int:
        return sum(abs(self.tau[i] - i) for i in range(1, self.n + 1))

    def mdev_tau(self) -> int:
        return max((abs(self.tau[i] - i) for i in range(1, self.n + 1)), default=0)

    # -- step replay -------------------------------------------------------

    def _sync(self, state) -> None:
        if self.t != state.t - 1:
            raise TrackerSyncError(
                f"tracker at step {self.t}, process at {state.t}; expected difference 1")
        self.t = state.t

    def on_sort(self, state, report) -> None:
        self._sync(state)
        if not report.swapped:
            return
        i = report.i
        fwd = state.pi.fwd
        w = fwd[i]       # post-swap: smaller value now first
        u = fwd[i + 1]
        d, tau, pos = self.d, self.tau, self.pos
        ju = pos[u]
        jw = pos[w]
        # u preceded w in the list; exchange the two occupants
        self.l[ju] = w
        self.l[jw] = u
        pos[u] = jw
        pos[w] = ju
        tu = d * tau[u]
        tw = d * tau[w]
        self._move_phi(abs(ju - tu), abs(ju - tw))
        self._move_phi(abs(jw - tw), abs(jw - tu))
        touched = [ju - 1, ju, ju + 1, jw - 1, jw, jw + 1]
        self._adm_tau((i - 1, i, i + 1), touched)
        self._adm_sigma((i - 1, i, i + 1))
        _lopt_into(self.l, pos, tau, d, self.N, touched, self._move_phi)
        self._end_step()

    def on_mix(self, state, report) -> None:
        self._sync(state)
        i, s = report.i, report.s
        if report.effective == 0:
            return
        n, d = self.n, self.d
        l, pos, tau, sigma = self.l, self.pos, self.tau, self.sigma
        if s > 0:
            values = range(i + 1, min(i + s, n) + 1)
        else:
            values = range(i - 1, max(i + s, 1) - 1, -1)
        for b in values:
            # exchanging both occupants and targets keeps every slot's
            # displacement unchanged, so the phi histogram is untouched
            ja = pos[i]
            jb = pos[b]
            l[ja] = b
            l[jb] = i
            pos[i] = jb
            pos[b] = ja
            tau[i], tau[b] = tau[b], tau[i]
            si_, sb = sigma[i], sigma[b]
            self._move_psi(abs(si_ - i), abs(sb - i))
            self._move_psi(abs(sb - b), abs(si_ - b))
            sigma[i], sigma[b] = sb, si_
        inv = state.pi.inv
        lo, hi = (i, min(i + s, n)) if s > 0 else (max(i + s, 1), i)
        seeds = set()
        for v in range(lo, hi + 1):
            p = inv[v]
            seeds.add(p - 1)
            seeds.add(p)
        touched: list[int] = []
        self._adm_tau(seeds, touched)
        self._adm_sigma(seeds)
        if touched:
            _lopt_into(l, pos, tau, d, self.N, touched, self._move_phi)
        self._end_step()

    def _adm_tau(self, seeds, touched_slots: list[int]) -> None:
        pif = self.state.pi.fwd
        if not _any_adm_violation(self.tau, pif, self.n, seeds):
            return
        d, pos = self.d, self.pos

        def on_swap(u, w, new_tu, new_tw):
            self._check_adm_swap(u, w, new_tu, new_tw)
            ju, jw = pos[u], pos[w]
            self._move_phi(abs(ju - d * new_tw), abs(ju - d * new_tu))
            self._move_phi(abs(jw - d * new_tu), abs(jw - d * new_tw))
            touched_slots.extend((ju - 1, ju, ju + 1, jw - 1, jw, jw + 1))

        _adm_into(self.tau, pif, self.n, seeds, on_swap)

    def _adm_sigma(self, seeds) -> None:
        pif = self.state.pi.fwd
        if not _any_adm_violation(self.sigma, pif, self.n, seeds):
            return

        def on_swap(u, w, new_su, new_sw):
            self._check_adm_swap(u, w, new_su, new_sw)
            self._move_psi(abs(new_sw - u), abs(new_su - u))
            self._move_psi(abs(new_su - w), abs(new_sw - w))

        _adm_into(self.sigma, pif, self.n, seeds, on_swap)

    def _check_adm_swap(self, a: int, b: int, c: int, dd: int) -> None:
        # a < b are the swapped items, c < dd their targets before the swap;
        # the swap must not increase the displacement sum nor the maximum
        self.adm_swaps += 1
        if abs(a - c) + abs(b - dd) > abs(a - dd) + abs(b - c):
            self.adm_violations += 1
        if max(abs(a - c), abs(b - dd)) > max(abs(a - dd), abs(b - c)):
            self.adm_violations += 1

    def _end_step(self) -> None:
        psi_hist = self.psi_hist
        smax = self.sigma_max
        while smax > 0 and not psi_hist[smax]:
            smax -= 1
        self.sigma_max = smax
        if not self.assert_monotone:
            return
        olds, news = self._changes_old, self._changes_new
        if olds or news:
            olds.sort()
            news.sort()
            if olds != news and not self._non_increasing(olds, news):
                self.monotone_violations += 1
            olds.clear()
            news.clear()

    def _non_increasing(self, olds: list[int], news: list[int]) -> bool:
        base = self.exact_base
        if base is not None:
            powers = self._pow
            top = max(olds[-1], news[-1])
            while len(powers) <= top:
                powers.append(powers[-1] * base)
            return sum(powers[k] for k in news) <= sum(powers[k] for k in olds)
        a = self.alpha
        lo = _logsumexp([a * k for k in olds])
        ln = _logsumexp([a * k for k in news])
        return ln <= lo + 1e-9

    # -- interventions -----------------------------------------------------

    def reset_full(self) -> None:
        """Reset both targets to the identity and re-optimize the list."""
        n = self.n
        self.tau = list(range(n + 1))
        self.sigma = list(range(n + 1))
        _lopt_into(self.l, self.pos, self.tau, self.d, self.N, range(1, self.N + 1))
        self.resets += 1
        self._rebuild_histograms()

    def reset_partial(self, theta: int) -> None:
        """Reset sigma to the identity; replace tau by its theta-filtering
        (made admissible), then re-optimize the list against the new tau."""
        n = self.n
        tau_hat = theta_filter(self.tau_perm(), theta)
        self.tau = tau_hat.fwd.copy()
        _adm_into(self.tau, self.state.pi.fwd, n, range(1, n))
        self.sigma = list(range(n + 1))
        _lopt_into(self.l, self.pos, self.tau, self.d, self.N, range(1, self.N + 1))
        self.resets += 1
        self._rebuild_histograms()

    # -- debugging ---------------------------------------------------------

    def clone(self, state=None) -> "AuxTracker":
        other = object.__new__(AuxTracker)
        other.__dict__ = {}
        for k, v in self.__dict__.items():
            other.__dict__[k] = v.copy() if isinstance(v, list) else v
        if state is not None:
            other.state = state
        return other

    def debug_validate(self) -> None:
        """Cross-check every incremental structure against a from-scratch
        recomputation; raises AssertionError on any disagreement."""
        pi = self.state.pi
        padded = self.padded_list()
        padded.validate(pi)
        tau_p = self.tau_perm()
        if not is_admissible(tau_p, pi):
            raise AssertionError("tau not admissible")
        if not is_admissible(self.sigma_perm(), pi):
            raise AssertionError("sigma not admissible")
        if not is_locally_optimal(padded, tau_p):
            raise AssertionError("list not locally optimal")
        for v in range(1, self.n + 1):
            if self.l[self.pos[v]] != v:
                raise AssertionError("position index out of sync")
        phi_hist = [0] * (self.n * self.d)
        for j in range(1, self.N + 1):
            if self.l[j]:
                phi_hist[abs(j - self.d * self.tau[self.l[j]])] += 1
        if phi_hist != self.phi_hist:
            raise AssertionError("phi histogram out of sync")
        psi_hist = [0] * self.n
        for i in range(1, self.n + 1):
            psi_hist[abs(self.sigma[i] - i)] += 1
        if psi_hist != self.psi_hist:
            raise AssertionError("psi histogram out of sync")
        if self.sigma_max != max((k for k in range(self.n) if psi_hist[k]), default=0):
            raise AssertionError("sigma_max out of sync")

    def dump(self) -> str:
        """Plain-text snapshot: one line per slot, "pos value target disp"."""
        lines = []
        for j in range(1, self.N + 1):
            v = self.l[j]
            if v:
                t = self.d * self.tau[v]
                lines.append(f"{j} {v} {t} {abs(j - t)}")
            else:
                lines.append(f"{j} - - -")
        return "\n".join(lines) + "\n"


def _logsumexp(xs: list[float]) -> float:
    m = max(xs)
    return m + math.log(sum(math.exp(x - m) for x in xs))


# -- spec-surface wrappers ---------------------------------------------------

def aux_step(tracker: AuxTracker, report) -> AuxTracker:
    """Advance the tracker by the step that produced ``report``."""
    if hasattr(report, "swapped"):
        tracker.on_sort(tracker.state, report)
    else:
        tracker.on_mix(tracker.state, report)
    return tracker


def phi(tracker: AuxTracker, alpha: float | None = None) -> float:
    return tracker.phi(alpha)


def psi(sigma: Permutation, alpha: float) -> float:
    return psi_of(sigma, alpha)


def reset_full(tracker: AuxTracker) -> AuxTracker:
    tracker.reset_full()
    return tracker


def reset_partial(tracker: AuxTracker, theta: int) -> AuxTracker:
    tracker.reset_partial(theta)
    return tracker
