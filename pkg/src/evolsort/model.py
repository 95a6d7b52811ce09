"""
The evolving-sorting process: perturbation distributions, step schedules,
sorting and mixing steps, adjacent-comparison baseline algorithms, and the
deterministic run driver.

Randomness protocol
-------------------
A run is a pure function of (master seed, configuration).  The master seed is
split into three independent streams via ``numpy.random.SeedSequence.spawn``:

    stream 0  schedule     (only iid schedules draw from it)
    stream 1  sorting      (one index draw i in [1, n-1] per sorting step)
    stream 2  mixing       (one item draw i in [1, n], then one rank shift s)

Draws are generated in fixed-size chunks (``CHUNK`` steps of the interleaved
process at a time): first all sorting indices of the chunk as one vectorized
call, then all mixing items, then all mixing shifts.  Every execution path
(plain Python loop, compiled kernel) consumes the same chunked draws, so the
trajectories are bit-identical across paths.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .perm import Permutation

__all__ = [
    "ConfigurationError",
    "PerturbationSpec",
    "StepSchedule",
    "ProcessState",
    "SwapReport",
    "MixReport",
    "TrajectoryRecord",
    "sample_perturbation",
    "apply_sorting_at",
    "apply_sorting_step",
    "apply_mixing_at",
    "apply_mixing_step",
    "BaselineCursor",
    "baseline_step",
    "run",
    "simulate_dual",
    "split_streams",
    "random_valid_schedule",
    "validate_window",
]

CHUNK = 1 << 16

ALGORITHMS = ("naive", "insertion", "bubble", "cocktail")


class ConfigurationError(ValueError):
    """Invalid run configuration (bad parameters, exhausted schedule, ...)."""


def split_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Derive the three named streams (schedule, sorting, mixing) from one seed."""
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(np.random.Generator(np.random.PCG64(c)) for c in children)


# ============================================================================
# Perturbation distributions
# ============================================================================

@dataclass(frozen=True)
class PerturbationSpec:
    """A zero-mean integer rank-shift distribution with its MGF certificate.

    The certificate (lam, c_prime) asserts E[exp(3*lam*|D|)] <= c_prime with
    lam in (0, 1/3] and c_prime >= 1; built-in kinds compute it analytically,
    finite tables by direct summation over the support.
    """

    kind: str  # "adjacent" | "geometric" | "table"
    p: float | None = None
    support: tuple[tuple[int, Fraction], ...] | None = None
    lam: float = 1.0 / 3.0
    c_prime: float = float(math.e)

    # -- constructors --------------------------------------------------

    @classmethod
    def adjacent(cls, lam: float | None = None) -> "PerturbationSpec":
        """Uniform on {-1, +1}: the original random adjacent rank swap."""
        lam = 1.0 / 3.0 if lam is None else lam
        if not 0 < lam <= 1.0 / 3.0:
            raise ConfigurationError(f"lam must be in (0, 1/3], got {lam}")
        return cls(kind="adjacent", lam=lam, c_prime=math.exp(3.0 * lam))

    @classmethod
    def geometric(cls, p: float, lam: float | None = None) -> "PerturbationSpec":
        """Geometric magnitude (support >= 1) with a uniform random sign.

        This is the hot-spot adversary: |D| has P(|D| = k) = p (1-p)^(k-1).
        """
        if not 0.0 < p < 1.0:
            raise ConfigurationError(f"geometric success probability must be in (0,1), got {p}")
        radius = -math.log1p(-p) / 3.0  # MGF at 3*lam finite iff lam < radius
        if lam is None:
            lam = min(1.0 / 3.0, radius / 2.0)
        if not 0 < lam <= 1.0 / 3.0:
            raise ConfigurationError(f"lam must be in (0, 1/3], got {lam}")
        if lam >= radius:
            raise ConfigurationError(
                f"lam={lam} too large: E[exp(3 lam |D|)] diverges at lam >= {radius:.6g}")
        e3 = math.exp(3.0 * lam)
        c_prime = p * e3 / (1.0 - (1.0 - p) * e3)
        return cls(kind="geometric", p=p, lam=lam, c_prime=c_prime)

    @classmethod
    def from_table(cls, pairs: Sequence[tuple[int, Fraction | int | str]],
                   lam: float | None = None) -> "PerturbationSpec":
        """Finite-support distribution given as (shift, weight) pairs.

        Weights are handled as exact rationals so the zero-mean model
        assumption is checked exactly, not within a tolerance.
        """
        if not pairs:
            raise ConfigurationError("empty perturbation table")
        support: list[tuple[int, Fraction]] = []
        for s, w in pairs:
            wf = Fraction(w)
            if wf <= 0:
                raise ConfigurationError(f"weight for shift {s} must be positive, got {w}")
            if s == 0:
                warnings.warn("perturbation table contains s=0 (a wasted mixing step)")
            support.append((int(s), wf))
        total = sum(w for _, w in support)
        mean = sum(s * w for s, w in support) / total
        if mean != 0:
            raise ConfigurationError(f"perturbation table mean must be exactly 0, got {mean}")
        lam = 1.0 / 3.0 if lam is None else lam
        if not 0 < lam <= 1.0 / 3.0:
            raise ConfigurationError(f"lam must be in (0, 1/3], got {lam}")
        c_prime = sum(float(w / total) * math.exp(3.0 * lam * abs(s)) for s, w in support)
        return cls(kind="table", support=tuple(support), lam=lam, c_prime=max(1.0, c_prime))

    @classmethod
    def from_table_file(cls, path: str) -> "PerturbationSpec":
        """Parse a plain-text table: one "s weight" pair per line, '#' comments."""
        pairs: list[tuple[int, Fraction]] = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise ConfigurationError(f"{path}:{lineno}: expected 's weight', got {raw!r}")
                try:
                    pairs.append((int(parts[0]), Fraction(parts[1])))
                except ValueError as exc:
                    raise ConfigurationError(f"{path}:{lineno}: {exc}") from exc
        return cls.from_table(pairs)

    # -- sampling --------------------------------------------------------

    def sample_batch(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Vectorized sampling; this is the canonical draw protocol for runs."""
        if size == 0:
            return np.empty(0, dtype=np.int64)
        if self.kind == "adjacent":
            return (rng.integers(0, 2, size=size) * 2 - 1).astype(np.int64)
        if self.kind == "geometric":
            mag = rng.geometric(self.p, size=size).astype(np.int64)
            sign = rng.integers(0, 2, size=size) * 2 - 1
            return mag * sign
        vals = np.array([s for s, _ in self.support], dtype=np.int64)
        total = sum(w for _, w in self.support)
        probs = np.array([float(w / total) for _, w in self.support])
        idx = rng.choice(len(vals), size=size, p=probs)
        return vals[idx]

    def sample(self, rng: np.random.Generator) -> int:
        return int(self.sample_batch(rng, 1)[0])

    def describe(self) -> str:
        if self.kind == "adjacent":
            return "adjacent"
        if self.kind == "geometric":
            return f"geometric:{self.p:g}"
        return "table:" + ",".join(f"{s}={w}" for s, w in self.support)


def sample_perturbation(spec: PerturbationSpec, rng: np.random.Generator) -> int:
    """Draw one rank shift s from the perturbation distribution."""
    return spec.sample(rng)


# ============================================================================
# Step schedules
# ============================================================================

@dataclass(frozen=True)
class StepSchedule:
    """The sequence b_i of mixing steps between consecutive sorting steps.

    Every window of n consecutive b_i must sum to at most b*n, where b is the
    window budget parameter.  Fixed and explicit schedules satisfy (or are
    validated against) this directly; iid schedules enforce it by clamping
    each draw to the remaining budget of the current length-(n-1) suffix.
    """

    kind: str  # "fixed" | "explicit" | "iid"
    b: float  # window budget parameter, >= 1
    fixed_b: int | None = None
    values: tuple[int, ...] | None = None
    iid_gen: tuple | None = None  # ("uniform", lo, hi) | ("poisson", mu) | ("constant", k)

    @classmethod
    def fixed(cls, b: int) -> "StepSchedule":
        if b < 0:
            raise ConfigurationError(f"fixed schedule needs b >= 0, got {b}")
        return cls(kind="fixed", b=float(max(1, b)), fixed_b=int(b))

    @classmethod
    def explicit(cls, values: Sequence[int], b: float) -> "StepSchedule":
        vals = tuple(int(v) for v in values)
        if any(v < 0 for v in vals):
            raise ConfigurationError("schedule entries must be nonnegative")
        if b < 1:
            raise ConfigurationError(f"window budget b must be >= 1, got {b}")
        return cls(kind="explicit", b=float(b), values=vals)

    @classmethod
    def explicit_file(cls, path: str, b: float) -> "StepSchedule":
        values = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                try:
                    values.append(int(line))
                except ValueError as exc:
                    raise ConfigurationError(f"{path}:{lineno}: {exc}") from exc
        return cls.explicit(values, b)

    @classmethod
    def iid(cls, b: float, gen: tuple) -> "StepSchedule":
        if b < 1:
            raise ConfigurationError(f"window budget b must be >= 1, got {b}")
        if gen[0] not in ("uniform", "poisson", "constant"):
            raise ConfigurationError(f"unknown iid generator {gen[0]!r}")
        return cls(kind="iid", b=float(b), iid_gen=gen)

    def describe(self) -> str:
        if self.kind == "fixed":
            return "fixed"
        if self.kind == "explicit":
            return "explicit:" + ",".join(map(str, self.values))
        return "iid:" + ":".join(map(str, self.iid_gen))

    def iterator(self, n: int, rng: np.random.Generator) -> Iterator[int]:
        """Yield b_1, b_2, ...; raises ConfigurationError when an explicit
        schedule is exhausted."""
        if self.kind == "fixed":
            k = self.fixed_b
            while True:
                yield k
        elif self.kind == "explicit":
            yield from self.values
            raise ConfigurationError(
                f"explicit schedule exhausted after {len(self.values)} sorting steps")
        else:
            gen = self.iid_gen
            window: list[int] = []  # last n-1 values
            wsum = 0
            budget = self.b * n
            while True:
                if gen[0] == "uniform":
                    v = int(rng.integers(gen[1], gen[2] + 1))
                elif gen[0] == "poisson":
                    v = int(rng.poisson(gen[1]))
                else:
                    v = int(gen[1])
                v = max(0, min(v, int(budget - wsum)))
                yield v
                window.append(v)
                wsum += v
                if len(window) >= n:
                    wsum -= window.pop(0)


def validate_window(b_seq: Sequence[int], n: int, b: float) -> None:
    """Sliding-window validator: every n consecutive b_i must sum to <= b*n."""
    budget = b * n
    wsum = sum(b_seq[: min(n, len(b_seq))])
    if wsum > budget:
        raise ConfigurationError(f"window 0..{n} sums to {wsum} > {budget}")
    for t in range(len(b_seq) - n):
        wsum += b_seq[t + n] - b_seq[t]
        if wsum > budget:
            raise ConfigurationError(f"window starting at {t + 1} sums to {wsum} > {budget}")


def random_valid_schedule(n: int, b: float, length: int, rng: np.random.Generator,
                          burst: int | None = None) -> StepSchedule:
    """Generate a random explicit schedule satisfying the window property by
    construction: each draw is clamped to the remaining window budget."""
    burst = burst if burst is not None else max(1, int(2 * b))
    budget = b * n
    window: list[int] = []
    wsum = 0
    out = []
    for _ in range(length):
        v = int(rng.integers(0, burst + 1))
        v = min(v, int(budget - wsum))
        out.append(v)
        window.append(v)
        wsum += v
        if len(window) >= n:
            wsum -= window.pop(0)
    return StepSchedule.explicit(out, b)


# ============================================================================
# Process state and elementary steps
# ============================================================================

@dataclass
class SwapReport:
    i: int
    swapped: bool


@dataclass
class MixReport:
    i: int
    s: int
    effective: int  # rank travel of item i after boundary clamping


@dataclass
class TrajectoryRecord:
    step: int
    phase: int
    mdev: int
    dev: int
    kendall: int
    phi: float | None
    psi: float | None
    max_delta: int | None
    sorts: int
    mixes: int


@dataclass
class ProcessState:
    """The simulated permutation state plus step counters and RNG streams."""

    pi: Permutation
    t: int = 0
    sort_steps: int = 0
    mix_steps: int = 0
    rng_schedule: np.random.Generator = None
    rng_sort: np.random.Generator = None
    rng_mix: np.random.Generator = None
    seed: int | None = None

    @classmethod
    def from_seed(cls, n: int, seed: int, start: str | Permutation = "identity") -> "ProcessState":
        if isinstance(start, Permutation):
            pi = start.copy()
        elif start == "identity":
            pi = Permutation.identity(n)
        elif start == "reverse":
            pi = Permutation.reverse(n)
        else:
            raise ConfigurationError(f"unknown start {start!r}")
        if pi.n != n:
            raise ConfigurationError(f"start permutation has n={pi.n}, expected {n}")
        rs, ro, rm = split_streams(seed)
        return cls(pi=pi, rng_schedule=rs, rng_sort=ro, rng_mix=rm, seed=seed)


def apply_sorting_at(state: ProcessState, i: int) -> SwapReport:
    """One sorting step with a forced comparison index i in [1, n-1]."""
    pi = state.pi
    if not 1 <= i <= pi.n - 1:
        raise IndexError(f"sorting index {i} out of range 1..{pi.n - 1}")
    fwd, inv = pi.fwd, pi.inv
    u = fwd[i]
    w = fwd[i + 1]
    swapped = u > w
    if swapped:
        fwd[i] = w
        fwd[i + 1] = u
        inv[u] = i + 1
        inv[w] = i
    state.t += 1
    state.sort_steps += 1
    return SwapReport(i, swapped)


def apply_sorting_step(state: ProcessState, rng: np.random.Generator) -> SwapReport:
    """Sorting step of Naive Sort: uniform random adjacent pair, swap if inverted."""
    n = state.pi.n
    if n == 1:
        state.t += 1
        state.sort_steps += 1
        return SwapReport(0, False)
    return apply_sorting_at(state, int(rng.integers(1, n)))


def apply_mixing_at(state: ProcessState, i: int, s: int) -> MixReport:
    """One local rank perturbation with forced item i and shift s.

    Item value i is successively swapped with values i+1, ..., min(i+s, n)
    when s > 0, or with i-1, ..., max(i+s, 1) when s < 0; each value swap is
    two O(1) inverse-array updates.
    """
    pi = state.pi
    n = pi.n
    if not 1 <= i <= n:
        raise IndexError(f"item {i} out of range 1..{n}")
    fwd, inv = pi.fwd, pi.inv
    if s > 0:
        hi = min(i + s, n)
        for b in range(i + 1, hi + 1):
            pa, pb = inv[i], inv[b]
            fwd[pa], fwd[pb] = b, i
            inv[i], inv[b] = pb, pa
        effective = hi - i
    elif s < 0:
        lo = max(i + s, 1)
        for b in range(i - 1, lo - 1, -1):
            pa, pb = inv[i], inv[b]
            fwd[pa], fwd[pb] = b, i
            inv[i], inv[b] = pb, pa
        effective = i - lo
    else:
        effective = 0
    state.t += 1
    state.mix_steps += 1
    return MixReport(i, s, effective)


def apply_mixing_step(state: ProcessState, spec: PerturbationSpec,
                      rng: np.random.Generator) -> MixReport:
    n = state.pi.n
    i = int(rng.integers(1, n + 1))
    s = spec.sample(rng)
    return apply_mixing_at(state, i, s)


# ============================================================================
# Baseline adjacent-comparison algorithms
# ============================================================================

class BaselineCursor:
    """Deterministic scan state for insertion / bubble / cocktail sort.

    Every call to :func:`baseline_step` performs exactly one adjacent
    comparison (and conditional swap) at the cursor and advances it:

    - bubble: repeated left-to-right passes over positions 1..n-1;
    - cocktail: alternating left-to-right and right-to-left passes;
    - insertion: repeated insertion scans, comparing the inserted element
      backwards until it settles, then moving to the next outer index.
    """

    __slots__ = ("algorithm", "n", "pos", "direction", "outer")

    def __init__(self, algorithm: str, n: int):
        if algorithm not in ("insertion", "bubble", "cocktail"):
            raise ConfigurationError(f"unknown baseline algorithm {algorithm!r}")
        self.algorithm = algorithm
        self.n = n
        self.pos = 1
        self.direction = 1
        self.outer = 2  # insertion: element currently being inserted

    def next_index(self) -> int:
        return self.pos

    def advance(self, swapped: bool) -> None:
        n = self.n
        if self.algorithm == "bubble":
            self.pos = 1 if self.pos >= n - 1 else self.pos + 1
        elif self.algorithm == "cocktail":
            if self.direction > 0:
                if self.pos >= n - 1:
                    self.direction = -1
                    self.pos = max(1, n - 1 - 1) if n > 2 else 1
                else:
                    self.pos += 1
            else:
                if self.pos <= 1:
                    self.direction = 1
                    self.pos = min(n - 1, 2) if n > 2 else 1
                else:
                    self.pos -= 1
        else:  # insertion
            if swapped and self.pos > 1:
                self.pos -= 1
            else:
                self.outer = 2 if self.outer >= n else self.outer + 1
                self.pos = self.outer - 1


def baseline_step(state: ProcessState, cursor: BaselineCursor) -> SwapReport:
    """One adjacent comparison of the baseline algorithm at its cursor."""
    if state.pi.n == 1:
        state.t += 1
        state.sort_steps += 1
        return SwapReport(0, False)
    report = apply_sorting_at(state, cursor.next_index())
    cursor.advance(report.swapped)
    return report


# ============================================================================
# Chunked draw generation and the run driver
# ============================================================================

class _KindCursor:
    """Expands a schedule into per-chunk step-kind arrays (0 = sort, 1 = mix)."""

    def __init__(self, schedule: StepSchedule, n: int, rng: np.random.Generator):
        if schedule.kind == "fixed":
            # periodic pattern sort, b mixes: computed arithmetically
            self._period = schedule.fixed_b + 1
            self._phase = 0
            self._it = None
        else:
            self._it = schedule.iterator(n, rng)
            self._pending_mixes = 0

    def next_kinds(self, length: int) -> np.ndarray:
        if self._it is None:
            out = (np.arange(self._phase, self._phase + length) % self._period != 0)
            self._phase = (self._phase + length) % self._period
            return out.astype(np.uint8)
        out = np.ones(length, dtype=np.uint8)
        pos = 0
        if self._pending_mixes:
            take = min(self._pending_mixes, length)
            self._pending_mixes -= take
            pos = take
        while pos < length:
            out[pos] = 0
            pos += 1
            bi = next(self._it)
            if bi:
                take = min(bi, length - pos)
                pos += take
                self._pending_mixes = bi - take
        return out


def _draw_chunk(kinds: np.ndarray, n: int, spec: PerturbationSpec, algorithm: str,
                rng_sort: np.random.Generator, rng_mix: np.random.Generator):
    n_sort = int(np.count_nonzero(kinds == 0))
    n_mix = kinds.shape[0] - n_sort
    if algorithm == "naive" and n > 1 and n_sort:
        sort_idx = rng_sort.integers(1, n, size=n_sort)
    else:
        sort_idx = np.zeros(n_sort, dtype=np.int64)
    if n_mix:
        mix_i = rng_mix.integers(1, n + 1, size=n_mix)
        mix_s = spec.sample_batch(rng_mix, n_mix)
    else:
        mix_i = np.zeros(0, dtype=np.int64)
        mix_s = np.zeros(0, dtype=np.int64)
    return sort_idx, mix_i, mix_s


def run(state: ProcessState,
        spec: PerturbationSpec,
        schedule: StepSchedule,
        total_steps: int,
        algorithm: str = "naive",
        observers: Sequence = (),
        record_every: int = 0,
        phase: int = 0,
        kinds_out: list | None = None,
        use_kernel: bool | None = None) -> list[TrajectoryRecord]:
    """Advance the process ``total_steps`` steps and return recorded metrics.

    After the i-th sorting step exactly b_i mixing steps are performed; the
    overall step sequence therefore starts with a sorting step.  Observers
    (e.g. an AuxTracker) get ``on_sort(state, report)`` / ``on_mix(state,
    report)`` after every step.  ``record_every=0`` records only the final
    state; ``record_every=k`` additionally records every k steps.

    With no observers and Naive Sort the steps are applied by a compiled
    kernel; the trajectory is identical either way.
    """
    if total_steps < 0:
        raise ConfigurationError(f"total_steps must be >= 0, got {total_steps}")
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}")
    tracker = next((o for o in observers if hasattr(o, "phi")), None)
    if use_kernel is None:
        use_kernel = algorithm == "naive" and not observers and kinds_out is None
    records: list[TrajectoryRecord] = []

    def make_record() -> TrajectoryRecord:
        from .perm import dev as _dev, kendall_tau as _kt, mdev as _mdev
        pi = state.pi
        return TrajectoryRecord(
            step=state.t, phase=phase,
            mdev=_mdev(pi) if pi.n else 0, dev=_dev(pi), kendall=_kt(pi),
            phi=tracker.phi() if tracker is not None else None,
            psi=tracker.psi() if tracker is not None else None,
            max_delta=tracker.max_target_displacement() if tracker is not None else None,
            sorts=state.sort_steps, mixes=state.mix_steps)

    kind_cursor = _KindCursor(schedule, state.pi.n, state.rng_schedule)
    cursor = BaselineCursor(algorithm, state.pi.n) if algorithm != "naive" else None
    # record positions are relative to this call (the state may resume runs)
    base_t = state.t
    next_record = record_every if record_every else total_steps + 1
    done = 0
    if use_kernel:
        from . import kernels
        karr = kernels.state_arrays(state)
    while done < total_steps:
        length = min(CHUNK, total_steps - done)
        kinds = kind_cursor.next_kinds(length)
        if kinds_out is not None:
            kinds_out.extend(kinds.tolist())
        sort_idx, mix_i, mix_s = _draw_chunk(kinds, state.pi.n, spec, algorithm,
                                             state.rng_sort, state.rng_mix)
        if use_kernel:
            applied = 0
            while applied < length:
                stop = length if next_record > done + length else next_record - done
                kernels.apply_chunk(state, karr, kinds, sort_idx, mix_i, mix_s,
                                    applied, stop)
                applied = stop
                if state.t - base_t >= next_record and next_record <= total_steps:
                    kernels.sync_state(state, karr)
                    records.append(make_record())
                    next_record += record_every
        else:
            sl = sort_idx.tolist()
            il = mix_i.tolist()
            ssl = mix_s.tolist()
            si = mi = 0
            for k in kinds.tolist():
                if k == 0:
                    if cursor is not None:
                        report = baseline_step(state, cursor)
                    elif state.pi.n == 1:
                        state.t += 1
                        state.sort_steps += 1
                        report = SwapReport(0, False)
                    else:
                        report = apply_sorting_at(state, sl[si])
                        si += 1
                    for obs in observers:
                        obs.on_sort(state, report)
                else:
                    report = apply_mixing_at(state, il[mi], ssl[mi])
                    mi += 1
                    for obs in observers:
                        obs.on_mix(state, report)
                if state.t - base_t == next_record:
                    records.append(make_record())
                    next_record += record_every
        done += length
    if use_kernel:
        kernels.sync_state(state, karr)
    if not records or records[-1].step != state.t:
        records.append(make_record())
    return records


# ============================================================================
# Dual simulation cross-check
# ============================================================================

def simulate_dual(n: int, seed: int, spec: PerturbationSpec, schedule: StepSchedule,
                  total_steps: int, check_every: int = 1) -> tuple[bool, int]:
    """Simulate the maintained/true order pair explicitly and cross-check it
    against the direct single-permutation simulation.

    The pair (nu, rho) holds the maintained order and the true order; a
    sorting step compares the true ranks of the two items at adjacent
    maintained positions and conditionally swaps them in nu, while a mixing
    step perturbs ranks in rho.  Both simulations replay identical draws, and
    the reduced permutation (position -> true rank of the item there) must
    equal the directly simulated state at every checked step.

    Returns (ok, first_divergent_step); the step is -1 when consistent.
    """
    state = ProcessState.from_seed(n, seed)
    nu = Permutation.identity(n)   # nu(pos) = item at maintained position pos
    rho = Permutation.identity(n)  # rho(rank) = item at true rank
    kind_cursor = _KindCursor(schedule, n, state.rng_schedule)
    done = 0
    t = 0
    while done < total_steps:
        length = min(CHUNK, total_steps - done)
        kinds = kind_cursor.next_kinds(length)
        sort_idx, mix_i, mix_s = _draw_chunk(kinds, n, spec, "naive",
                                             state.rng_sort, state.rng_mix)
        si = mi = 0
        for k in kinds:
            if k == 0:
                if n > 1:
                    i = int(sort_idx[si]); si += 1
                    apply_sorting_at(state, i)
                    a, b = nu.fwd[i], nu.fwd[i + 1]
                    if rho.inv[a] > rho.inv[b]:  # compare true ranks
                        nu.swap_positions(i, i + 1)
                else:
                    state.t += 1
                    state.sort_steps += 1
            else:
                i = int(mix_i[mi]); s = int(mix_s[mi]); mi += 1
                apply_mixing_at(state, i, s)
                # rank-slot swaps on rho anchored at rank i: rho(i) is
                # successively swapped with rho(i+1), rho(i+2), ... over the
                # same clamped range as the direct simulation's value swaps
                if s > 0:
                    for r in range(i + 1, min(i + s, n) + 1):
                        rho.swap_positions(i, r)
                elif s < 0:
                    for r in range(i - 1, max(i + s, 1) - 1, -1):
                        rho.swap_positions(i, r)
            t += 1
            if t % check_every == 0 or t == total_steps:
                for pos in range(1, n + 1):
                    if rho.inv[nu.fwd[pos]] != state.pi.fwd[pos]:
                        return False, t
        done += length
    return True, -1
