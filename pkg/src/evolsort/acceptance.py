"""
The twelve acceptance checks: exact distance identities, the padding
displacement bounds, deterministic and expected potential drift, head
dominance, theta-filtering bounds, admissible-swap inequalities, the
sorting-fraction window bound, statistical potential growth, desk-scale
deviation scaling, the two lower-bound experiments, and the dual-simulation
cross-check.

Each check runs at its committed scale and tolerance and returns a
CheckResult; ``run_criteria`` executes a selection and is what both the CLI
``verify`` subcommand and the pytest acceptance suite call.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from functools import partial

import numpy as np

from .aux import (
    DEFAULT_ALPHA,
    adm,
    dsp,
    head_dominance_gap,
    lopt,
    make_padding,
    mdsp,
    theta_filter,
)
from .harness import (
    DRIFT_RUN_SEEDS,
    LB_SEEDS,
    PSI_SEEDS,
    SCALING_SEEDS,
    _pool_map,
    drift_run,
    exact_drift_check,
    min_sorting_fraction,
    psi_growth_check,
    run_lower_bound_convergence,
    run_lower_bound_mdev,
    run_scaling_study,
)
from .model import (
    PerturbationSpec,
    ProcessState,
    StepSchedule,
    random_valid_schedule,
    run,
    simulate_dual,
    validate_window,
)
from .perm import (
    Permutation,
    dev,
    kendall_tau,
    kendall_tau_naive,
    mdev,
    random_permutation,
)

__all__ = ["CheckResult", "CRITERIA", "run_criteria"]


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.criterion:2d} {self.name}: "
                f"{self.detail} ({self.seconds:.1f}s)")


# ---------------------------------------------------------------------------
# 1. exact distances
# ---------------------------------------------------------------------------

def _check_distances() -> tuple[bool, str]:
    mismatches = 0
    sandwich_bad = 0
    for vals in itertools.permutations(range(1, 8)):
        p = Permutation.from_one_line(vals)
        k = kendall_tau(p)
        if k != kendall_tau_naive(p):
            mismatches += 1
        d = dev(p)
        if not k <= d <= 2 * k:
            sandwich_bad += 1
    rng = np.random.default_rng(101)
    for _ in range(10_000):
        p = random_permutation(256, rng)
        q = random_permutation(256, rng)
        k = kendall_tau(p, q)
        if k != kendall_tau_naive(p, q):
            mismatches += 1
        d = dev(p, q)
        if not k <= d <= 2 * k:
            sandwich_bad += 1
    ok = mismatches == 0 and sandwich_bad == 0
    return ok, f"{mismatches} oracle mismatches, {sandwich_bad} sandwich violations"


# ---------------------------------------------------------------------------
# 2. displacement bounds of a padding
# ---------------------------------------------------------------------------

def _check_padding_bounds() -> tuple[bool, str]:
    rng = np.random.default_rng(202)
    violations = 0
    for _ in range(10_000):
        n = int(rng.integers(2, 129))
        d = int(rng.integers(2, 5))
        pi = random_permutation(n, rng)
        N = (n + 1) * d - 1
        gaps = rng.choice(np.arange(1, N + 1), size=N - n, replace=False)
        l = make_padding(pi, d, gaps=gaps.tolist())
        if mdev(pi) > 2.0 / d * mdsp(l) or dev(pi) > dsp(l):
            violations += 1
    return violations == 0, f"{violations} violations over 10000 random paddings"


# ---------------------------------------------------------------------------
# 3/7/8. drift runs: monotone potential, admissible swaps, window fraction
# ---------------------------------------------------------------------------

_DRIFT_N = 64
_DRIFT_B = 2
_DRIFT_STEPS = 100_000
_drift_cache: list | None = None


def _drift_reports():
    global _drift_cache
    if _drift_cache is None:
        fn = partial(drift_run, _DRIFT_N, _DRIFT_B, _DRIFT_STEPS)
        _drift_cache = _pool_map(fn, list(DRIFT_RUN_SEEDS))
    return _drift_cache


def _check_phi_monotone() -> tuple[bool, str]:
    reports = _drift_reports()
    bad = sum(r.monotone_violations for r in reports)
    return bad == 0, (f"{bad} potential increases over {len(reports)} runs x "
                      f"{_DRIFT_STEPS} steps")


def _check_adm_swaps() -> tuple[bool, str]:
    reports = _drift_reports()
    swaps = sum(r.adm_swaps for r in reports)
    bad = sum(r.adm_violations for r in reports)
    return bad == 0 and swaps > 0, f"{bad} violations over {swaps} admissibility swaps"


def _check_sorting_fraction() -> tuple[bool, str]:
    reports = _drift_reports()
    need = 1.0 / (4.0 * (_DRIFT_B + 1))
    worst = min(r.min_window_fraction for r in reports)
    ok = worst >= need
    rng = np.random.default_rng(808)
    n, b = 32, 2
    steps = 20 * (b + 1) * n
    worst_explicit = 1.0
    for idx in range(20):
        sched = random_valid_schedule(n, b, steps, rng)
        validate_window(sched.values, n, b)
        state = ProcessState.from_seed(n, 9000 + idx)
        kinds: list[int] = []
        run(state, PerturbationSpec.adjacent(), sched, steps, kinds_out=kinds,
            use_kernel=False)
        worst_explicit = min(worst_explicit, min_sorting_fraction(kinds, (b + 1) * n))
    ok = ok and worst_explicit >= 1.0 / (4.0 * (b + 1))
    return ok, (f"worst fixed-window fraction {worst:.4f} (need {need:.4f}), "
                f"worst explicit {worst_explicit:.4f}")


# ---------------------------------------------------------------------------
# 4. exact expected drift
# ---------------------------------------------------------------------------

def _check_exact_drift() -> tuple[bool, str]:
    report = exact_drift_check(n=32, d=2, alpha=DEFAULT_ALPHA, trials=1000, seed=42)
    return report.violations == 0, (
        f"{report.violations} violations over {report.trials} states; "
        f"worst relative margin {report.worst_rel_margin:.3e}")


# ---------------------------------------------------------------------------
# 5. head dominance
# ---------------------------------------------------------------------------

def _check_head_dominance() -> tuple[bool, str]:
    rng = np.random.default_rng(505)
    violations = 0
    worst = 0.0
    for _ in range(10_000):
        n = int(rng.integers(4, 65))
        d = int(rng.integers(2, 5))
        alpha = DEFAULT_ALPHA / (d - 1)
        pi = random_permutation(n, rng)
        tau = adm(random_permutation(n, rng), pi)
        N = (n + 1) * d - 1
        gaps = rng.choice(np.arange(1, N + 1), size=N - n, replace=False)
        l = lopt(make_padding(pi, d, gaps=gaps.tolist()), tau)
        bound = 1.0 / (1.0 - math.exp(-alpha * (d - 1)))
        ratio = head_dominance_gap(l, tau, alpha)
        worst = max(worst, ratio / bound)
        if ratio > bound:
            violations += 1
    return violations == 0, (f"{violations} violations; worst ratio/bound "
                             f"{worst:.6f} (bound 20/19 at defaults)")


# ---------------------------------------------------------------------------
# 6. theta-filtering bounds
# ---------------------------------------------------------------------------

def _check_theta_filter() -> tuple[bool, str]:
    rng = np.random.default_rng(606)
    violations = 0
    for _ in range(10_000):
        n = int(rng.integers(2, 513))
        theta = int(rng.integers(0, n))
        tau = random_permutation(n, rng)
        hat = theta_filter(tau, theta)
        if mdev(hat, tau) > 2 * theta:
            violations += 1
        tail = sum(abs(tau.fwd[i] - i) for i in range(1, n + 1)
                   if abs(tau.fwd[i] - i) > theta)
        if dev(hat) > 4 * tail:
            violations += 1
    return violations == 0, f"{violations} violations over 10000 random (tau, theta)"


# ---------------------------------------------------------------------------
# 9. deviation-potential growth under pure mixing
# ---------------------------------------------------------------------------

def _check_psi_growth() -> tuple[bool, str]:
    report = psi_growth_check(n=256, k=32, seeds=PSI_SEEDS)
    ok = report.sample_mean <= 1.1 * report.bound
    return ok, (f"sample mean {report.sample_mean:.4g} vs 1.1 x bound "
                f"{1.1 * report.bound:.4g} (ratio {report.ratio:.2e})")


# ---------------------------------------------------------------------------
# 10. desk-scale deviation scaling
# ---------------------------------------------------------------------------

def _ratio_spread(values: list[float]) -> float:
    return max(values) / min(values)


def _check_scaling() -> tuple[bool, str]:
    n_list = (128, 256, 512)
    details = []
    ok = True
    for spec_name, spec in (("adjacent", PerturbationSpec.adjacent()),
                            ("geometric", PerturbationSpec.geometric(0.5))):
        rows = run_scaling_study(n_list, b=1, spec=spec, seeds=SCALING_SEEDS)
        dev_ratios = [r.median_dev_ratio for r in rows]
        mdev_ratios = [r.median_mdev_ratio for r in rows]
        spread_dev = _ratio_spread(dev_ratios)
        spread_mdev = _ratio_spread(mdev_ratios)
        ok = ok and spread_dev < 2.0 and spread_mdev < 2.0
        details.append(f"{spec_name}: dev/n spread {spread_dev:.2f}, "
                       f"mdev/log2(n) spread {spread_mdev:.2f}")
    return ok, "; ".join(details)


# ---------------------------------------------------------------------------
# 11. lower bounds
# ---------------------------------------------------------------------------

def _check_lower_bounds() -> tuple[bool, str]:
    rows = run_lower_bound_mdev((256, 512, 1024, 2048), b=1, seeds=LB_SEEDS)
    medians = [r.median_peak for r in rows]
    increasing = all(a < b for a, b in zip(medians, medians[1:]))
    conv = run_lower_bound_convergence(512, b=1, seeds=LB_SEEDS)
    slow_ok = conv.fraction_slow >= 0.9
    return increasing and slow_ok, (
        f"median peak mdev {medians} (strictly increasing: {increasing}); "
        f"slow-convergence fraction {conv.fraction_slow:.2f} (need >= 0.90)")


# ---------------------------------------------------------------------------
# 12. dual simulation
# ---------------------------------------------------------------------------

def _check_dual() -> tuple[bool, str]:
    table = PerturbationSpec.from_table([(-2, 1), (-1, 2), (1, 2), (2, 1)])
    configs = []
    for spec in (PerturbationSpec.adjacent(), PerturbationSpec.geometric(0.5)):
        for b in (1, 2, 4):
            for n in (8, 16, 32):
                configs.append((n, b, spec))
    configs.append((24, 1, table))
    configs.append((24, 4, table))
    assert len(configs) == 20
    failures = []
    for idx, (n, b, spec) in enumerate(configs):
        ok, step = simulate_dual(n, seed=7000 + idx, spec=spec,
                                 schedule=StepSchedule.fixed(b), total_steps=10_000)
        if not ok:
            failures.append((n, b, spec.kind, step))
    return not failures, (f"{len(failures)} of 20 configs diverged"
                          + (f": {failures}" if failures else ""))


CRITERIA: list[tuple[int, str, object]] = [
    (1, "exact distances and sandwich", _check_distances),
    (2, "padding displacement bounds", _check_padding_bounds),
    (3, "deterministic potential monotonicity", _check_phi_monotone),
    (4, "exact expected potential drift", _check_exact_drift),
    (5, "block head dominance", _check_head_dominance),
    (6, "theta-filtering bounds", _check_theta_filter),
    (7, "admissible-swap inequalities", _check_adm_swaps),
    (8, "sorting fraction on every window", _check_sorting_fraction),
    (9, "deviation-potential growth bound", _check_psi_growth),
    (10, "desk-scale deviation scaling", _check_scaling),
    (11, "lower-bound experiments", _check_lower_bounds),
    (12, "dual-simulation cross-check", _check_dual),
]


def run_criteria(ids=None, progress=None) -> list[CheckResult]:
    results = []
    for cid, name, fn in CRITERIA:
        if ids is not None and cid not in ids:
            continue
        t0 = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        result = CheckResult(cid, name, passed, detail, time.perf_counter() - t0)
        results.append(result)
        if progress is not None:
            progress(result.line())
    return results
