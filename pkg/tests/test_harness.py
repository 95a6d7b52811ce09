import math

import numpy as np
import pytest

from evolsort.aux import AuxTracker, DEFAULT_ALPHA
from evolsort.harness import (
    ProtocolConfig,
    drift_run,
    exact_drift_check,
    balanced_alpha,
    min_sorting_fraction,
    psi_growth_check,
    psi_one_step_check,
    run_lower_bound_convergence,
    run_lower_bound_mdev,
    run_mdev_protocol,
    run_scaling_study,
    run_tdev_protocol,
    sample_tracker,
)
from evolsort.model import (
    PerturbationSpec,
    ProcessState,
    StepSchedule,
    apply_sorting_at,
    run,
)
from evolsort.perm import Permutation, mdev


def test_exact_drift_two_element_case():
    # pi = (2,1), identity targets, d = 2: the locally optimal canonical
    # padding is (gap, gap, 2, 1, gap) with displacements 1 and 2, and the
    # single sorting choice lands both elements on target.
    st = ProcessState.from_seed(2, 0, Permutation.from_one_line([2, 1]))
    tracker = AuxTracker(st)
    assert tracker.l[1:] == [0, 0, 2, 1, 0]
    phi0 = tracker.phi()
    assert phi0 == pytest.approx((20 - 1) + (400 - 1))
    report = apply_sorting_at(st, 1)
    tracker.on_sort(st, report)
    assert tracker.phi() == 0.0
    bound = phi0 * (1 - DEFAULT_ALPHA / 4)
    assert 0.0 <= bound


def test_exact_drift_check_small():
    report = exact_drift_check(n=16, trials=60, seed=3)
    assert report.violations == 0
    assert report.worst_rel_margin < 0


def test_exact_drift_sorted_state_is_tight():
    # fully sorted with identity targets: every choice keeps the potential at
    # zero, and the bound is zero as well
    st = ProcessState.from_seed(8, 0, Permutation.identity(8))
    tracker = AuxTracker(st)
    assert tracker.phi() == 0.0
    total = 0.0
    for i in range(1, 8):
        report = apply_sorting_at(st, i)
        tracker.on_sort(st, report)
        total += tracker.phi()
    assert total == 0.0  # expectation 0 <= bound 0


def test_sample_tracker_is_consistent():
    rng = np.random.default_rng(40)
    state, tracker = sample_tracker(16, rng)
    tracker.debug_validate()
    assert state.t == tracker.t


def test_min_sorting_fraction():
    kinds = [0, 1, 1, 1, 1, 1] * 4
    assert min_sorting_fraction(kinds, 6) == pytest.approx(1 / 6)
    assert min_sorting_fraction([0, 0, 0, 0], 2) == 1.0


def test_drift_run_reports_clean():
    report = drift_run(32, 2, 4000, 4001)
    assert report.monotone_violations == 0
    assert report.adm_violations == 0
    assert report.adm_swaps > 0
    assert report.min_window_fraction >= 1 / 12


def test_protocol_config_exact_fraction():
    config = ProtocolConfig()
    assert config.p(1) == 1 / 8
    assert config.p(2) == 1 / 12
    assert config.resolved_alpha() == pytest.approx(DEFAULT_ALPHA)
    assert config.resolved_alpha_tilde() == pytest.approx(DEFAULT_ALPHA / 42)


def test_mdev_protocol_single_group_equals_plain_run():
    spec = PerturbationSpec.adjacent()
    config = ProtocolConfig(k0_multiplier=2.0)
    report = run_mdev_protocol(24, 1, spec, seed=5, config=config, groups=1)
    k = config.group_k(24)
    st = ProcessState.from_seed(24, 5, "reverse")
    records = run(st, spec, StepSchedule.fixed(1), 24 * k)
    assert report.final_mdev == records[-1].mdev
    assert report.monotone_violations == 0


def test_mdev_protocol_groups_monotone():
    report = run_mdev_protocol(32, 2, PerturbationSpec.adjacent(), seed=6, groups=5)
    assert report.monotone_violations == 0
    for group in report.groups:
        assert group.phi_end <= group.phi_start
    assert report.k >= 1 and report.cap > 0


def test_tdev_protocol_smoke():
    config = ProtocolConfig(warmup_multiplier=2.0, k_floor=4)
    report = run_tdev_protocol(32, 1, PerturbationSpec.adjacent(), seed=7,
                               config=config)
    assert report.monotone_violations == 0
    ks = [p.k for p in report.phases]
    assert ks[0] >= ks[-1] and ks[-1] >= config.k_floor
    assert all(p.filter_bound_ok for p in report.phases)
    assert report.final_dev >= 0


def test_scaling_study_tiny():
    rows = run_scaling_study([1, 8], b=1, spec=PerturbationSpec.adjacent(),
                             seeds=[1, 2], horizon_multiplier=0.05)
    assert rows[0].final_dev == [0, 0] and rows[0].final_mdev == [0, 0]
    assert rows[1].horizon == math.ceil(128 * 2 * 64 * 0.05)


def test_lb_mdev_degenerate_without_mixing():
    # a sorted start with no mixing keeps zero deviation forever
    st = ProcessState.from_seed(16, 9)
    records = run(st, PerturbationSpec.adjacent(),
                  StepSchedule.explicit([0] * 400, b=1), 300)
    assert records[-1].mdev == 0


def test_lb_mdev_rows():
    rows = run_lower_bound_mdev([64, 128], b=1, seeds=range(2001, 2006),
                                horizon_multiplier=50.0)
    assert all(r.peak_mdev[i] >= r.endpoint_mdev[i] >= 0
               for r in rows for i in range(len(r.peak_mdev)))
    assert all(r.median_peak > 0 for r in rows)


def test_convergence_initial_zero():
    report = run_lower_bound_convergence(16, b=1, initial_mdev=0,
                                         seeds=[2001, 2002])
    assert report.first_below == [0, 0]
    assert report.threshold_steps == 0


def test_convergence_rejects_oversized_initial_mdev():
    with pytest.raises(Exception):
        run_lower_bound_convergence(16, initial_mdev=16, seeds=[1])


def test_mdev_decrease_is_tracked_per_step():
    # sanity assertion from the convergence argument: the maximum deviation
    # can fall below mdev(pi_0) - (number of steps on which it decreased)
    # only if the bookkeeping is wrong
    st = ProcessState.from_seed(32, 11, Permutation.block_shift(32, 20))
    spec = PerturbationSpec.adjacent()
    start_mdev = mdev(st.pi)
    current = start_mdev
    decreases = 0

    class Watch:
        def on_sort(self, state, report):
            nonlocal current, decreases
            m = mdev(state.pi)
            if m < current:
                decreases += 1
            current = m

        on_mix = on_sort

    run(st, spec, StepSchedule.fixed(1), 4000, observers=(Watch(),),
        use_kernel=False)
    assert mdev(st.pi) >= start_mdev - decreases


def test_psi_growth_small():
    report = psi_growth_check(n=64, k=8, seeds=range(3001, 3006))
    assert report.sample_mean <= 1.1 * report.bound
    assert 1.0 / 64 <= report.alpha <= PerturbationSpec.adjacent().lam


def test_psi_one_step_bound():
    report = psi_one_step_check(n=64, warm_steps=512, trials=1500, seed=11)
    assert report.sample_mean <= 1.05 * report.bound


def test_balanced_alpha_balances():
    spec = PerturbationSpec.adjacent()
    alpha = balanced_alpha(spec, 256, 32)
    lhs = 9 * math.log(256) / alpha
    rhs = 32 * 3 * spec.c_prime / spec.lam ** 2 * alpha
    assert lhs == pytest.approx(rhs)
