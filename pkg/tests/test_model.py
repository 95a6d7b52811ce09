from fractions import Fraction

import numpy as np
import pytest

from evolsort.model import (
    BaselineCursor,
    ConfigurationError,
    PerturbationSpec,
    ProcessState,
    StepSchedule,
    apply_mixing_at,
    apply_sorting_at,
    baseline_step,
    random_valid_schedule,
    run,
    simulate_dual,
    split_streams,
    validate_window,
)
from evolsort.perm import Permutation, dev, kendall_tau_naive, mdev


# ---------------------------------------------------------------------------
# perturbation specs
# ---------------------------------------------------------------------------

def test_adjacent_frequencies():
    rng = np.random.default_rng(10)
    s = PerturbationSpec.adjacent().sample_batch(rng, 1_000_000)
    frac_plus = np.count_nonzero(s == 1) / s.size
    frac_minus = np.count_nonzero(s == -1) / s.size
    assert abs(frac_plus - 0.5) < 0.01
    assert abs(frac_minus - 0.5) < 0.01
    assert frac_plus + frac_minus == 1.0


def test_geometric_mean_and_support():
    rng = np.random.default_rng(11)
    spec = PerturbationSpec.geometric(0.5)
    s = spec.sample_batch(rng, 1_000_000)
    assert abs(s.mean()) < 0.01
    assert np.all(s != 0)
    # MGF certificate: E[exp(3 lam |D|)] <= c'
    mags = np.abs(s)
    assert np.exp(3 * spec.lam * mags).mean() <= spec.c_prime * 1.01


def test_geometric_rejects_bad_probability():
    with pytest.raises(ConfigurationError):
        PerturbationSpec.geometric(1.5)
    with pytest.raises(ConfigurationError):
        PerturbationSpec.geometric(0.0)


def test_table_exact_mean_validation():
    # (-2 w1) + (1 w2): mean (-2*1 + 1*2)/3 = 0 -> accepted
    spec = PerturbationSpec.from_table([(-2, 1), (1, 2)])
    assert spec.kind == "table"
    with pytest.raises(ConfigurationError):
        PerturbationSpec.from_table([(-2, 1), (1, 1)])
    with pytest.raises(ConfigurationError):
        PerturbationSpec.from_table([(1, Fraction(-1, 2)), (-1, Fraction(-1, 2))])


def test_table_zero_shift_warns():
    with pytest.warns(UserWarning):
        PerturbationSpec.from_table([(0, 1), (1, 1), (-1, 1)])


def test_table_file_roundtrip(tmp_path):
    path = tmp_path / "table.txt"
    path.write_text("# hot spot-ish\n-2 1\n1 2\n")
    spec = PerturbationSpec.from_table_file(str(path))
    assert spec.support == ((-2, Fraction(1)), (1, Fraction(2)))
    rng = np.random.default_rng(12)
    s = spec.sample_batch(rng, 300_000)
    assert abs(s.mean()) < 0.01
    assert set(np.unique(s)) == {-2, 1}


# ---------------------------------------------------------------------------
# elementary steps
# ---------------------------------------------------------------------------

def _state(values):
    return ProcessState.from_seed(len(values), 0, Permutation.from_one_line(values))


def test_sorting_step_examples():
    st = _state([2, 1, 3])
    report = apply_sorting_at(st, 1)
    assert report.swapped and st.pi.one_line() == (1, 2, 3)
    st = _state([2, 1, 3])
    report = apply_sorting_at(st, 2)
    assert not report.swapped and st.pi.one_line() == (2, 1, 3)
    st = _state([1, 2, 3])
    for i in (1, 2):
        assert not apply_sorting_at(st, i).swapped
    assert st.t == 2 and st.sort_steps == 2


def test_mixing_step_examples():
    st = _state([1, 2, 3, 4])
    report = apply_mixing_at(st, 2, 2)
    assert st.pi.one_line() == (1, 3, 4, 2) and report.effective == 2
    st = _state([1, 2, 3, 4])
    report = apply_mixing_at(st, 3, -2)
    assert st.pi.one_line() == (3, 1, 2, 4) and report.effective == 2
    st = _state([4, 2, 3, 1])
    before = st.pi.one_line()
    report = apply_mixing_at(st, 4, 5)
    assert st.pi.one_line() == before and report.effective == 0
    assert st.mix_steps == 1 and st.t == 1


def test_mixing_deviation_change_bounds():
    rng = np.random.default_rng(13)
    for _ in range(300):
        n = int(rng.integers(2, 16))
        st = ProcessState.from_seed(n, 0, Permutation.from_one_line(rng.permutation(n) + 1))
        dev0 = dev(st.pi)
        k0 = kendall_tau_naive(st.pi)
        i = int(rng.integers(1, n + 1))
        s = int(rng.integers(-5, 6))
        apply_mixing_at(st, i, s)
        st.pi.validate()
        assert abs(dev(st.pi) - dev0) <= 2 * abs(s) * max(1, abs(s))
        assert abs(kendall_tau_naive(st.pi) - k0) <= abs(s) * n


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------

def test_fixed_schedule_step_pattern():
    st = ProcessState.from_seed(4, 5)
    kinds = []
    run(st, PerturbationSpec.adjacent(), StepSchedule.fixed(1), 4, kinds_out=kinds)
    assert kinds == [0, 1, 0, 1]  # sort, mix, sort, mix


def test_alternating_explicit_schedule_window():
    values = [0, 2] * 50
    validate_window(values, 4, 1)  # each length-4 window sums to 4 = b*n
    with pytest.raises(ConfigurationError):
        validate_window([4, 4, 4, 4], 4, 0.5)


def test_explicit_schedule_exhausted():
    st = ProcessState.from_seed(4, 5)
    sched = StepSchedule.explicit([1, 1], b=1)
    with pytest.raises(ConfigurationError, match="exhausted"):
        run(st, PerturbationSpec.adjacent(), sched, 50)


def test_random_valid_schedules_satisfy_window():
    rng = np.random.default_rng(14)
    for _ in range(20):
        n = int(rng.integers(4, 40))
        b = int(rng.integers(1, 5))
        sched = random_valid_schedule(n, b, 400, rng, burst=4 * b)
        validate_window(sched.values, n, b)


def test_iid_schedule_respects_window():
    rng = np.random.default_rng(15)
    sched = StepSchedule.iid(2.0, ("uniform", 0, 8))
    it = sched.iterator(16, rng)
    values = [next(it) for _ in range(500)]
    validate_window(values, 16, 2.0)


def test_schedule_stream_is_independent():
    # same master seed: the sorting/mixing draws do not depend on which
    # schedule kind consumes the schedule stream
    for sched in (StepSchedule.fixed(2), StepSchedule.explicit([2] * 200, b=2)):
        st = ProcessState.from_seed(16, 77)
        run(st, PerturbationSpec.adjacent(), sched, 300)
        if sched.kind == "fixed":
            reference = st.pi.one_line()
        else:
            assert st.pi.one_line() == reference


# ---------------------------------------------------------------------------
# run driver
# ---------------------------------------------------------------------------

def test_run_determinism_bit_for_bit():
    kwargs = dict(spec=PerturbationSpec.geometric(0.5),
                  schedule=StepSchedule.fixed(2), total_steps=5000,
                  record_every=500)
    a = run(ProcessState.from_seed(32, 99), kwargs["spec"], kwargs["schedule"],
            kwargs["total_steps"], record_every=kwargs["record_every"])
    b = run(ProcessState.from_seed(32, 99), kwargs["spec"], kwargs["schedule"],
            kwargs["total_steps"], record_every=kwargs["record_every"])
    assert a == b


def test_kernel_and_python_paths_agree():
    for spec in (PerturbationSpec.adjacent(), PerturbationSpec.geometric(0.5)):
        for b in (1, 3):
            s1 = ProcessState.from_seed(48, 123, "reverse")
            s2 = ProcessState.from_seed(48, 123, "reverse")
            r1 = run(s1, spec, StepSchedule.fixed(b), 20_000, use_kernel=True)
            r2 = run(s2, spec, StepSchedule.fixed(b), 20_000, use_kernel=False)
            assert s1.pi == s2.pi
            assert (s1.sort_steps, s1.mix_steps) == (s2.sort_steps, s2.mix_steps)
            assert r1 == r2


def test_run_counts_and_records():
    st = ProcessState.from_seed(8, 3)
    records = run(st, PerturbationSpec.adjacent(), StepSchedule.fixed(1), 100,
                  record_every=30)
    assert [r.step for r in records] == [30, 60, 90, 100]
    assert st.t == 100 == st.sort_steps + st.mix_steps
    assert all(r.phi is None and r.psi is None for r in records)


def test_sorted_start_without_mixing_is_absorbing():
    st = ProcessState.from_seed(16, 8)
    sched = StepSchedule.explicit([0] * 200, b=1)
    records = run(st, PerturbationSpec.adjacent(), sched, 150)
    assert records[-1].dev == 0 and records[-1].mdev == 0


def test_run_n_equal_one():
    st = ProcessState.from_seed(1, 4)
    records = run(st, PerturbationSpec.adjacent(), StepSchedule.fixed(1), 50)
    assert records[-1].dev == 0 and records[-1].mdev == 0
    st2 = ProcessState.from_seed(1, 4)
    records2 = run(st2, PerturbationSpec.adjacent(), StepSchedule.fixed(1), 50,
                   use_kernel=False)
    assert records == records2


def test_zero_steps():
    st = ProcessState.from_seed(6, 4, "reverse")
    records = run(st, PerturbationSpec.adjacent(), StepSchedule.fixed(1), 0)
    assert len(records) == 1 and records[0].step == 0


def test_record_positions_on_resumed_state():
    # protocols resume runs on the same state; record positions must be
    # relative to each call, not to the absolute step counter
    st = ProcessState.from_seed(8, 17)
    spec = PerturbationSpec.adjacent()
    run(st, spec, StepSchedule.fixed(1), 100)
    for use_kernel in (True, False):
        base = st.t
        records = run(st, spec, StepSchedule.fixed(1), 90, record_every=40,
                      use_kernel=use_kernel)
        assert [r.step - base for r in records] == [40, 80, 90]
        assert records[-1].step == st.t


def test_split_streams_are_distinct():
    a, b, c = split_streams(1)
    assert a.integers(0, 1 << 30) != b.integers(0, 1 << 30) != c.integers(0, 1 << 30)


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------

def test_bubble_first_two_steps():
    st = _state([3, 1, 2])
    cursor = BaselineCursor("bubble", 3)
    baseline_step(st, cursor)
    assert st.pi.one_line() == (1, 3, 2)
    baseline_step(st, cursor)
    assert st.pi.one_line() == (1, 2, 3)


def test_cocktail_full_pass_on_sorted():
    st = _state([1, 2, 3, 4])
    cursor = BaselineCursor("cocktail", 4)
    seen = []
    for _ in range(8):
        report = baseline_step(st, cursor)
        seen.append(report.i)
        assert not report.swapped
    assert st.pi.one_line() == (1, 2, 3, 4)
    assert set(seen) == {1, 2, 3}  # cursor wraps over the whole range


def test_insertion_first_comparison():
    st = _state([2, 1, 3])
    cursor = BaselineCursor("insertion", 3)
    baseline_step(st, cursor)
    assert st.pi.one_line() == (1, 2, 3)


@pytest.mark.parametrize("algorithm", ["insertion", "bubble", "cocktail"])
def test_baselines_sort_without_mixing(algorithm):
    st = ProcessState.from_seed(12, 21, "reverse")
    sched = StepSchedule.explicit([0] * 500, b=1)
    records = run(st, PerturbationSpec.adjacent(), sched, 400, algorithm=algorithm)
    assert records[-1].dev == 0


@pytest.mark.parametrize("algorithm", ["insertion", "bubble", "cocktail"])
def test_baselines_track_under_mixing(algorithm):
    st = ProcessState.from_seed(64, 22, "reverse")
    records = run(st, PerturbationSpec.adjacent(), StepSchedule.fixed(1), 64 * 64 * 8,
                  algorithm=algorithm)
    # quadratic baselines are expected to keep the deviation low; there is
    # no committed constant, so only sanity-bound the result
    assert records[-1].dev < 64 * 8


# ---------------------------------------------------------------------------
# dual simulation
# ---------------------------------------------------------------------------

def test_dual_simulation_examples():
    ok, step = simulate_dual(8, 1, PerturbationSpec.adjacent(),
                             StepSchedule.fixed(1), 10_000)
    assert ok and step == -1
    ok, _ = simulate_dual(1, 1, PerturbationSpec.adjacent(), StepSchedule.fixed(1), 100)
    assert ok
    ok, _ = simulate_dual(9, 1, PerturbationSpec.geometric(0.5),
                          StepSchedule.fixed(2), 0)
    assert ok
