"""Simulator and verification library for comparison sorting on evolving data."""

from .perm import (
    Permutation,
    swap,
    mdev,
    dev,
    kendall_tau,
    kendall_tau_naive,
    random_permutation,
)
from .model import (
    ConfigurationError,
    PerturbationSpec,
    StepSchedule,
    ProcessState,
    SwapReport,
    MixReport,
    TrajectoryRecord,
    sample_perturbation,
    apply_sorting_step,
    apply_mixing_step,
    baseline_step,
    BaselineCursor,
    run,
    simulate_dual,
)
from .aux import (
    PaddedList,
    PotentialConfig,
    Block,
    AuxTracker,
    TrackerSyncError,
    make_padding,
    lopt,
    adm,
    aux_step,
    phi,
    psi,
    theta_filter,
    tail_displacement,
    decompose_blocks,
    head_dominance_gap,
    reset_full,
    reset_partial,
    mdsp,
    dsp,
)

__version__ = "0.1.0"
