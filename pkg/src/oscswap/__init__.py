"""Linear-optics estimation of the cyclic swap operator and its functionals."""

from .analysis import (
    Spectrum,
    fit_spectrum,
    functional_trace,
    majorization_test,
    spectrum_from_power_traces,
    spectrum_via_pipeline,
)
from .estimator import (
    EstimateResult,
    JointDistribution,
    estimate_pipeline,
    evolve,
    joint_distribution,
    parity_estimate_n2,
    sample_outcomes,
    weighted_estimate,
)
from .fock import (
    CutoffConfig,
    MultiModeState,
    SectorBasis,
    coherent_state,
    enumerate_basis,
    fock_state,
    inner,
    partial_trace,
    single_mode_density,
    superpose,
    tensor,
    to_density,
)
from .interferometer import (
    PhaseVector,
    ReckPlan,
    dft_matrix,
    lift_phase_diag,
    lift_to_fock,
    phase_vector,
    reck_decompose,
    reck_reconstruct,
    verify_diagonalization,
)
from .swap import (
    SwapOperator,
    build_swap,
    expect_swap_direct,
    fidelity_pure,
    hs_distance,
    overlap,
    power_trace,
    purity,
    witness_verdict,
)

__version__ = "0.1.0"
