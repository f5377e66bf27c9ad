"""Simulation and verification laboratory for quantum unstructured
search under single-qubit depolarizing oracle noise.

Layers, bottom up: operator algebra primitives (opalgebra), channel
containers with Choi-based equality (channels), the noisy-oracle Kraus
families and their closed-form coefficients (oracle_kraus), record-
register progress accounting and transition-norm checks (progress),
Monte-Carlo trajectory strategies (search_sim), and the command-line
harness (lab_cli).
"""

__version__ = "0.1.0"

from .opalgebra import (
    CMatrix,
    PauliLabel,
    PAULI_LABELS,
    QubitIndex,
    embed_on_qubit,
    spectral_norm,
)
from .channels import (
    KrausChannel,
    ChoiMatrix,
    apply,
    compose,
    choi,
    channels_equal,
    depolarizing_noise,
    phase_oracle,
    DEFAULT_CHOI_TOL,
)
from .oracle_kraus import (
    OracleGeometry,
    KrausCoefficients,
    SignalingNoiseSpec,
    MixingTable,
    build_geometry,
    kraus_coefficients,
    build_G_family,
    build_K_family,
    mixing_table_blocks,
    verify_coefficient_bounds,
    verify_mixing_table,
    verify_geometry_commutation,
    negligent_kraus,
    signaling_noise,
    rate_grid,
)
from .progress import (
    ExtendedSpace,
    NoJumpState,
    AlgorithmStep,
    ProgressTrace,
    ClaimNormsReport,
    CorollaryReport,
    extended_oracle_isometry,
    progress_projectors,
    grover_diffusion_step,
    initial_no_jump_state,
    evolve_no_jump,
    progress_measure,
    run_progress_trace,
    success_probability,
    purified_sector_weights,
    claim_norms,
    corollary_bound_check,
    step_bound,
)
from .search_sim import (
    Trajectory,
    StrategySpec,
    TrajectoryOutcome,
    RunStatistics,
    STRATEGY_KINDS,
    noisy_oracle_trajectory_step,
    grover_run,
    one_sided_after,
    one_sided_before,
    coin_toss_expectation,
    flag_bit_reflection,
    flag_bit_search,
    run_strategy,
    run_trials,
    reflection_call_statistics,
    queries_until_success,
    wilson_interval,
    trial_rng,
)

__all__ = [
    "__version__",
    "CMatrix", "PauliLabel", "PAULI_LABELS", "QubitIndex",
    "embed_on_qubit", "spectral_norm",
    "KrausChannel", "ChoiMatrix", "apply", "compose", "choi",
    "channels_equal", "depolarizing_noise", "phase_oracle",
    "DEFAULT_CHOI_TOL",
    "OracleGeometry", "KrausCoefficients", "SignalingNoiseSpec",
    "MixingTable", "build_geometry", "kraus_coefficients",
    "build_G_family", "build_K_family", "mixing_table_blocks",
    "verify_coefficient_bounds", "verify_mixing_table",
    "verify_geometry_commutation", "negligent_kraus", "signaling_noise",
    "rate_grid",
    "ExtendedSpace", "NoJumpState", "AlgorithmStep", "ProgressTrace",
    "ClaimNormsReport", "CorollaryReport", "extended_oracle_isometry",
    "progress_projectors", "grover_diffusion_step",
    "initial_no_jump_state", "evolve_no_jump", "progress_measure",
    "run_progress_trace", "success_probability",
    "purified_sector_weights", "claim_norms", "corollary_bound_check",
    "step_bound",
    "Trajectory", "StrategySpec", "TrajectoryOutcome", "RunStatistics",
    "STRATEGY_KINDS", "noisy_oracle_trajectory_step", "grover_run",
    "one_sided_after", "one_sided_before", "coin_toss_expectation",
    "flag_bit_reflection", "flag_bit_search", "run_strategy",
    "run_trials", "reflection_call_statistics", "queries_until_success",
    "wilson_interval", "trial_rng",
]
