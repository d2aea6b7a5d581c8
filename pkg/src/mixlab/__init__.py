"""mixlab: simulate, couple, and exactly analyze one-dimensional
particle-system Markov chains (interchange, exclusion, corner flips,
and the simplex walk), with matched event streams so the five models
can be run on the same randomness.
"""

from ._accel import USING_NUMBA
from .coupling import (
    CoupledEnsemble,
    CouplingReport,
    cftp_sample,
    coupled_step_graphical,
    coupled_step_refined,
    coupling_time,
    coupling_time_batch,
    default_t_max,
    extremal_pair,
    reports_to_csv,
)
from .dynamics import (
    ObserverHook,
    UpdateEvent,
    evaluate_statistic,
    local_update,
    replay_dump,
    sample_stationary_direct,
    simulate,
)
from .errors import (
    BiasedModel,
    CoalescenceTimeout,
    ConfigError,
    Incomparable,
    InconsistentLevels,
    MixlabError,
    ModelUnsupported,
    NotNormalized,
    NotOrdered,
    OutOfRange,
    ResourceError,
    ShapeMismatch,
    SolveFailure,
    TooLarge,
    WrongModel,
)
from .exact import (
    DistanceCurve,
    GeneratorMatrix,
    StateIndex,
    build_generator,
    detailed_balance_residual,
    distance_curve_exact,
    enumerate_states,
    heights_expectation,
    mixing_time_exact,
    stationary_exact,
    transient_distribution,
    tv_distance,
)
from .harness import (
    CutoffRecord,
    CutoffScanResult,
    ExperimentConfig,
    cutoff_scan,
    density_profile,
    estimate_distance_lower,
    estimate_distance_upper,
    execute_experiment,
    first_half_crossing,
    get_workers,
    parse_config_file,
    parse_grid,
    run_experiment,
    theory_cutoff_value,
)
from .spectral import (
    DirichletSpectrum,
    HeightField,
    TailBound,
    cole_hopf,
    contraction_envelope,
    coupling_tail_bound,
    dirichlet_spectrum,
    gamma_1,
    generator_identity_residual,
    heat_solve,
    mixing_upper_bound,
)
from .states import (
    ChainSpec,
    ExclusionConfig,
    LatticePath,
    Model,
    Permutation,
    SimplexPoint,
    extremal_paths,
    height_inverse,
    height_map,
    inversion_count,
    order_or_raise,
    partial_le,
    particle_area,
    path_area,
    project_to_exclusion,
    reconstruct_permutation,
)

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "__version__",
    # states
    "Model",
    "ChainSpec",
    "Permutation",
    "ExclusionConfig",
    "LatticePath",
    "SimplexPoint",
    "inversion_count",
    "particle_area",
    "path_area",
    "height_map",
    "height_inverse",
    "project_to_exclusion",
    "reconstruct_permutation",
    "extremal_paths",
    "partial_le",
    "order_or_raise",
    # dynamics
    "UpdateEvent",
    "ObserverHook",
    "local_update",
    "evaluate_statistic",
    "simulate",
    "replay_dump",
    "sample_stationary_direct",
    # spectral
    "gamma_1",
    "DirichletSpectrum",
    "dirichlet_spectrum",
    "HeightField",
    "heat_solve",
    "cole_hopf",
    "generator_identity_residual",
    "contraction_envelope",
    "TailBound",
    "coupling_tail_bound",
    "mixing_upper_bound",
    # exact
    "StateIndex",
    "enumerate_states",
    "GeneratorMatrix",
    "build_generator",
    "stationary_exact",
    "detailed_balance_residual",
    "tv_distance",
    "transient_distribution",
    "DistanceCurve",
    "distance_curve_exact",
    "heights_expectation",
    "mixing_time_exact",
    # coupling
    "CoupledEnsemble",
    "CouplingReport",
    "coupled_step_graphical",
    "coupled_step_refined",
    "default_t_max",
    "coupling_time",
    "coupling_time_batch",
    "extremal_pair",
    "reports_to_csv",
    "cftp_sample",
    # harness
    "ExperimentConfig",
    "estimate_distance_upper",
    "estimate_distance_lower",
    "density_profile",
    "theory_cutoff_value",
    "first_half_crossing",
    "CutoffRecord",
    "CutoffScanResult",
    "cutoff_scan",
    "parse_config_file",
    "parse_grid",
    "execute_experiment",
    "run_experiment",
    "get_workers",
    # errors
    "MixlabError",
    "OutOfRange",
    "ShapeMismatch",
    "InconsistentLevels",
    "BiasedModel",
    "WrongModel",
    "ModelUnsupported",
    "NotOrdered",
    "Incomparable",
    "CoalescenceTimeout",
    "TooLarge",
    "SolveFailure",
    "NotNormalized",
    "ConfigError",
    "ResourceError",
]
