"""Exact simulation, error budgets, and verification for noisy photonic samplers."""

from .budget import BudgetReport, ScalingRow, evaluate_budget, invert_budget, scaling_table
from .distinguishability import (
    Indistinguishability,
    JitterSourceSpec,
    arrangement_count,
    cycle_counts,
    cycle_types,
    mismatch_bound,
    mismatch_bound_small,
    permutation_overlap,
    prob_mismatch,
)
from .errors import (
    BosonBudgetError,
    DimensionError,
    InfeasibleBudgetError,
    NumericError,
    PhotonCountError,
    ResourceLimitError,
)
from .fock import (
    BirthdayBound,
    birthday_bunching_bound,
    count_outputs,
    enumerate_outputs,
    mode_indices,
    mu,
)
from .ideal_sampler import (
    DistributionTable,
    full_distribution,
    prob_ideal,
    sample_ideal,
    variational_distance,
)
from .noise_model import (
    DetectorModel,
    DeviceConfig,
    DistanceParts,
    NoiseBound,
    SourceModel,
    click_pattern_prob,
    collision_free_patterns,
    detector_prob,
    distance_parts,
    input_prob,
    noise_bound,
    noise_bound_additive,
    output_click_distribution,
)
from .permanent import (
    permanent_contingency,
    permanent_naive,
    permanent_repeated,
    permanent_ryser,
)
from .random_ensembles import (
    NetworkUnitary,
    fourier_matrix,
    gaussian_submatrix,
    haar_unitary,
    spawn_rngs,
)
from .verify import (
    SuppressionResult,
    WitnessResult,
    row_norm_witness,
    suppression_test,
    unitarity_roundtrip,
)

__version__ = "0.1.0"

__all__ = [
    "BirthdayBound",
    "BosonBudgetError",
    "BudgetReport",
    "DetectorModel",
    "DeviceConfig",
    "DimensionError",
    "DistanceParts",
    "DistributionTable",
    "Indistinguishability",
    "InfeasibleBudgetError",
    "JitterSourceSpec",
    "NetworkUnitary",
    "NoiseBound",
    "NumericError",
    "PhotonCountError",
    "ResourceLimitError",
    "ScalingRow",
    "SourceModel",
    "SuppressionResult",
    "WitnessResult",
    "arrangement_count",
    "birthday_bunching_bound",
    "click_pattern_prob",
    "collision_free_patterns",
    "count_outputs",
    "cycle_counts",
    "cycle_types",
    "detector_prob",
    "distance_parts",
    "enumerate_outputs",
    "evaluate_budget",
    "fourier_matrix",
    "full_distribution",
    "gaussian_submatrix",
    "haar_unitary",
    "input_prob",
    "invert_budget",
    "mismatch_bound",
    "mismatch_bound_small",
    "mode_indices",
    "mu",
    "noise_bound",
    "noise_bound_additive",
    "output_click_distribution",
    "permanent_contingency",
    "permanent_naive",
    "permanent_repeated",
    "permanent_ryser",
    "permutation_overlap",
    "prob_ideal",
    "prob_mismatch",
    "row_norm_witness",
    "sample_ideal",
    "scaling_table",
    "spawn_rngs",
    "suppression_test",
    "unitarity_roundtrip",
    "variational_distance",
]
