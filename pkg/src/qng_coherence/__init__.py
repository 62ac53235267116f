"""Hierarchical certification of quantum non-Gaussian coherence.

Tools for computing certification thresholds of Fock-basis coherences
over Gaussian-evolved core states, evaluating measured states against
them, and quantifying robustness to loss and thermal noise.
"""

from .fock import (
    DensityMatrix,
    FockSpace,
    GaussianParams,
    StateVector,
    TruncationError,
    annihilation_matrix,
    apply_gaussian,
    displacement_unitary,
    squeezing_unitary,
    suggested_work_dim,
    unitarity_defect,
)
from .measures import (
    CoherenceMeasureId,
    ErrorProb,
    FockProb,
    GridError,
    PhaseScan,
    coherence_element,
    coherence_from_scan,
    phase_scan,
    probability,
)
from .cores import (
    CoreSubspace,
    FockFamily,
    GaussianVacuum,
    LHierarchy,
    MissingOne,
    NHierarchy,
    SpecError,
    Stellar,
    core_subspaces,
    family_saturates,
    verify_core_property,
)
from .optimize import (
    ObjectiveSpec,
    SearchConfig,
    ThresholdResult,
    ValidationError,
    WarmStart,
    compressed_operator,
    inner_max,
    maximize_over_subspace,
    outer_maximize,
)
from .thresholds import (
    ConvergenceRow,
    CriterionCurve,
    CriterionSurface,
    EnvelopeError,
    ThresholdRow,
    absolute_threshold,
    clear_threshold_cache,
    convergence_study,
    default_lambda_grid,
    physical_boundary,
    relative_curve_2d,
    relative_surface_3d,
    threshold_table,
)
from .decoherence import (
    DepthPoint,
    DepthResult,
    ModelValidityError,
    NoDepthError,
    NoisyStateModel,
    depth_boundary,
    exact_channel,
    ideal_target,
    loss_depth,
    perturbed_state,
    thermal_depth,
)

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "FockSpace",
    "GaussianParams",
    "StateVector",
    "TruncationError",
    "annihilation_matrix",
    "apply_gaussian",
    "displacement_unitary",
    "squeezing_unitary",
    "suggested_work_dim",
    "unitarity_defect",
    "CoherenceMeasureId",
    "ErrorProb",
    "FockProb",
    "GridError",
    "PhaseScan",
    "coherence_element",
    "coherence_from_scan",
    "phase_scan",
    "probability",
    "CoreSubspace",
    "FockFamily",
    "GaussianVacuum",
    "LHierarchy",
    "MissingOne",
    "NHierarchy",
    "SpecError",
    "Stellar",
    "core_subspaces",
    "family_saturates",
    "verify_core_property",
    "ObjectiveSpec",
    "SearchConfig",
    "ThresholdResult",
    "ValidationError",
    "WarmStart",
    "compressed_operator",
    "inner_max",
    "maximize_over_subspace",
    "outer_maximize",
    "ConvergenceRow",
    "CriterionCurve",
    "CriterionSurface",
    "EnvelopeError",
    "ThresholdRow",
    "clear_threshold_cache",
    "absolute_threshold",
    "convergence_study",
    "default_lambda_grid",
    "physical_boundary",
    "relative_curve_2d",
    "relative_surface_3d",
    "threshold_table",
    "DepthPoint",
    "DepthResult",
    "ModelValidityError",
    "NoDepthError",
    "NoisyStateModel",
    "depth_boundary",
    "exact_channel",
    "ideal_target",
    "loss_depth",
    "perturbed_state",
    "thermal_depth",
    "__version__",
]
