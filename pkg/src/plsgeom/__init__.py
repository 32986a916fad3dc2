"""Geometry of PLS shrinkage factors: corner averages, sign structure, inverse cones and DoF."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (  # noqa: F401
    DEFAULT_CONFIG,
    EigenSpectrum,
    IndexSubset,
    ObservationVector,
    PlsConfig,
    PlsFit,
    SquaredObservation,
    all_subsets,
    exp_correlation,
    krylov_matrix,
    pls_fit,
    spectrum_from_gram,
    vandermonde,
)
from .shrinkage import (  # noqa: F401
    AverageResult,
    CornerWeight,
    ExtremeBound,
    MarginalSegment,
    ShrinkageTriple,
    alpha_corner_det,
    corner_shrinkage,
    corner_weight,
    extreme_bound,
    marginal_segment,
    shrinkage_average,
    shrinkage_direct,
)
from .geometry import (  # noqa: F401
    Membership,
    RayFan,
    SignatureCheck,
    SignPattern,
    SimplexDescriptor,
    caratheodory_reduce,
    corner_sign_pattern,
    enumerate_signatures,
    expand_template,
    hull_inverse,
    increasing_vandermonde,
    inverse_rays,
    ray_membership,
    sign_changes,
    signature_lemma_check,
    simplex_descriptor,
    simplex_template,
    simplex_vertex_patterns,
    total_positivity_check,
)
from .dof import (  # noqa: F401
    DofReport,
    McConfig,
    McResult,
    corner_dof,
    fd_jacobian,
    gdof_estimators,
    mc_gdof,
    mc_noise,
    prediction_jacobian,
)


def reference_spectrum() -> EigenSpectrum:
    """Eigenvalues of the 5 x 5 correlation matrix ``exp(-|i-j|/3)``, the running example."""
    return spectrum_from_gram(exp_correlation(5, 1.0 / 3.0))
