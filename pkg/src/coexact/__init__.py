"""Certified eigenvalue windows for coexact 1-forms on closed hyperbolic
3-manifolds, from volume and complex-length-spectrum input."""

from .classify import (
    INCONCLUSIVE,
    LAMBDA1_WINDOW,
    MINIMAL_L_SPACE,
    RIDGE_CAVEAT,
    SPECTRUM_CAVEAT,
    Verdict,
    classify,
)
from .exclusion import (
    ExclusionCurve,
    NaiveExclusionReport,
    ThresholdIntervals,
    j_value,
    naive_exclusion,
    scan,
    threshold_intervals,
)
from .planted import (
    PlantedSpectrum,
    fit_manifold_to_spectrum,
    planted_gram,
    weyl_tail,
)
from .spectrum import (
    GeodesicClass,
    ManifoldData,
    ManifoldFormatError,
    expand_powers,
    geodesic_weight,
    load_manifold,
    normalize_holonomy,
    parse_manifold,
    serialize_manifold,
)
from .testfuncs import (
    BumpSquare,
    CombinedSquare,
    GaussianProbe,
    PairConvolution,
    SincSplineFamily,
    SupportError,
    admissibility_norm,
    admissibility_report,
    bspline4_eval,
    bump_square,
    combined_test_function,
    constraint_vector,
    family_member_eval,
    gaussian_probe,
    pair_convolution_eval,
)
from .trace import (
    GramSystem,
    SingularGramError,
    TraceEvaluation,
    compensated_sum,
    geometric_side,
    gram_matrix,
    gram_matrix_direct,
    gram_quadratic_form,
    spectral_sum,
)

__version__ = "0.1.0"

__all__ = [
    "BumpSquare",
    "CombinedSquare",
    "ExclusionCurve",
    "GaussianProbe",
    "GeodesicClass",
    "GramSystem",
    "INCONCLUSIVE",
    "LAMBDA1_WINDOW",
    "MINIMAL_L_SPACE",
    "ManifoldData",
    "ManifoldFormatError",
    "NaiveExclusionReport",
    "PairConvolution",
    "PlantedSpectrum",
    "RIDGE_CAVEAT",
    "SPECTRUM_CAVEAT",
    "SincSplineFamily",
    "SingularGramError",
    "SupportError",
    "ThresholdIntervals",
    "TraceEvaluation",
    "Verdict",
    "admissibility_norm",
    "admissibility_report",
    "bspline4_eval",
    "bump_square",
    "classify",
    "combined_test_function",
    "compensated_sum",
    "constraint_vector",
    "expand_powers",
    "family_member_eval",
    "fit_manifold_to_spectrum",
    "gaussian_probe",
    "geodesic_weight",
    "geometric_side",
    "gram_matrix",
    "gram_matrix_direct",
    "gram_quadratic_form",
    "j_value",
    "load_manifold",
    "naive_exclusion",
    "normalize_holonomy",
    "pair_convolution_eval",
    "parse_manifold",
    "planted_gram",
    "scan",
    "serialize_manifold",
    "spectral_sum",
    "threshold_intervals",
    "weyl_tail",
]
