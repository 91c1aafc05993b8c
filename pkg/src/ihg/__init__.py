"""Exact invariant Hermitian geometry engine."""

from .catalog import CATALOG_NAMES, UnknownName, catalog, torus
from .coefficients import (
    Coefficient,
    DenominatorVanishes,
    DivisionByZero,
    GaussianRational,
    MixedRadicals,
    QuadraticSurd,
    SectorMixing,
    coeff_arith,
    conjugate,
    param_derivative,
    substitute,
)
from .cohomology import (
    BottChernSector,
    bc_class,
    harmonic_certificate,
    solve_dbar,
    solve_del,
)
from .deformation import (
    BaseConditionFails,
    CurveObstruction,
    CurveOfMetrics,
    Deformation,
    DegenerateAtLocus,
    MaurerCartanFails,
    SingularCorrection,
    curve_obstruction,
    dbar_vector,
    deform,
    mc_equation,
    vector_bracket,
)
from .exterior import Form, MultiIndex, VectorForm
from .geometry import Geometry, StructureError, check_nilpotent_shape
from .metrics import (
    ConditionReport,
    InvariantMetric,
    ShapeMismatch,
    all_or_none_skt,
    balanced_obstruction,
    check_condition,
    pluriclosed_criterion,
    pluriclosed_obstruction,
    strongly_gauduchon,
)
from .symbols import registry

__all__ = [
    "BaseConditionFails",
    "BottChernSector",
    "CATALOG_NAMES",
    "Coefficient",
    "ConditionReport",
    "CurveObstruction",
    "CurveOfMetrics",
    "Deformation",
    "DegenerateAtLocus",
    "DenominatorVanishes",
    "DivisionByZero",
    "Form",
    "GaussianRational",
    "Geometry",
    "InvariantMetric",
    "MaurerCartanFails",
    "MixedRadicals",
    "MultiIndex",
    "QuadraticSurd",
    "SectorMixing",
    "ShapeMismatch",
    "SingularCorrection",
    "StructureError",
    "UnknownName",
    "VectorForm",
    "all_or_none_skt",
    "balanced_obstruction",
    "bc_class",
    "catalog",
    "check_condition",
    "check_nilpotent_shape",
    "coeff_arith",
    "conjugate",
    "curve_obstruction",
    "dbar_vector",
    "deform",
    "harmonic_certificate",
    "mc_equation",
    "param_derivative",
    "pluriclosed_criterion",
    "pluriclosed_obstruction",
    "registry",
    "solve_dbar",
    "solve_del",
    "strongly_gauduchon",
    "substitute",
    "torus",
    "vector_bracket",
]
