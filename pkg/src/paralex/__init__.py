"""Numerical laboratory for absolute parallelisms.

Given a frame field on a coordinate chart, compute its groupoid arrows,
canonical metric, integrability object, the two canonical covariant
derivatives, linear and primary curvature, Ricci/scalar/sectional
curvatures, the induced Lie algebra, and the Levi-Civita comparison.
"""

__version__ = "0.1.0"

from .algebra import (
    Classification,
    ClassificationCheck,
    StructureConstants,
    algebraic_bracket,
    classification_check,
    classify,
    derived_and_central_series,
    killing_form,
    structure_constants,
)
from .connections import (
    ConnectionCoefficients,
    FlowPath,
    gamma,
    integrability,
    is_flat,
    linear_curvature,
    nabla,
    nabla_tilde,
    pre_one_parameter_flow,
)
from .curvature import (
    DecompositionReport,
    IdentityReport,
    PrimaryCurvature,
    decomposition_report,
    identity_suite,
    levi_civita,
    primary_curvature,
    ricci_S,
    scalar_K,
    sectional,
    sectional_matrix,
)
from .exprparse import load_frame_file, parse_frame_expr
from .frame import (
    FrameAtPoint,
    FrameProvider,
    act_constant,
    canonical_metric,
    catalog_lookup,
    evaluate_frame,
    frame_fields,
    groupoid_arrow,
    sample_points,
)
from .tensor import Box, FDConfig, TensorValue, contract, fd_derivative, raise_lower, tensor_product

__all__ = [
    "__version__",
    "Classification",
    "ClassificationCheck",
    "StructureConstants",
    "algebraic_bracket",
    "classification_check",
    "classify",
    "derived_and_central_series",
    "killing_form",
    "structure_constants",
    "ConnectionCoefficients",
    "FlowPath",
    "gamma",
    "integrability",
    "is_flat",
    "linear_curvature",
    "nabla",
    "nabla_tilde",
    "pre_one_parameter_flow",
    "DecompositionReport",
    "IdentityReport",
    "PrimaryCurvature",
    "decomposition_report",
    "identity_suite",
    "levi_civita",
    "primary_curvature",
    "ricci_S",
    "scalar_K",
    "sectional",
    "sectional_matrix",
    "load_frame_file",
    "parse_frame_expr",
    "FrameAtPoint",
    "FrameProvider",
    "act_constant",
    "canonical_metric",
    "catalog_lookup",
    "evaluate_frame",
    "frame_fields",
    "groupoid_arrow",
    "sample_points",
    "Box",
    "FDConfig",
    "TensorValue",
    "contract",
    "fd_derivative",
    "raise_lower",
    "tensor_product",
]
