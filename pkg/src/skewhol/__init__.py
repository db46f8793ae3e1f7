"""Skew-torsion metric connections on product manifolds.

Builds metric connections whose torsion 3-form represents a mixed degree-3
class on ``M1 x M2``, measures the off-diagonal part of their curvature, and
compares its dimension with the mixed tensor rank of the class.
"""

__version__ = "0.1.0"

from .connection import (  # noqa: E402
    TorsionSpec,
    curvature_at,
    torsion_from_class,
    zero_torsion,
)
from .forms import ExactPerturbation, FormField, harmonic_basis  # noqa: E402
from .geometry import FlatTorus, ProductManifold, RoundSphere2  # noqa: E402
from .holonomy import loop_holonomy, off_span_dimension  # noqa: E402
from .kunneth import KunnethClass, mixed_rank, project_form_to_class  # noqa: E402

__all__ = [
    "__version__",
    "ExactPerturbation",
    "FlatTorus",
    "FormField",
    "KunnethClass",
    "ProductManifold",
    "RoundSphere2",
    "TorsionSpec",
    "curvature_at",
    "harmonic_basis",
    "loop_holonomy",
    "mixed_rank",
    "off_span_dimension",
    "project_form_to_class",
    "torsion_from_class",
    "zero_torsion",
]
