"""Bi-flat F-manifolds from the augmented Darboux-Egorov system."""

from __future__ import annotations

__version__ = "0.1.0"

from .config import DEFAULTS, Tolerances  # noqa: E402
from .darboux import (  # noqa: E402
    LameField,
    RotationField,
    build_dual_connection,
    build_natural_connection,
    de_residuals,
    lame_residuals,
    v_matrix,
)
from .geometry import ProductField, riemann_curvature  # noqa: E402
from .models import EpsilonModel, N2Model, epsilon_fields, n2_biflat  # noqa: E402
from .painleve import FState, integrate, invariants  # noqa: E402
from .suites import verify_biflat  # noqa: E402

__all__ = [
    "DEFAULTS", "Tolerances", "LameField", "RotationField", "build_dual_connection",
    "build_natural_connection", "de_residuals", "lame_residuals", "v_matrix", "ProductField",
    "riemann_curvature", "EpsilonModel", "N2Model", "epsilon_fields", "n2_biflat", "FState",
    "integrate", "invariants", "verify_biflat", "__version__",
]
