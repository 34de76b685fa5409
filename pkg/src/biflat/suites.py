"""Batch verification of bi-flat structures at sampled points."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULTS, Tolerances
from .darboux import (
    LameField,
    RotationField,
    build_dual_connection,
    build_natural_connection,
    de_residual_values,
    dual_connection,
    lame_residual_values,
    natural_connection,
)
from .geometry import (
    ProductField,
    almost_equivalence_residual,
    compatibility_residual,
    euler_field,
    hertling_manin_residual,
    parallel_vector_residual,
    riemann_curvature,
    unit_field,
)


def random_points(
    n: int,
    count: int,
    seed: int,
    delta_sep: float | None = None,
    nonzero: bool = True,
    low: float = -2.0,
    high: float = 2.0,
) -> np.ndarray:
    """Uniform points in ``[low, high]^n`` rejection-sampled for admissibility.

    Points are kept when all pairwise gaps are at least ``delta_sep`` and, if
    ``nonzero`` is set, every ``|u^i| >= delta_sep``.
    """
    delta_sep = DEFAULTS.delta_sep if delta_sep is None else delta_sep
    rng = np.random.default_rng(seed)
    out: list[np.ndarray] = []
    while len(out) < count:
        u = rng.uniform(low, high, n)
        gaps = np.abs(u[:, None] - u[None, :])
        gaps[np.diag_indices(n)] = np.inf
        if np.min(gaps) < delta_sep:
            continue
        if nonzero and np.min(np.abs(u)) < delta_sep:
            continue
        out.append(u)
    return np.array(out).reshape(count, n)


# check name -> which tolerance class applies
CHECK_CLASSES = {
    "ED1": "fd", "ED2": "fd", "ED3": "fd",
    "L1": "fd", "L2": "fd", "L3": "fd",
    "riemann_natural": "fd", "riemann_dual": "fd",
    "hertling_manin_canonical": "fd", "hertling_manin_dual": "fd",
    "compat_natural": "fd", "compat_dual": "fd",
    "parallel_e": "algebraic", "parallel_E": "algebraic",
    "almost_equivalence": "algebraic",
    "product_axioms": "algebraic",
}

ALL_CHECKS = tuple(CHECK_CLASSES)


@dataclass
class SuiteResult:
    """Per-check maxima over all sampled points."""

    values: dict[str, list[float]] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    points: list[list[float]] = field(default_factory=list)

    def max(self, name: str) -> float:
        return float(max(self.values[name]))

    def worst_point(self, name: str) -> list[float]:
        return self.points[int(np.argmax(self.values[name]))]

    def passed(self, name: str) -> bool:
        return self.max(name) <= self.tolerances[name]

    @property
    def all_passed(self) -> bool:
        return all(self.passed(k) for k in self.values)

    def summary(self) -> list[dict]:
        return [
            {
                "name": k,
                "value": self.max(k),
                "tolerance": self.tolerances[k],
                "pass": self.passed(k),
                "point": self.worst_point(k),
                "samples": len(v),
            }
            for k, v in self.values.items()
        ]


def verify_biflat(
    beta: RotationField,
    H: LameField,
    points: Sequence[Sequence[float]],
    tolerances: Tolerances | None = None,
    checks: Sequence[str] = ALL_CHECKS,
    overrides: dict[str, float] | None = None,
) -> SuiteResult:
    """Evaluate every defining property of the bi-flat structure built from ``(beta, H)``.

    Args:
        beta: Rotation coefficients.
        H: Homogeneous Lamé coefficients.
        points: Sample points.
        tolerances: Tolerance classes; FD-based checks use ``fd``, algebraic
            identities use ``algebraic``.
        checks: Subset of :data:`ALL_CHECKS`.
        overrides: Per-check tolerance overrides.
    """
    tol = tolerances or DEFAULTS
    unknown = set(checks) - set(CHECK_CLASSES)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    n = beta.n
    nat = natural_connection(beta, H)
    dual = dual_connection(beta, H)
    can = ProductField.canonical(n)
    dprod = ProductField.dual(n)
    e, je = unit_field(n)
    E, jE = euler_field(n)
    res = SuiteResult()
    for name in checks:
        res.values[name] = []
        res.tolerances[name] = getattr(tol, CHECK_CLASSES[name])
        if overrides and name in overrides:
            res.tolerances[name] = overrides[name]
    for p in points:
        u = np.asarray(p, dtype=float)
        res.points.append(u.tolist())
        vals: dict[str, float] = {}
        if any(k.startswith("ED") for k in checks):
            vals.update(de_residual_values(beta, u))
        lchecks = [k for k in ("L1", "L2", "L3") if k in checks]
        if lchecks:
            vals.update(lame_residual_values(beta, H, u, checks=lchecks))
        if "riemann_natural" in checks:
            vals["riemann_natural"] = float(np.max(np.abs(riemann_curvature(nat, u))))
        if "riemann_dual" in checks:
            vals["riemann_dual"] = float(np.max(np.abs(riemann_curvature(dual, u))))
        if "hertling_manin_canonical" in checks:
            vals["hertling_manin_canonical"] = hertling_manin_residual(can, u)
        if "hertling_manin_dual" in checks:
            vals["hertling_manin_dual"] = hertling_manin_residual(dprod, u)
        if "compat_natural" in checks:
            vals["compat_natural"] = compatibility_residual(nat, can, u)
        if "compat_dual" in checks:
            vals["compat_dual"] = compatibility_residual(dual, dprod, u)
        if "parallel_e" in checks:
            vals["parallel_e"] = parallel_vector_residual(nat, e, u, je)
        if "parallel_E" in checks:
            vals["parallel_E"] = parallel_vector_residual(dual, E, u, jE)
        if "almost_equivalence" in checks:
            vals["almost_equivalence"] = almost_equivalence_residual(
                build_natural_connection(beta, H, u), build_dual_connection(beta, H, u), u)
        if "product_axioms" in checks:
            vals["product_axioms"] = max(
                f(u) for prod in (can, dprod)
                for f in (prod.commutativity_residual, prod.associativity_residual,
                          prod.unit_residual))
        for name in checks:
            res.values[name].append(float(vals[name]))
    return res
