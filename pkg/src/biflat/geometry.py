"""Pointwise tensor algebra on canonical coordinates.

Connections are represented by callables ``u -> gamma`` where ``gamma[i, j, k]``
holds the Christoffel symbol with upper index ``i`` and lower indices ``j, k``.
Products are :class:`ProductField` objects whose evaluator returns structure
constants ``c[i, j, k] = c^i_jk``. Derivative arrays always carry the
differentiation index first, so ``dc[m, i, j, k] = d_m c^i_jk``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .config import DEFAULTS
from .errors import DomainError
from .numerics import partials

Array = np.ndarray
Evaluator = Callable[[Array], Array]


def as_point(
    u: Sequence[float], delta_sep: float | None = None, nonzero: bool = False
) -> Array:
    """Validate canonical coordinates and return them as a float array.

    Args:
        u: Coordinates ``(u^1, ..., u^n)``.
        delta_sep: Minimal admissible gap between coordinates (and minimal
            ``|u^i|`` when ``nonzero`` is set). Defaults to the configured value.
        nonzero: Also require every coordinate to stay away from zero, as the
            dual product and dual connection do.

    Raises:
        DomainError: If the point is not admissible.
    """
    if delta_sep is None:
        delta_sep = DEFAULTS.delta_sep
    p = np.asarray(u, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DomainError(f"a point needs n >= 2 coordinates, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DomainError("point has non-finite coordinates")
    gaps = np.abs(p[:, None] - p[None, :])[~np.eye(p.size, dtype=bool)]
    if np.min(gaps) < delta_sep:
        raise DomainError(
            f"coordinates collide: min gap {np.min(gaps):.3g} < delta_sep {delta_sep:.3g}"
        )
    if nonzero and np.min(np.abs(p)) < delta_sep:
        raise DomainError(
            f"coordinate too close to zero: min |u^i| {np.min(np.abs(p)):.3g}"
        )
    return p


@dataclass(frozen=True)
class ResidualReport:
    """Outcome of one residual check at one point."""

    name: str
    value: float
    tolerance: float
    passed: bool
    point: tuple[float, ...] = ()

    @classmethod
    def make(
        cls, name: str, value: float, tolerance: float, point: Sequence[float] = ()
    ) -> "ResidualReport":
        value = float(value)
        return cls(name, value, float(tolerance), bool(value <= tolerance),
                   tuple(float(x) for x in point))

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "point": list(self.point),
        }


@dataclass(frozen=True)
class ConnectionField:
    """A connection given by its Christoffel symbols in canonical coordinates.

    ``nonzero`` marks connections that are singular at ``u^i = 0`` so that
    finite-difference stencils keep away from those hyperplanes.
    """

    func: Evaluator
    name: str = "connection"
    nonzero: bool = False

    def __call__(self, u: Array) -> Array:
        return self.func(np.asarray(u, dtype=float))


def zero_connection(n: int) -> ConnectionField:
    return ConnectionField(lambda u: np.zeros((n, n, n)), name="zero")


def _needs_nonzero(obj: Any) -> bool:
    return bool(getattr(obj, "nonzero", False))


def _eval_gamma(conn: Evaluator | Array, u: Array) -> Array:
    if callable(conn):
        return np.asarray(conn(u))
    return np.asarray(conn)


def check_christoffel(gamma: Array, tol: float = 0.0) -> None:
    """Raise ValueError unless ``gamma`` is finite and symmetric in its lower indices."""
    gamma = np.asarray(gamma)
    if gamma.ndim != 3 or len(set(gamma.shape)) != 1:
        raise ValueError(f"Christoffel array must be n x n x n, got {gamma.shape}")
    if not np.all(np.isfinite(gamma)):
        raise ValueError("Christoffel array has non-finite entries")
    asym = np.max(np.abs(gamma - gamma.transpose(0, 2, 1)))
    if asym > tol:
        raise ValueError(f"Christoffel symbols not symmetric (max {asym:.3g})")


# --------------------------------------------------------------------------
# products
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductField:
    """Structure constants of a commutative associative product with unit.

    Attributes:
        func: Evaluator ``u -> c`` with ``c[i, j, k] = c^i_jk``.
        unit: Evaluator ``u -> e(u)`` of the unit vector field.
        name: Identifier used in reports.
        dfunc: Optional analytic derivative ``u -> dc`` with
            ``dc[m, i, j, k] = d_m c^i_jk``. Finite differences are used
            when absent.
        nonzero: Whether the field is singular on the hyperplanes ``u^i = 0``.
    """

    func: Evaluator
    unit: Evaluator
    name: str = "product"
    dfunc: Evaluator | None = None
    nonzero: bool = False

    def __call__(self, u: Array) -> Array:
        return self.func(np.asarray(u, dtype=float))

    def derivative(self, u: Array, h: float | None = None) -> Array:
        u = np.asarray(u, dtype=float)
        if self.dfunc is not None:
            return np.asarray(self.dfunc(u))
        return partials(self.func, u, h, nonzero=self.nonzero)

    @classmethod
    def canonical(cls, n: int) -> "ProductField":
        """The semisimple product ``d_i o d_j = delta_ij d_i`` with unit ``e``."""
        c = np.zeros((n, n, n))
        for i in range(n):
            c[i, i, i] = 1.0
        return cls(
            func=lambda u: c.copy(),
            unit=lambda u: np.ones(n),
            name="canonical",
            dfunc=lambda u: np.zeros((n, n, n, n)),
        )

    @classmethod
    def dual(cls, n: int) -> "ProductField":
        """The dual product ``X * Y = X o Y o E^{-1}`` with unit ``E = u``."""

        def func(u: Array) -> Array:
            c = np.zeros((n, n, n))
            for i in range(n):
                c[i, i, i] = 1.0 / u[i]
            return c

        def dfunc(u: Array) -> Array:
            dc = np.zeros((n, n, n, n))
            for i in range(n):
                dc[i, i, i, i] = -1.0 / u[i] ** 2
            return dc

        return cls(func=func, unit=lambda u: np.asarray(u, dtype=float).copy(),
                   name="dual", dfunc=dfunc, nonzero=True)

    def perturbed(self, eta: Evaluator, name: str | None = None) -> "ProductField":
        """A copy with ``eta(u)`` added to the structure constants (FD derivatives)."""
        base = self.func
        return ProductField(
            func=lambda u: base(u) + eta(u),
            unit=self.unit,
            name=name or f"{self.name}+perturbation",
            dfunc=None,
            nonzero=self.nonzero,
        )

    def commutativity_residual(self, u: Array) -> float:
        c = self(u)
        return float(np.max(np.abs(c - c.transpose(0, 2, 1))))

    def associativity_residual(self, u: Array) -> float:
        """``max |c^s_jk c^i_sl - c^s_kl c^i_js|``."""
        c = self(u)
        lhs = np.einsum("sjk,isl->ijkl", c, c)
        rhs = np.einsum("skl,ijs->ijkl", c, c)
        return float(np.max(np.abs(lhs - rhs)))

    def unit_residual(self, u: Array) -> float:
        """``max |c^i_jk e^k - delta^i_j|``."""
        u = np.asarray(u, dtype=float)
        c = self(u)
        e = np.asarray(self.unit(u))
        return float(np.max(np.abs(np.einsum("ijk,k->ij", c, e) - np.eye(c.shape[0]))))


# --------------------------------------------------------------------------
# curvature and residuals
# --------------------------------------------------------------------------


def riemann_curvature(
    conn: Evaluator, p: Sequence[float], h: float | None = None
) -> Array:
    """Riemann tensor ``R[i, j, k, l] = R^i_jkl`` of a connection.

    ``R^i_jkl = d_k G^i_lj - d_l G^i_kj + G^i_ks G^s_lj - G^i_ls G^s_kj`` with
    Richardson-extrapolated central differences. The tensor is assembled as
    ``Q - Q^T(k<->l)`` so antisymmetry in the last two indices is exact.

    Raises:
        DomainError: If the stencil approaches a coordinate collision.
    """
    u = np.asarray(p, dtype=float)
    gamma = _eval_gamma(conn, u)
    dgamma = partials(lambda x: _eval_gamma(conn, x), u, h, nonzero=_needs_nonzero(conn))
    # dgamma[k, i, l, j] = d_k G^i_lj  ->  T[i, j, k, l]
    t = dgamma.transpose(1, 3, 0, 2)
    q = t + np.einsum("iks,slj->ijkl", gamma, gamma)
    return q - q.transpose(0, 1, 3, 2)


def first_bianchi_residual(riemann: Array) -> float:
    """``max |R^i_jkl + R^i_klj + R^i_ljk|`` (torsion-free connections)."""
    r = np.asarray(riemann)
    cyc = r + np.einsum("iklj->ijkl", r) + np.einsum("iljk->ijkl", r)
    return float(np.max(np.abs(cyc)))


def hertling_manin_residual(
    c: ProductField, p: Sequence[float], h: float | None = None
) -> float:
    """Max-abs component of the Hertling-Manin tensor of a product.

    The tensor is ``P_{X o Y} - X o P_Y - Y o P_X`` with
    ``P_X = Lie_X(o)``, written in coordinates as::

        c^s_im d_s c^k_jl - c^s_jl d_s c^k_im + c^k_sl d_j c^s_im
        + c^k_js d_l c^s_im - c^k_is d_m c^s_jl - c^k_ms d_i c^s_jl

    for all free indices ``(i, m, j, l, k)``. It vanishes identically for
    constant structure constants.
    """
    u = np.asarray(p, dtype=float)
    cc = c(u)
    dc = c.derivative(u, h)
    t1 = np.einsum("sim,skjl->imjlk", cc, dc)
    t2 = np.einsum("sjl,skim->imjlk", cc, dc)
    t3 = np.einsum("ksl,jsim->imjlk", cc, dc)
    t4 = np.einsum("kjs,lsim->imjlk", cc, dc)
    t5 = np.einsum("kis,msjl->imjlk", cc, dc)
    t6 = np.einsum("kms,isjl->imjlk", cc, dc)
    return float(np.max(np.abs(t1 - t2 + t3 + t4 - t5 - t6)))


def covariant_derivative_product(
    conn: Evaluator, c: ProductField, p: Sequence[float], h: float | None = None
) -> Array:
    """``N[l, i, j, k] = nabla_l c^i_jk`` for the (1,2)-tensor ``c``."""
    u = np.asarray(p, dtype=float)
    g = _eval_gamma(conn, u)
    cc = c(u)
    dc = c.derivative(u, h)
    return (
        dc
        + np.einsum("ils,sjk->lijk", g, cc)
        - np.einsum("slj,isk->lijk", g, cc)
        - np.einsum("slk,ijs->lijk", g, cc)
    )


def compatibility_residual(
    conn: Evaluator, c: ProductField, p: Sequence[float], h: float | None = None
) -> float:
    """``max |nabla_l c^i_jk - nabla_j c^i_lk|`` over all indices."""
    nab = covariant_derivative_product(conn, c, p, h)
    return float(np.max(np.abs(nab - nab.transpose(2, 1, 0, 3))))


def parallel_vector_residual(
    conn: Evaluator,
    X: Evaluator,
    p: Sequence[float],
    jac: Evaluator | None = None,
    h: float | None = None,
) -> float:
    """``max |d_j X^i + G^i_js X^s|``.

    Args:
        conn: Connection evaluator.
        X: Vector field evaluator.
        p: Point.
        jac: Analytic Jacobian ``u -> J`` with ``J[i, j] = d_j X^i``; finite
            differences are used when omitted.
        h: FD step when ``jac`` is omitted.
    """
    u = np.asarray(p, dtype=float)
    g = _eval_gamma(conn, u)
    x = np.asarray(X(u), dtype=float)
    if jac is not None:
        dx = np.asarray(jac(u))
    else:
        dx = partials(X, u, h).T
    return float(np.max(np.abs(dx + np.einsum("ijs,s->ij", g, x))))


def almost_equivalence_residual(
    conn1: Evaluator | Array, conn2: Evaluator | Array, p: Sequence[float]
) -> float:
    """``max_{i != j} |G1^i_ij - G2^i_ij|``."""
    u = np.asarray(p, dtype=float)
    g1 = _eval_gamma(conn1, u)
    g2 = _eval_gamma(conn2, u)
    n = g1.shape[0]
    diff = [abs(g1[i, i, j] - g2[i, i, j]) for i in range(n) for j in range(n) if i != j]
    return float(max(diff))


def unit_field(n: int) -> tuple[Evaluator, Evaluator]:
    """The unit ``e = sum d_i`` and its (zero) Jacobian."""
    return (lambda u: np.ones(n)), (lambda u: np.zeros((n, n)))


def euler_field(n: int) -> tuple[Evaluator, Evaluator]:
    """The Euler field ``E = sum u^i d_i`` and its (identity) Jacobian."""
    return (lambda u: np.asarray(u, dtype=float).copy()), (lambda u: np.eye(n))
