"""Augmented Darboux-Egorov and Lamé systems, natural and dual connections.

Rotation coefficients are stored as ``n x n`` matrices ``B[i, j] = beta_ij``
with a zero diagonal. Lamé coefficients are length-``n`` vectors. As in
:mod:`biflat.geometry`, derivative arrays put the differentiation index first:
``dB[m, i, j] = d_m beta_ij`` and ``dH[m, i] = d_m H_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULTS
from .errors import DegeneracyError, DomainError, NumericError
from .geometry import ConnectionField, ResidualReport
from .numerics import integrate_path, partials

Array = np.ndarray
Evaluator = Callable[[Array], Array]


def _reject_collision(u: Array) -> None:
    s = np.sort(np.real(u))
    if np.any(np.diff(s) == 0.0):
        raise DomainError(f"coordinate collision at u={u.tolist()}")


@dataclass(frozen=True)
class RotationField:
    """Rotation coefficients ``beta_ij(u)``.

    Attributes:
        func: ``u -> B`` with ``B[i, j] = beta_ij``; the diagonal is ignored.
        n: Dimension.
        dfunc: Optional analytic partials ``u -> dB`` with ``dB[m, i, j]``.
        provenance: Model name or trajectory identifier.
    """

    func: Evaluator
    n: int
    dfunc: Evaluator | None = None
    provenance: str = ""

    def __call__(self, u: Array) -> Array:
        u = np.asarray(u, dtype=float)
        _reject_collision(u)
        b = np.array(self.func(u), copy=True)
        np.fill_diagonal(b, 0.0)
        return b

    def beta(self, i: int, j: int, u: Array) -> float:
        if i == j:
            raise ValueError("rotation coefficients are defined for i != j only")
        return self(u)[i, j]

    def derivative(self, u: Array, h: float | None = None) -> Array:
        u = np.asarray(u, dtype=float)
        if self.dfunc is not None:
            d = np.array(self.dfunc(u), copy=True)
            for m in range(self.n):
                np.fill_diagonal(d[m], 0.0)
            return d
        return partials(self, u, h)


@dataclass(frozen=True)
class LameField:
    """Lamé coefficients ``H_i(u)`` (or adjoint coefficients ``K_i``).

    Attributes:
        func: ``u -> H`` (length ``n``).
        n: Dimension.
        degree: Homogeneity degree ``d``.
        dfunc: Optional analytic partials ``u -> dH`` with ``dH[m, i]``.
        role: ``"primary"`` for ``H`` or ``"adjoint"`` for ``K``.
        degree_sign: Euler convention ``E(H) = degree_sign * d * H``. The
            normative convention is ``-1``.
        provenance: Model name.
    """

    func: Evaluator
    n: int
    degree: complex | float = 0.0
    dfunc: Evaluator | None = None
    role: str = "primary"
    degree_sign: int = -1
    provenance: str = ""

    def __post_init__(self) -> None:
        if self.role not in ("primary", "adjoint"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.degree_sign not in (-1, 1):
            raise ValueError("degree_sign must be +1 or -1")

    def __call__(self, u: Array) -> Array:
        u = np.asarray(u, dtype=float)
        _reject_collision(u)
        return np.asarray(self.func(u))

    def derivative(self, u: Array, h: float | None = None) -> Array:
        u = np.asarray(u, dtype=float)
        if self.dfunc is not None:
            return np.asarray(self.dfunc(u))
        return partials(self, u, h)


@dataclass(frozen=True)
class VMatrix:
    """``V_ij = (u^j - u^i) beta_ij`` with its eigen-decomposition."""

    matrix: Array
    eigenvalues: Array
    eigenvectors: Array
    point: tuple[float, ...] = field(default=())


# --------------------------------------------------------------------------
# residuals
# --------------------------------------------------------------------------


def _offdiag(n: int) -> Array:
    return ~np.eye(n, dtype=bool)


def de_residual_values(
    beta: RotationField, p: Sequence[float], h: float | None = None
) -> dict[str, float]:
    """Raw ED1-ED3 residuals at ``p``."""
    u = np.asarray(p, dtype=float)
    n = u.size
    b = beta(u)
    db = beta.derivative(u, h)
    ed1 = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if len({i, j, k}) == 3:
                    ed1 = max(ed1, abs(db[k, i, j] - b[i, k] * b[k, j]))
    off = _offdiag(n)
    ed2 = np.max(np.abs(db.sum(axis=0))[off])
    ed3 = np.max(np.abs(np.einsum("m,mij->ij", u, db) + b)[off])
    return {"ED1": float(ed1), "ED2": float(ed2), "ED3": float(ed3)}


def de_residuals(
    beta: RotationField,
    p: Sequence[float],
    h: float | None = None,
    tol: float | None = None,
) -> dict[str, ResidualReport]:
    """ED1-ED3 residual reports.

    ED1 is ``max |d_k beta_ij - beta_ik beta_kj|`` over distinct ``i, j, k``;
    ED2 is ``max |e(beta_ij)|`` and ED3 is ``max |E(beta_ij) + beta_ij|``.
    """
    tol = DEFAULTS.fd if tol is None else tol
    vals = de_residual_values(beta, p, h)
    return {k: ResidualReport.make(k, v, tol, p) for k, v in vals.items()}


def lame_residual_values(
    beta: RotationField,
    H: LameField,
    p: Sequence[float],
    h: float | None = None,
    checks: Sequence[str] = ("L1", "L2", "L3"),
) -> dict[str, float]:
    """Raw Lamé residuals at ``p``.

    For an adjoint field the transposed system ``d_j K_i = beta_ji K_j`` is
    used for L1.
    """
    u = np.asarray(p, dtype=float)
    n = u.size
    b = beta(u)
    hv = H(u)
    dh = H.derivative(u, h)
    out: dict[str, float] = {}
    if "L1" in checks:
        coeff = b.T if H.role == "adjoint" else b
        # dh[j, i] = d_j H_i must equal coeff[i, j] H_j
        lhs = dh.T
        rhs = coeff * hv[None, :]
        out["L1"] = float(np.max(np.abs(lhs - rhs)[_offdiag(n)]))
    if "L2" in checks:
        out["L2"] = float(np.max(np.abs(dh.sum(axis=0))))
    if "L3" in checks:
        euler = np.einsum("m,mi->i", u, dh)
        out["L3"] = float(np.max(np.abs(euler - H.degree_sign * H.degree * hv)))
    return out


def lame_residuals(
    beta: RotationField,
    H: LameField,
    p: Sequence[float],
    h: float | None = None,
    tol: float | None = None,
    checks: Sequence[str] = ("L1", "L2", "L3"),
) -> dict[str, ResidualReport]:
    """L1-L3 residual reports (subset selectable through ``checks``)."""
    tol = DEFAULTS.fd if tol is None else tol
    vals = lame_residual_values(beta, H, p, h, checks)
    return {k: ResidualReport.make(k, v, tol, p) for k, v in vals.items()}


# --------------------------------------------------------------------------
# connections
# --------------------------------------------------------------------------


def natural_christoffel_from_g(g: Array) -> Array:
    """Natural connection from ``G[i, j] = Gamma^i_ij`` (diagonal ignored)."""
    g = np.asarray(g)
    n = g.shape[0]
    gam = np.zeros((n, n, n), dtype=g.dtype)
    for i in range(n):
        for j in range(n):
            if i != j:
                gam[i, i, j] = gam[i, j, i] = g[i, j]
                gam[i, j, j] = -g[i, j]
        gam[i, i, i] = -sum(g[i, l] for l in range(n) if l != i)
    return gam


def dual_christoffel_from_g(g: Array, u: Array) -> Array:
    """Dual connection from ``G[i, j] = Gamma^i_ij`` at the point ``u``."""
    g = np.asarray(g)
    u = np.asarray(u, dtype=float)
    n = g.shape[0]
    gam = np.zeros((n, n, n), dtype=g.dtype)
    for i in range(n):
        for j in range(n):
            if i != j:
                gam[i, i, j] = gam[i, j, i] = g[i, j]
                gam[i, j, j] = -(u[i] / u[j]) * g[i, j]
        gam[i, i, i] = -sum(u[l] / u[i] * g[i, l] for l in range(n) if l != i) - 1.0 / u[i]
    return gam


def connection_coefficients(
    beta: RotationField, H: LameField, p: Sequence[float], delta_h: float | None = None
) -> Array:
    """``G[i, j] = (H_j / H_i) beta_ij``, the shared off-diagonal entries."""
    delta_h = DEFAULTS.delta_h if delta_h is None else delta_h
    u = np.asarray(p, dtype=float)
    hv = H(u)
    if np.min(np.abs(hv)) < delta_h:
        raise DegeneracyError(
            f"Lamé coefficient below {delta_h:.3g} at u={u.tolist()}: {hv.tolist()}"
        )
    g = hv[None, :] / hv[:, None] * beta(u)
    np.fill_diagonal(g, 0.0)
    return g


def build_natural_connection(
    beta: RotationField, H: LameField, p: Sequence[float], delta_h: float | None = None
) -> Array:
    """Christoffel symbols of the natural connection at ``p``.

    Raises:
        DegeneracyError: If some ``|H_i|`` falls below ``delta_h``.
    """
    return natural_christoffel_from_g(connection_coefficients(beta, H, p, delta_h))


def build_dual_connection(
    beta: RotationField, H: LameField, p: Sequence[float], delta_h: float | None = None
) -> Array:
    """Christoffel symbols of the dual connection at ``p``.

    Raises:
        DomainError: If some coordinate vanishes.
        DegeneracyError: If some ``|H_i|`` falls below ``delta_h``.
    """
    u = np.asarray(p, dtype=float)
    if np.any(u == 0.0):
        raise DomainError("the dual connection is singular where some u^i = 0")
    return dual_christoffel_from_g(connection_coefficients(beta, H, u, delta_h), u)


def natural_connection(beta: RotationField, H: LameField) -> ConnectionField:
    """The natural connection as an evaluator suitable for curvature checks."""
    return ConnectionField(lambda u: build_natural_connection(beta, H, u),
                           name=f"natural[{beta.provenance}]")


def dual_connection(beta: RotationField, H: LameField) -> ConnectionField:
    """The dual connection as an evaluator suitable for curvature checks."""
    return ConnectionField(lambda u: build_dual_connection(beta, H, u),
                           name=f"dual[{beta.provenance}]", nonzero=True)


# --------------------------------------------------------------------------
# V-matrix, transport of Lamé data, flat 1-forms
# --------------------------------------------------------------------------


def v_matrix(beta: RotationField | Array, p: Sequence[float]) -> VMatrix:
    """``V_ij = (u^j - u^i) beta_ij`` and its eigenpairs.

    If ``H`` satisfies L1 and L2 then ``E(H) = V H``, so an eigenvector with
    eigenvalue ``lam`` is a Lamé vector with ``E(H) = lam H`` at that point.

    Raises:
        NumericError: If the eigen-solver fails or returns non-finite values.
    """
    u = np.asarray(p, dtype=float)
    b = beta(u) if callable(beta) else np.asarray(beta, dtype=float)
    v = (u[None, :] - u[:, None]) * b
    np.fill_diagonal(v, 0.0)
    try:
        w, vecs = np.linalg.eig(v)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigen-decomposition of V failed: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(vecs))):
        raise NumericError("eigen-decomposition of V produced non-finite values")
    return VMatrix(v, w, vecs, tuple(float(x) for x in u))


def lame_path_rhs(beta: RotationField, adjoint: bool = False):
    """Right-hand side of the Lamé (or adjoint) system along a straight path.

    Combining L1 with L2 gives ``d_i H_i = -sum_{l != i} beta_il H_l``; along a
    path with velocity ``v`` this yields
    ``dH_i/ds = sum_{j != i} (v_j - v_i) beta_ij H_j``. The adjoint system uses
    the transposed coefficients.
    """

    def rhs(u: Array, y: Array, v: Array) -> Array:
        b = beta(u)
        if adjoint:
            b = b.T
        return ((v[None, :] - v[:, None]) * b) @ y

    return rhs


def transport_lame(
    beta: RotationField,
    y0: Sequence[complex | float],
    waypoints: Sequence[Sequence[float]],
    adjoint: bool = False,
    steps: int = 200,
) -> Array:
    """Integrate the Lamé or adjoint system from ``waypoints[0]`` to ``waypoints[-1]``."""
    return integrate_path(lame_path_rhs(beta, adjoint), np.asarray(y0), waypoints, steps)


def transported_lame_field(
    beta: RotationField,
    base: Sequence[float],
    y0: Sequence[float],
    adjoint: bool = False,
    degree: float = 0.0,
    steps: int = 200,
) -> LameField:
    """A Lamé field evaluated by straight-line transport from ``base``.

    Only L1 and L2 are imposed; the field is homogeneous only when the initial
    vector is an eigenvector of ``V`` at ``base``.
    """
    base = np.asarray(base, dtype=float)
    y0 = np.asarray(y0)

    def func(u: Array) -> Array:
        return transport_lame(beta, y0, [base, u], adjoint=adjoint, steps=steps)

    return LameField(func, beta.n, degree=degree,
                     role="adjoint" if adjoint else "primary",
                     provenance=f"transport[{beta.provenance}]")


@dataclass(frozen=True)
class FlatFormReport:
    omega: Array
    closedness: float
    covariant: float


def flat_form_and_closedness(
    K: LameField,
    H: LameField,
    beta: RotationField,
    p: Sequence[float],
    h: float | None = None,
) -> FlatFormReport:
    """The 1-form ``omega_i = K_i H_i`` and its flatness diagnostics.

    Returns the form at ``p``, the closedness residual
    ``max_{i<j} |d_j omega_i - d_i omega_j|`` and the covariant-constancy
    residual ``max |d_j omega_i - Gamma^s_ji omega_s|`` for the natural
    connection of ``(beta, H)``.
    """
    u = np.asarray(p, dtype=float)

    def omega_of(x: Array) -> Array:
        return K(x) * H(x)

    omega = omega_of(u)
    dom = partials(omega_of, u, h)  # dom[j, i] = d_j omega_i
    closed = np.max(np.abs(dom - dom.T))
    gam = build_natural_connection(beta, H, u)
    cov = dom - np.einsum("sji,s->ji", gam, omega)
    return FlatFormReport(omega, float(closed), float(np.max(np.abs(cov))))
