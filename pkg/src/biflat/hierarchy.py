"""Symmetries, recursion schemes and commuting flows of hydrodynamic type."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .geometry import ConnectionField, ProductField
from .numerics import integrate_path, partials

Array = np.ndarray
Evaluator = Callable[[Array], Array]

SCHEMES = ("principal", "equivalent", "dual")


@dataclass(frozen=True)
class VectorFieldSample:
    """A vector field ``u -> X(u)`` with an optional Jacobian ``J[i, j] = d_j X^i``."""

    func: Evaluator
    label: tuple = ()
    jac: Evaluator | None = None

    def __call__(self, u: Array) -> Array:
        return np.asarray(self.func(np.asarray(u, dtype=float)))

    def jacobian(self, u: Array, h: float | None = None) -> Array:
        u = np.asarray(u, dtype=float)
        if self.jac is not None:
            return np.asarray(self.jac(u))
        return partials(self, u, h).T


def constant_field(x: Sequence[float], label: tuple = ("const",)) -> VectorFieldSample:
    x = np.asarray(x, dtype=float)
    return VectorFieldSample(lambda u: x.copy(), label, lambda u: np.zeros((x.size, x.size)))


def unit_vector_field(n: int) -> VectorFieldSample:
    return constant_field(np.ones(n), ("e",))


def euler_vector_field(n: int) -> VectorFieldSample:
    return VectorFieldSample(lambda u: np.asarray(u, dtype=float).copy(), ("E",),
                             lambda u: np.eye(n))


def symmetry_residual(
    conn: Evaluator,
    c: ProductField,
    X: VectorFieldSample,
    p: Sequence[float],
    h: float | None = None,
) -> float:
    """``max |nabla_j T^i_k - nabla_k T^i_j|`` for ``T^i_k = c^i_ks X^s``.

    Derivatives of ``T`` are analytic when both ``c`` and ``X`` supply them and
    finite differences otherwise.
    """
    u = np.asarray(p, dtype=float)
    g = np.asarray(conn(u))
    cc = c(u)
    x = X(u)
    t = np.einsum("iks,s->ik", cc, x)
    if c.dfunc is not None and X.jac is not None:
        dt = np.einsum("jiks,s->jik", c.derivative(u), x) + np.einsum(
            "iks,sj->jik", cc, X.jacobian(u))
    else:
        def tfun(v: Array) -> Array:
            return np.einsum("iks,s->ik", c(v), X(v))

        dt = partials(tfun, u, h, nonzero=c.nonzero or getattr(conn, "nonzero", False))
    # N[j, i, k] = nabla_j T^i_k
    nab = dt + np.einsum("ijs,sk->jik", g, t) - np.einsum("sjk,is->jik", g, t)
    return float(np.max(np.abs(nab - nab.transpose(2, 1, 0))))


def _shifted(conn1: Evaluator, c: ProductField) -> Evaluator:
    def g2(u: Array) -> Array:
        return np.asarray(conn1(u)) + c(u)

    return g2


def _source(
    scheme: str,
    conn2: Evaluator | None,
    conn1: Evaluator,
    c: ProductField,
    E: Evaluator | None,
    X_prev: VectorFieldSample,
    h: float | None,
) -> Callable[[Array], Array]:
    """``S[i, j]`` in ``d_j X^i = -Gamma1^i_js X^s + S^i_j``."""
    if scheme == "principal":
        def src(u: Array) -> Array:
            return np.einsum("ijs,s->ij", c(u), X_prev(u))

        return src
    g2 = conn2 if conn2 is not None else _shifted(conn1, c)
    if scheme == "equivalent":
        Y = X_prev
    elif scheme == "dual":
        if E is None:
            raise ValueError("the dual scheme needs an eventual identity E")

        def yfun(u: Array) -> Array:
            return np.einsum("ijk,j,k->i", c(u), E(u), X_prev(u))

        yjac = None
        e_jac = getattr(E, "jac", None)
        if c.dfunc is not None and X_prev.jac is not None and e_jac is not None:
            def yjac(u: Array) -> Array:
                cc, ev, xv = c(u), E(u), X_prev(u)
                return (np.einsum("mijk,j,k->im", c.derivative(u), ev, xv)
                        + np.einsum("ijk,jm,k->im", cc, e_jac(u), xv)
                        + np.einsum("ijk,j,km->im", cc, ev, X_prev.jacobian(u)))

        Y = VectorFieldSample(yfun, ("E o", X_prev.label), yjac)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")

    def src(u: Array) -> Array:
        return Y.jacobian(u, h) + np.einsum("ijs,s->ij", np.asarray(g2(u)), Y(u))

    return src


def recursion_system(
    scheme: str,
    conn1: Evaluator,
    c: ProductField,
    X_prev: VectorFieldSample,
    conn2: Evaluator | None = None,
    E: Evaluator | None = None,
    h: float | None = None,
) -> Callable[[Array, Array], Array]:
    """``(u, X) -> J`` with ``J[i, j] = d_j X^i`` prescribed by a recursion scheme.

    * principal: ``nabla1 X = X_prev o``;
    * equivalent: ``nabla1 X = nabla2 X_prev`` (``conn2`` defaults to ``Gamma1 + c``);
    * dual: ``nabla1 X = nabla2 (E o X_prev)``.
    """
    src = _source(scheme, conn2, conn1, c, E, X_prev, h)

    def jac(u: Array, x: Array) -> Array:
        return -np.einsum("ijs,s->ij", np.asarray(conn1(u)), x) + src(u)

    return jac


def recursion_step(
    scheme: str,
    conn1: Evaluator,
    conn2: Evaluator | None,
    c: ProductField,
    E: Evaluator | None,
    X_prev: VectorFieldSample,
    base: Sequence[float],
    X_base: Sequence[float],
    target: Sequence[float],
    waypoints: Sequence[Sequence[float]] | None = None,
    steps: int = 200,
    h: float | None = None,
) -> Array:
    """Value at ``target`` of the next field of the chain.

    The total first-order system of the scheme is integrated with RK4 along
    the polyline ``base -> waypoints... -> target``, starting from ``X_base``.

    Raises:
        DomainError: If a path vertex is inadmissible.
    """
    pts = [np.asarray(base, dtype=float)]
    pts += [np.asarray(w, dtype=float) for w in (waypoints or [])]
    pts.append(np.asarray(target, dtype=float))
    for q in pts:
        if np.min(np.abs(q[:, None] - q[None, :]) + np.eye(q.size)) == 0.0:
            raise DomainError(f"path vertex {q.tolist()} is inadmissible")
    jac = recursion_system(scheme, conn1, c, X_prev, conn2, E, h)

    def rhs(u: Array, x: Array, v: Array) -> Array:
        return jac(u, x) @ v

    return integrate_path(rhs, np.asarray(X_base, dtype=float), pts, steps)


def recursion_field(
    scheme: str,
    conn1: Evaluator,
    conn2: Evaluator | None,
    c: ProductField,
    E: Evaluator | None,
    X_prev: VectorFieldSample,
    base: Sequence[float],
    X_base: Sequence[float],
    steps: int = 200,
    label: tuple | None = None,
) -> VectorFieldSample:
    """The next chain member as a field evaluated by transport from ``base``."""

    def func(u: Array) -> Array:
        return recursion_step(scheme, conn1, conn2, c, E, X_prev, base, X_base, u,
                              steps=steps)

    return VectorFieldSample(func, label or (scheme, X_prev.label))


def flat_frame(
    conn: Evaluator, base: Sequence[float], basis: Array | None = None, steps: int = 200
) -> list[VectorFieldSample]:
    """Parallel fields of ``conn`` obtained by transporting a basis from ``base``."""
    base = np.asarray(base, dtype=float)
    n = base.size
    basis = np.eye(n) if basis is None else np.asarray(basis, dtype=float)
    zero = constant_field(np.zeros(n))
    dummy = ProductField.canonical(n)
    out = []
    for a in range(basis.shape[0]):
        vec = basis[a]

        def func(u: Array, vec: Array = vec) -> Array:
            return recursion_step("principal", conn, None, dummy, None, zero, base, vec, u,
                                  steps=steps)

        out.append(VectorFieldSample(func, ("flat", a)))
    return out


@dataclass(frozen=True)
class ResonanceReport:
    residual: float
    resonant: bool
    coefficients: Array


def resonance_check(
    new: VectorFieldSample,
    prior: Sequence[VectorFieldSample],
    points: Sequence[Sequence[float]],
    tol: float = 1e-8,
) -> ResonanceReport:
    """Least-squares test of constant-coefficient dependence on prior chain members."""
    if not prior:
        return ResonanceReport(np.inf, False, np.zeros(0))
    rhs = np.concatenate([new(p) for p in points])
    mat = np.column_stack([np.concatenate([f(p) for p in points]) for f in prior])
    coef, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    res = float(np.linalg.norm(mat @ coef - rhs) / max(np.linalg.norm(rhs), 1e-300))
    return ResonanceReport(res, res < tol, coef)


# --------------------------------------------------------------------------
# flows on a periodic grid
# --------------------------------------------------------------------------


@dataclass
class GridState:
    """Periodic grid values ``u[cell, i]`` with spacing ``dx``."""

    u: Array
    dx: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.u = np.asarray(self.u, dtype=float)
        if self.u.ndim != 2 or self.u.shape[0] < 16:
            raise DomainError("a grid state needs shape (m, n) with m >= 16")
        if self.dx <= 0:
            raise DomainError("dx must be positive")
        self.check()

    def check(self) -> None:
        u = self.u
        gaps = np.abs(u[:, :, None] - u[:, None, :])
        n = u.shape[1]
        gaps[:, np.arange(n), np.arange(n)] = np.inf
        if not np.all(np.isfinite(u)) or np.min(gaps) == 0.0:
            raise DomainError("grid state has non-finite or colliding cells")

    @property
    def m(self) -> int:
        return self.u.shape[0]

    @property
    def length(self) -> float:
        return self.m * self.dx

    def with_u(self, u: Array) -> "GridState":
        return GridState(u, self.dx, dict(self.meta))

    @classmethod
    def smooth(
        cls,
        base: Sequence[float],
        amplitude: float = 0.1,
        m: int = 128,
        phases: Sequence[float] | None = None,
    ) -> "GridState":
        """``u^i(x) = base_i + amplitude * sin(x + phase_i)`` on ``[0, 2 pi)``."""
        base = np.asarray(base, dtype=float)
        n = base.size
        phases = np.linspace(0.0, 1.0, n) if phases is None else np.asarray(phases)
        x = 2.0 * np.pi * np.arange(m) / m
        u = base[None, :] + amplitude * np.sin(x[:, None] + phases[None, :])
        return cls(u, 2.0 * np.pi / m, {"base": base.tolist(), "amplitude": amplitude})


def spatial_derivative(u: Array, dx: float, scheme: str = "fd4") -> Array:
    """Periodic ``d/dx`` along axis 0 (4th-order central or spectral)."""
    if scheme == "fd4":
        return (np.roll(u, 2, axis=0) - 8 * np.roll(u, 1, axis=0)
                + 8 * np.roll(u, -1, axis=0) - np.roll(u, -2, axis=0)) / (12.0 * dx)
    if scheme == "spectral":
        m = u.shape[0]
        k = 2.0 * np.pi * np.fft.fftfreq(m, d=dx)
        if m % 2 == 0:
            k[m // 2] = 0.0
        return np.real(np.fft.ifft(1j * k[:, None] * np.fft.fft(u, axis=0), axis=0))
    raise ValueError(f"unknown scheme {scheme!r}")


def flow_rhs(c: ProductField, X: Evaluator, state: GridState | Array, dx: float | None = None,
             scheme: str = "fd4") -> Array:
    """``u^i_t = c^i_jk(u) X^j(u) u^k_x`` cell by cell."""
    if isinstance(state, GridState):
        u, dx = state.u, state.dx
    else:
        u = np.asarray(state)
        if dx is None:
            raise ValueError("dx is required for raw arrays")
    ux = spatial_derivative(u, dx, scheme)
    cs = np.stack([c(row) for row in u])
    xs = np.stack([np.asarray(X(row), dtype=float) for row in u])
    return np.einsum("mijk,mj,mk->mi", cs, xs, ux)


def evolve(c: ProductField, X: Evaluator, state: GridState, dt: float, steps: int,
           scheme: str = "fd4") -> GridState:
    """Classical RK4 in time for ``steps`` steps of size ``dt``."""
    u = state.u.copy()
    dx = state.dx

    def f(v: Array) -> Array:
        return flow_rhs(c, X, v, dx, scheme)

    for _ in range(steps):
        k1 = f(u)
        k2 = f(u + 0.5 * dt * k1)
        k3 = f(u + 0.5 * dt * k2)
        k4 = f(u + dt * k3)
        u = u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(u)):
        raise DomainError("grid evolution blew up; reduce the amplitude or the horizon")
    return state.with_u(u)


def commutator_check(
    c: ProductField,
    X: Evaluator,
    Y: Evaluator,
    state: GridState,
    dt: float,
    steps: int = 1,
    scheme: str = "fd4",
) -> float:
    """Sup-norm of (X then Y) minus (Y then X), each flow run for ``steps * dt``."""
    a = evolve(c, Y, evolve(c, X, state, dt, steps, scheme), dt, steps, scheme)
    b = evolve(c, X, evolve(c, Y, state, dt, steps, scheme), dt, steps, scheme)
    return float(np.max(np.abs(a.u - b.u)))


@dataclass(frozen=True)
class CommutatorStudy:
    dts: tuple[float, ...]
    norms: tuple[float, ...]
    ratios: tuple[float, ...]
    order: float


def commutator_study(
    c: ProductField,
    X: Evaluator,
    Y: Evaluator,
    state: GridState,
    dts: Sequence[float] = (0.02, 0.01, 0.005),
    horizon: float = 0.5,
    scheme: str = "spectral",
) -> CommutatorStudy:
    """Commutator norms at fixed horizon for several ``dt`` and a log-log order fit."""
    norms = []
    for dt in dts:
        steps = max(1, int(round(horizon / dt)))
        norms.append(commutator_check(c, X, Y, state, dt, steps, scheme))
    ratios = tuple(norms[k] / norms[k + 1] if norms[k + 1] > 0 else np.inf
                   for k in range(len(norms) - 1))
    logs = np.log(np.maximum(np.asarray(norms), 1e-300))
    order = float(np.polyfit(np.log(np.asarray(dts)), logs, 1)[0])
    return CommutatorStudy(tuple(dts), tuple(norms), ratios, order)


def epsilon_connection(model) -> ConnectionField:
    """Natural connection of an ε-model with the closed-form entries ``ε/(u^i - u^j)``."""
    from .darboux import natural_christoffel_from_g

    return ConnectionField(lambda u: natural_christoffel_from_g(model.natural_gamma_offdiag(u)),
                           name=f"natural-eps({model.eps:g})")
