"""Closed-form families: the ε-system in any dimension and the n = 2 models."""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .darboux import LameField, RotationField
from .errors import DomainError, InvalidModelError, PoleError

Array = np.ndarray


# --------------------------------------------------------------------------
# ε-system
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EpsilonModel:
    """The ε-system ``u^i_t = (u^i - ε Σ_k u^k) u^i_x``.

    Its Lamé coefficients are ``H_i = Π_{l≠i} |u^i - u^l|^{-ε}`` with degree
    ``d = (n - 1) ε``. The absolute value keeps ``H`` real at every admissible
    point and changes ``H_i`` only by a locally constant factor ``±1``, which
    drops out of every equation it has to satisfy.
    """

    n: int
    eps: float

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("the ε-system needs n >= 2")

    @property
    def degree(self) -> float:
        return (self.n - 1) * self.eps

    def _diffs(self, u: Array) -> Array:
        u = np.asarray(u, dtype=float)
        diff = u[:, None] - u[None, :]
        if np.any(diff[~np.eye(self.n, dtype=bool)] == 0.0):
            raise DomainError(f"coordinate collision at u={u.tolist()}")
        return diff

    def lame(self, u: Array) -> Array:
        diff = self._diffs(u)
        np.fill_diagonal(diff, 1.0)
        return np.prod(np.abs(diff), axis=1) ** (-self.eps)

    def dlog_lame(self, u: Array) -> Array:
        """``L[m, i] = d_m ln H_i``."""
        diff = self._diffs(u)
        np.fill_diagonal(diff, np.inf)
        inv = 1.0 / diff  # inv[i, l] = 1/(u^i - u^l), zero on the diagonal
        out = -self.eps * (-inv.T)  # m != i: -ε * (-1/(u^i - u^m))
        out[np.diag_indices(self.n)] = -self.eps * inv.sum(axis=1)
        return out

    def dlame(self, u: Array) -> Array:
        return self.dlog_lame(u) * self.lame(u)[None, :]

    def rotation(self, u: Array) -> Array:
        diff = self._diffs(u)
        h = self.lame(u)
        np.fill_diagonal(diff, 1.0)
        b = self.eps * h[:, None] / (h[None, :] * diff)
        np.fill_diagonal(b, 0.0)
        return b

    def drotation(self, u: Array) -> Array:
        """``dB[m, i, j] = d_m beta_ij``."""
        n = self.n
        diff = self._diffs(u)
        np.fill_diagonal(diff, 1.0)
        b = self.rotation(u)
        dl = self.dlog_lame(u)
        eye = np.eye(n)
        # (δ_mi - δ_mj) / (u^i - u^j)
        kron = (eye[:, :, None] - eye[:, None, :]) / diff[None, :, :]
        return b[None] * (dl[:, :, None] - dl[:, None, :] - kron)

    def velocity(self, u: Array) -> Array:
        u = np.asarray(u, dtype=float)
        return u - self.eps * u.sum()

    def velocity_jacobian(self, u: Array) -> Array:
        return np.eye(self.n) - self.eps

    def natural_gamma_offdiag(self, u: Array) -> Array:
        """Expected ``Gamma^i_ij = ε / (u^i - u^j)``."""
        diff = self._diffs(u)
        np.fill_diagonal(diff, np.inf)
        return self.eps / diff


def epsilon_fields(model: EpsilonModel) -> tuple[RotationField, LameField]:
    """Rotation and Lamé fields of the ε-system with analytic partials."""
    tag = f"epsilon(n={model.n}, eps={model.eps:g})"
    beta = RotationField(model.rotation, model.n, dfunc=model.drotation, provenance=tag)
    lame = LameField(model.lame, model.n, degree=model.degree, dfunc=model.dlame,
                     provenance=tag)
    return beta, lame


def epsilon_adjoint(model: EpsilonModel) -> LameField:
    """The adjoint solution ``K_i = 1 / H_i``.

    It solves ``d_j K_i = beta_ji K_j`` and ``e(K) = 0``; paired with ``H`` it
    gives the constant form ``omega = (1, ..., 1)``.
    """

    def func(u: Array) -> Array:
        return 1.0 / model.lame(u)

    def dfunc(u: Array) -> Array:
        return -model.dlog_lame(u) / model.lame(u)[None, :]

    return LameField(func, model.n, degree=-model.degree, dfunc=dfunc, role="adjoint",
                     provenance=f"epsilon-adjoint(n={model.n}, eps={model.eps:g})")


# --------------------------------------------------------------------------
# n = 2
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class N2Model:
    """n = 2 rotation coefficients ``beta_12 = C1/(u^1-u^2)``, ``beta_21 = C2/(u^1-u^2)``.

    Attributes:
        C1, C2: Model constants, not both zero.
        a, b: Branch constants of the natural Lamé solution.
        complex_mode: Evaluate closed forms over the complex numbers with
            principal branches when their real versions are undefined.
    """

    C1: float
    C2: float
    a: float = 1.0
    b: float = 0.0
    complex_mode: bool = False

    def __post_init__(self) -> None:
        if self.C1 == 0 and self.C2 == 0:
            raise InvalidModelError("C1 and C2 must not both vanish")

    @property
    def provenance(self) -> str:
        return f"n2(C1={self.C1:g}, C2={self.C2:g})"

    def rotation(self, u: Array) -> Array:
        z = u[0] - u[1]
        if z == 0:
            raise DomainError("u^1 = u^2")
        return np.array([[0.0, self.C1 / z], [self.C2 / z, 0.0]])

    def drotation(self, u: Array) -> Array:
        z = u[0] - u[1]
        g = np.array([[0.0, -self.C1 / z**2], [-self.C2 / z**2, 0.0]])
        return np.stack([g, -g])

    def rotation_field(self) -> RotationField:
        return RotationField(self.rotation, 2, dfunc=self.drotation,
                             provenance=self.provenance)


def _sqrt(x: float, complex_mode: bool, what: str) -> complex | float:
    if x >= 0:
        return float(np.sqrt(x))
    if not complex_mode:
        raise DomainError(f"{what} = {x:g} < 0; enable complex mode")
    return cmath.sqrt(x)


def _n2_natural_parts(model: N2Model, u: Array):
    z = float(u[0] - u[1])
    if z == 0:
        raise DomainError("u^1 = u^2")
    if z < 0 and not model.complex_mode:
        raise DomainError("u^1 < u^2 needs complex mode for ln(u^1 - u^2)")
    if model.C1 == 0:
        raise InvalidModelError("the natural Lamé formulas need C1 != 0")
    k = _sqrt(model.C1 * model.C2, model.complex_mode, "C1*C2")
    log = np.log(z) if z > 0 else cmath.log(z)
    s, c = np.sin(k * log), np.cos(k * log)
    return z, k, s, c


def n2_natural_lame(model: N2Model, u: Array) -> Array:
    """Natural Lamé pair ``(H1, H2)`` in the trigonometric-logarithmic form.

    ``H1 = a sin(k ln z) + b cos(k ln z)`` and
    ``H2 = -(k / C1)(a cos(k ln z) - b sin(k ln z))`` with ``z = u^1 - u^2``
    and ``k = sqrt(C1 C2)``. For ``C1 > 0`` the prefactor is ``sqrt(C2/C1)``;
    writing it as ``k / C1`` keeps L1 valid for negative ``C1`` too.
    """
    u = np.asarray(u, dtype=float)
    z, k, s, c = _n2_natural_parts(model, u)
    h1 = model.a * s + model.b * c
    h2 = -(k / model.C1) * (model.a * c - model.b * s)
    return np.array([h1, h2])


def n2_natural_dlame(model: N2Model, u: Array) -> Array:
    """Analytic partials ``dH[m, i]`` of :func:`n2_natural_lame`."""
    u = np.asarray(u, dtype=float)
    z, k, s, c = _n2_natural_parts(model, u)
    h1 = model.a * s + model.b * c
    dh1 = (k / z) * (model.a * c - model.b * s)
    dh2 = model.C2 * h1 / z
    g = np.array([dh1, dh2])
    return np.stack([g, -g])


def n2_natural_lame_field(model: N2Model) -> LameField:
    return LameField(lambda u: n2_natural_lame(model, u), 2,
                     dfunc=lambda u: n2_natural_dlame(model, u),
                     provenance=model.provenance + "/natural")


def special_dual_f(z: float, d: float, a: float, b: float) -> tuple[float, float]:
    """Closed-form solution ``(f, f')`` of the dual ODE for ``C1 = 1, C2 = -4``."""
    w = z - 1.0
    pa = (-z + d * z - 2.0 - d) * z ** (d + 1)
    dpa = (d - 1.0) * z ** (d + 1) + (-z + d * z - 2.0 - d) * (d + 1) * z**d
    pb = (d * d + 3 * d + 2) * z * z + (-2 * d - 2 * d * d + 4) * z + d * d - d
    dpb = 2 * (d * d + 3 * d + 2) * z + (-2 * d - 2 * d * d + 4)
    f = (a * pa + b * pb) / w**2
    fp = (a * dpa + b * dpb) / w**2 - 2.0 * (a * pa + b * pb) / w**3
    return f, fp


def special_dual_lame(u: Array, d: float, a: float, b: float) -> Array:
    """Explicit ``(H1, H2)`` of the dual Lamé system for ``C1 = 1, C2 = -4``."""
    u1, u2 = float(u[0]), float(u[1])
    den = (u1 - u2) ** 2
    h1 = (-a * u2 ** (d + 1) * (u2 - d * u2 + 2 * u1 + d * u1) / den
          + b * u1**d * (u2 * u2 * (d * d + 3 * d + 2)
                         + u1 * u2 * (-2 * d - 2 * d * d + 4)
                         + u1 * u1 * (d * d - d)) / den)
    h2 = (-4 * b * u1 ** (d + 1) * (-d * u2 + d * u1 - u1 - 2 * u2) / den
          - a * u2**d * (u2 * u2 * (d * d - d)
                         + u1 * u2 * (-2 * d * d - 2 * d + 4)
                         + u1 * u1 * (2 + 3 * d + d * d)) / den)
    return np.array([h1, h2])


def dual_ode_rhs(d: float, c1c2: float) -> Callable[[float, Array], Array]:
    """First-order form of ``z(z-1)^2 f'' + f'(z^2 - z - d(z-1)^2) + C1C2 f = 0``."""

    def rhs(z: float, y: Array) -> Array:
        f, fp = y
        w = z - 1.0
        fpp = -(fp * (z * z - z - d * w * w) + c1c2 * f) / (z * w * w)
        return np.array([fp, fpp])

    return rhs


@dataclass(frozen=True)
class DualOdeSolution:
    """Dense solution of the dual ODE on ``[z_lo, z_hi]``."""

    sol: Callable[[float], Array]
    z_lo: float
    z_hi: float

    def __call__(self, z: float) -> Array:
        if not (self.z_lo <= z <= self.z_hi):
            raise DomainError(f"z={z:g} outside the solved range [{self.z_lo:g}, {self.z_hi:g}]")
        return self.sol(z)


def solve_dual_ode(
    d: float,
    c1c2: float,
    z0: float,
    f0: float,
    fp0: float,
    z_span: tuple[float, float] = (0.05, 0.95),
    pole_guard: float = 1e-3,
    rtol: float = 1e-12,
    atol: float = 1e-13,
) -> DualOdeSolution:
    """Integrate the dual ODE both ways from ``z0`` with DOP853.

    Raises:
        PoleError: If the span reaches within ``pole_guard`` of ``z = 0`` or ``z = 1``.
    """
    lo, hi = z_span
    for pole in (0.0, 1.0):
        for zz in (lo, hi, z0):
            if abs(zz - pole) < pole_guard:
                raise PoleError(pole, zz, pole_guard)
        if lo < pole < hi:
            raise PoleError(pole, pole, pole_guard)
    rhs = dual_ode_rhs(d, c1c2)
    pieces = []
    for end in (lo, hi):
        if end == z0:
            continue
        r = solve_ivp(rhs, (z0, end), [f0, fp0], method="DOP853", rtol=rtol,
                      atol=atol, dense_output=True)
        if not r.success:
            raise DomainError(f"dual ODE integration failed: {r.message}")
        pieces.append((min(z0, end), max(z0, end), r.sol))

    def sol(z: float) -> Array:
        for a_, b_, s in pieces:
            if a_ <= z <= b_:
                return s(z)
        return np.array([f0, fp0])

    return DualOdeSolution(sol, lo, hi)


def n2_dual_lame(
    model: N2Model,
    d: float,
    mode: str = "special",
    a: float | None = None,
    b: float | None = None,
    z0: float = 0.5,
    f0: float | None = None,
    fp0: float | None = None,
    z_span: tuple[float, float] = (0.05, 0.95),
) -> LameField:
    """Dual Lamé field ``E(H) = +dH`` of an n = 2 model.

    Args:
        model: Model with the constants ``C1, C2``.
        d: Homogeneity degree.
        mode: ``"special"`` for the explicit solution (requires ``C1 = 1``,
            ``C2 = -4``) or ``"ode"`` for numerical integration in
            ``z = u^2 / u^1``.
        a, b: Constants of the special solution; default to the model's.
        z0, f0, fp0: Initial data for ``"ode"`` mode. When omitted and the
            model is the special one, they are taken from the closed form.
        z_span: Range of ``z`` covered by the ODE solution.

    The field is tagged with ``degree_sign = +1`` since ``H1 = f(z) (u^1)^d``.
    """
    a = model.a if a is None else a
    b = model.b if b is None else b
    special = model.C1 == 1 and model.C2 == -4
    if mode == "special":
        if not special:
            raise InvalidModelError("special mode needs C1 = 1 and C2 = -4")

        def func(u: Array) -> Array:
            return special_dual_lame(u, d, a, b)

    elif mode == "ode":
        if model.C1 == 0:
            raise InvalidModelError("the dual ODE needs C1 != 0")
        if f0 is None or fp0 is None:
            if not special:
                raise InvalidModelError("ode mode needs initial data (f0, fp0)")
            f0, fp0 = special_dual_f(z0, d, a, b)
        sol = solve_dual_ode(d, model.C1 * model.C2, z0, f0, fp0, z_span)

        def func(u: Array) -> Array:
            u1, u2 = float(u[0]), float(u[1])
            if u1 == 0:
                raise DomainError("u^1 = 0")
            f, fp = sol(u2 / u1)
            scale = u1**d
            return np.array([f * scale, scale * (1.0 - u2 / u1) * fp / model.C1])

    else:
        raise ValueError(f"unknown mode {mode!r}")
    return LameField(func, 2, degree=d, degree_sign=+1,
                     provenance=f"{model.provenance}/dual-{mode}(d={d:g})")


@dataclass(frozen=True)
class BiflatN2:
    """Bi-flat n = 2 data ``H_i = D_i (u^1 - u^2)^d`` with ``d^2 = -C1 C2``."""

    model: N2Model
    d: complex | float
    D1: complex | float
    D2: complex | float
    beta: RotationField
    lame: LameField

    def gamma_from_constants(self, u: Array) -> tuple[complex | float, complex | float]:
        """``(Gamma^1_12, Gamma^2_21) = ((D2/D1) C1, (D1/D2) C2) / (u^1 - u^2)``."""
        z = u[0] - u[1]
        return (self.D2 / self.D1 * self.model.C1 / z,
                self.D1 / self.D2 * self.model.C2 / z)

    def gamma_stated(self, u: Array) -> tuple[complex | float, complex | float]:
        """The closed forms ``(-d/(u^2-u^1), d/(u^2-u^1))`` as written for this family.

        They equal :meth:`gamma_from_constants` only after ``d -> -d``: from
        the constraints, ``(D2/D1) C1 = -d``, so
        ``Gamma^1_12 = -d/(u^1-u^2) = d/(u^2-u^1)``.
        """
        w = u[1] - u[0]
        return (-self.d / w, self.d / w)


def n2_biflat(
    model: N2Model,
    d: complex | float | None = None,
    D1: complex | float = 1.0,
    D2: complex | float | None = None,
    tol: float = 1e-12,
) -> BiflatN2:
    """Homogeneous Lamé solution shared by both connections of an n = 2 model.

    Args:
        model: n = 2 model with ``C1 != 0``.
        d: Degree; defaults to the principal root of ``-C1 C2``.
        D1: Scale of ``H1``.
        D2: Scale of ``H2``; defaults to ``-d D1 / C1``.
        tol: Tolerance for the constraints ``-C1 D2/D1 = C2 D1/D2 = d``.

    Raises:
        InvalidModelError: If the constraints fail beyond ``tol`` or ``C1 = 0``.
        DomainError: If ``-C1 C2 < 0`` outside complex mode.
    """
    if model.C1 == 0:
        raise InvalidModelError("the bi-flat family needs C1 != 0")
    if d is None:
        d = _sqrt(-model.C1 * model.C2, model.complex_mode, "-C1*C2")
    elif isinstance(d, complex) and d.imag != 0 and not model.complex_mode:
        raise DomainError("complex degree needs complex mode")
    if D2 is None:
        D2 = -d * D1 / model.C1
    if D1 == 0 or D2 == 0:
        raise InvalidModelError("D1 and D2 must be nonzero")
    r1 = abs(-model.C1 * D2 / D1 - d)
    r2 = abs(model.C2 * D1 / D2 - d)
    if max(r1, r2) > tol * max(1.0, abs(d)):
        raise InvalidModelError(
            f"bi-flat constraints violated: residuals {r1:.3g}, {r2:.3g}"
        )
    cplx = model.complex_mode or isinstance(d, complex)

    def lame(u: Array) -> Array:
        z = u[0] - u[1]
        if z == 0:
            raise DomainError("u^1 = u^2")
        if cplx:
            p = cmath.exp(d * cmath.log(z))
            return np.array([D1 * p, D2 * p], dtype=complex)
        if z < 0 and float(d) != int(d):
            raise DomainError("u^1 < u^2 with non-integer degree needs complex mode")
        p = z**d
        return np.array([D1 * p, D2 * p])

    def dlame(u: Array) -> Array:
        z = u[0] - u[1]
        g = d * lame(u) / z
        return np.stack([g, -g])

    field = LameField(lame, 2, degree=d, dfunc=dlame, degree_sign=+1,
                      provenance=f"{model.provenance}/biflat(d={d})")
    return BiflatN2(model, d, D1, D2, model.rotation_field(), field)
