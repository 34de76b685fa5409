"""The n = 3 reduction: six-ODE system, sigma form of Painlevé VI and its inverse.

The unknowns are ordered ``F = (F12, F13, F21, F23, F31, F32)`` and depend on
``z = (u^3 - u^1) / (u^2 - u^1)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import RK45, solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .darboux import RotationField
from .errors import (
    BranchError,
    DegenerateConstantsError,
    DomainError,
    DriftError,
    NumericError,
    PoleError,
)
from .numerics import adaptive_simpson

Array = np.ndarray

F_NAMES = ("F12", "F13", "F21", "F23", "F31", "F32")
CSV_HEADER = ("z",) + F_NAMES + ("mR2", "D", "sigma_res")
I12, I13, I21, I23, I31, I32 = range(6)

DEFAULT_POLE_GUARD = 1e-3


@dataclass(frozen=True)
class FState:
    """A point ``(z, F)`` of the six-dimensional system."""

    z: float
    F: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.F) != 6:
            raise ValueError("F must have six components")


def check_pole(z: float, guard: float = DEFAULT_POLE_GUARD) -> None:
    """Raise PoleError if ``z`` lies within ``guard`` of 0 or 1."""
    for pole in (0.0, 1.0):
        if abs(z - pole) < guard:
            raise PoleError(pole, z, guard)


def rhs(z: float, F: Sequence[float], pole_guard: float = DEFAULT_POLE_GUARD) -> Array:
    """Right-hand side of the six-ODE system.

    Raises:
        PoleError: Within ``pole_guard`` of ``z = 0`` or ``z = 1``.
    """
    check_pole(z, pole_guard)
    f12, f13, f21, f23, f31, f32 = F
    w = z - 1.0
    return np.array([
        f13 * f32 / (z * w),
        -f12 * f23 / w,
        f23 * f31 / (z * w),
        f21 * f13 / z,
        -f32 * f21 / w,
        f31 * f12 / z,
    ])


def rhs_state(s: FState, pole_guard: float = DEFAULT_POLE_GUARD) -> Array:
    return rhs(s.z, s.F, pole_guard)


def invariants(F: Sequence[float] | Array) -> tuple[Array | float, Array | float]:
    """Conserved quantities ``(-R^2, D)``; accepts one state or an ``(N, 6)`` array."""
    F = np.asarray(F)
    f12, f13, f21, f23, f31, f32 = np.moveaxis(F, -1, 0)
    minus_r2 = f12 * f21 + f13 * f31 + f23 * f32
    d = f23 * f31 * f12 - f13 * f32 * f21
    if F.ndim == 1:
        return float(minus_r2), float(d)
    return minus_r2, d


def swap(F: Sequence[float]) -> Array:
    """The involution ``F_ij <-> F_ji``."""
    f12, f13, f21, f23, f31, f32 = F
    return np.array([f21, f31, f12, f32, f13, f23])


# --------------------------------------------------------------------------
# integration
# --------------------------------------------------------------------------


@dataclass
class TrajectoryN3:
    """Samples of a trajectory on a strictly increasing ``z`` grid."""

    z: Array
    F: Array
    minusR2: Array
    D: Array
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if np.any(np.diff(self.z) <= 0):
            raise ValueError("z grid must be strictly increasing")
        dF = np.array([rhs(zz, ff, 0.0) for zz, ff in zip(self.z, self.F)])
        self._spline = CubicHermiteSpline(self.z, self.F, dF, axis=0)

    @property
    def reference(self) -> tuple[float, float]:
        """Invariants ``(-R^2, D)`` at the initial state."""
        return self.meta["minusR2_0"], self.meta["D_0"]

    @property
    def z_range(self) -> tuple[float, float]:
        return float(self.z[0]), float(self.z[-1])

    def __call__(self, z: float | Array) -> Array:
        lo, hi = self.z_range
        zz = np.asarray(z, dtype=float)
        if np.any(zz < lo - 1e-14) or np.any(zz > hi + 1e-14):
            raise DomainError(f"z={z} outside trajectory range [{lo:g}, {hi:g}]")
        return self._spline(zz)

    def drift(self) -> tuple[float, float]:
        m0, d0 = self.reference
        return float(np.max(np.abs(self.minusR2 - m0))), float(np.max(np.abs(self.D - d0)))


def _check_span(z0: float, z1: float, guard: float) -> None:
    lo, hi = min(z0, z1), max(z0, z1)
    for pole in (0.0, 1.0):
        dist = 0.0 if lo <= pole <= hi else min(abs(lo - pole), abs(hi - pole))
        if dist < guard:
            raise PoleError(pole, z1 if abs(z1 - pole) < abs(z0 - pole) else z0, guard)


def _integrate_leg(
    z0: float, F0: Array, z1: float, rtol: float, atol: float, max_drift: float,
    pole_guard: float, dz_out: float,
) -> tuple[Array, Array, int]:
    """One monotone leg; returns resampled grid (in travel order), states, step count."""
    m0, d0 = invariants(F0)
    solver = RK45(lambda t, y: rhs(t, y, pole_guard), z0, np.asarray(F0, dtype=float),
                  z1, rtol=rtol, atol=atol, max_step=dz_out)
    npts = max(2, int(math.ceil(abs(z1 - z0) / dz_out)) + 1)
    grid = np.linspace(z0, z1, npts)
    out = np.empty((npts, 6))
    out[0] = F0
    k = 1
    steps = 0
    direction = 1.0 if z1 > z0 else -1.0
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise NumericError(f"integration failed at z={solver.t:.6g}: {msg}")
        steps += 1
        m, d = invariants(solver.y)
        drift = max(abs(m - m0), abs(d - d0))
        if drift > max_drift:
            raise DriftError(
                f"invariant drift {drift:.3g} exceeds {max_drift:.3g} "
                f"(-R^2 {m:.12g} vs {m0:.12g}, D {d:.12g} vs {d0:.12g})",
                z=solver.t, drift=drift,
            )
        dense = solver.dense_output()
        while k < npts and direction * (grid[k] - solver.t) <= 0:
            out[k] = dense(grid[k])
            k += 1
    out[-1] = solver.y
    return grid, out, steps


def integrate(
    s0: FState,
    z1: float,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    max_drift: float = 1e-9,
    pole_guard: float = DEFAULT_POLE_GUARD,
    dz_out: float = 1e-3,
) -> TrajectoryN3:
    """Integrate from ``s0`` to ``z1`` with a Dormand-Prince 5(4) pair.

    The invariants are evaluated after every accepted step and the run aborts
    when either drifts by more than ``max_drift``. Steps are capped at
    ``dz_out`` and the solution is resampled to a uniform grid of that spacing
    using the dense output, so interpolation never spans a long step.

    Raises:
        PoleError: If ``[z0, z1]`` comes within ``pole_guard`` of a pole.
        DriftError: If the conserved quantities drift beyond ``max_drift``.
        NumericError: If the step size underflows.
    """
    return integrate_span(s0, (min(s0.z, z1), max(s0.z, z1)), rtol, atol, max_drift,
                          pole_guard, dz_out)


def integrate_span(
    s0: FState,
    span: tuple[float, float],
    rtol: float = 1e-10,
    atol: float = 1e-10,
    max_drift: float = 1e-9,
    pole_guard: float = DEFAULT_POLE_GUARD,
    dz_out: float = 1e-3,
) -> TrajectoryN3:
    """Integrate from ``s0.z`` to both ends of ``span`` (which must contain it)."""
    lo, hi = span
    z0 = float(s0.z)
    if not lo <= z0 <= hi or lo == hi:
        raise DomainError(f"span [{lo:g}, {hi:g}] must contain z0={z0:g} and be non-empty")
    _check_span(lo, hi, pole_guard)
    F0 = np.asarray(s0.F, dtype=float)
    zs, Fs, steps = [np.array([z0])], [F0[None, :]], 0
    if lo < z0:
        g, o, n = _integrate_leg(z0, F0, lo, rtol, atol, max_drift, pole_guard, dz_out)
        zs.insert(0, g[1:][::-1])
        Fs.insert(0, o[1:][::-1])
        steps += n
    if hi > z0:
        g, o, n = _integrate_leg(z0, F0, hi, rtol, atol, max_drift, pole_guard, dz_out)
        zs.append(g[1:])
        Fs.append(o[1:])
        steps += n
    z = np.concatenate(zs)
    F = np.concatenate(Fs)
    m, d = invariants(F)
    m0, d0 = invariants(F0)
    meta = {
        "method": "RK45 (Dormand-Prince 5(4))",
        "rtol": rtol,
        "atol": atol,
        "max_drift": max_drift,
        "pole_guard": pole_guard,
        "dz_out": dz_out,
        "steps": steps,
        "z0": z0,
        "F0": F0.tolist(),
        "minusR2_0": m0,
        "D_0": d0,
    }
    traj = TrajectoryN3(z, F, m, d, meta)
    meta["drift_minusR2"], meta["drift_D"] = traj.drift()
    return traj


# --------------------------------------------------------------------------
# rotation coefficients
# --------------------------------------------------------------------------


def z_of_u(u: Sequence[float]) -> float:
    u1, u2, u3 = (float(x) for x in u)
    if u1 == u2:
        raise DomainError("u^1 = u^2")
    return (u3 - u1) / (u2 - u1)


def beta_from_F(traj: TrajectoryN3 | Callable[[float], Array], u: Sequence[float]) -> Array:
    """Rotation coefficients ``B[i, j]`` at ``u`` from a trajectory.

    Raises:
        DomainError: On coordinate collisions or when ``z(u)`` is outside the
            trajectory range.
    """
    u1, u2, u3 = (float(x) for x in u)
    if u1 == u2 or u2 == u3 or u1 == u3:
        raise DomainError(f"coordinate collision at u={list(u)}")
    f12, f13, f21, f23, f31, f32 = traj(z_of_u(u))
    a, b, c = u2 - u1, u3 - u2, u3 - u1
    return np.array([
        [0.0, f12 / a, f13 / c],
        [f21 / a, 0.0, f23 / b],
        [f31 / c, f32 / b, 0.0],
    ])


def rotation_field_from_trajectory(traj: TrajectoryN3, tag: str = "trajectory") -> RotationField:
    """A rotation field (FD partials) backed by an interpolated trajectory."""
    return RotationField(lambda u: beta_from_F(traj, u), 3, provenance=tag)


# --------------------------------------------------------------------------
# sigma form
# --------------------------------------------------------------------------


@dataclass
class SigmaData:
    """``f`` data along a trajectory with the constants of the sigma form."""

    z: Array
    f: Array
    fp: Array
    fpp: Array
    R2: float
    D: float
    consistency: float = 0.0

    @property
    def parameters(self) -> "PainleveParameters":
        return painleve_parameters(self.R2, self.D)


def sigma_values(z: Array | float, F: Array, R2: float) -> tuple[Array, Array, Array]:
    """``(f, f', f'')`` from the defining relations at given states."""
    F = np.asarray(F)
    f12, f13, f21, f23, f31, f32 = np.moveaxis(F, -1, 0)
    fp = f12 * f21
    f = z * fp + f13 * f31 + R2
    fpp = (f23 * f31 * f12 + f13 * f32 * f21) / (z * (z - 1.0))
    return f, fp, fpp


def sigma_data_from_F(traj: TrajectoryN3, pole_guard: float = DEFAULT_POLE_GUARD) -> SigmaData:
    """Forward map ``F -> f``.

    ``f' = F12 F21``, ``f = z f' + F13 F31 + R^2`` and
    ``z(z-1) f'' = F23 F31 F12 + F13 F32 F21``, with the reference invariants
    of the trajectory. ``consistency`` is ``max |F23 F32 + f - (z-1) f'|``.
    """
    for zz in (traj.z[0], traj.z[-1]):
        check_pole(zz, pole_guard)
    m0, d0 = traj.reference
    R2 = -m0
    f, fp, fpp = sigma_values(traj.z, traj.F, R2)
    cons = np.max(np.abs(traj.F[:, I23] * traj.F[:, I32] + f - (traj.z - 1.0) * fp))
    return SigmaData(traj.z.copy(), f, fp, fpp, R2, d0, float(cons))


def sigma_residual(
    z: Array | float, f: Array | float, fp: Array | float, fpp: Array | float,
    R2: float, D: float,
) -> Array | float:
    """Absolute residual of the sigma form
    ``z^2(z-1)^2 f''^2 + 4[f' w^2 - f'^2 w] + 4R^2 f' w - 4R^2 f'^2 - D^2`` with ``w = z f' - f``."""
    w = z * fp - f
    val = (z * z * (z - 1.0) ** 2 * fpp**2 + 4.0 * (fp * w * w - fp * fp * w)
           + 4.0 * R2 * fp * w - 4.0 * R2 * fp * fp - D * D)
    return np.abs(val)


def sigma_residual_data(sd: SigmaData) -> Array:
    return sigma_residual(sd.z, sd.f, sd.fp, sd.fpp, sd.R2, sd.D)


def sigma_third_order_rhs(R2: float) -> Callable[[float, Array], Array]:
    """Derivative of the sigma form divided by ``2 f''``, solved for ``f'''``.

    The sigma form is a first integral of this third-order equation, so
    integrating it from consistent initial data gives a solution of the
    sigma form without using the six-ODE system.
    """

    def fun(z: float, y: Array) -> Array:
        f, fp, fpp = y
        w = z * fp - f
        zz = z * (z - 1.0)
        num = (zz * (2.0 * z - 1.0) * fpp
               + 2.0 * (w * w + 2.0 * z * fp * w - 2.0 * fp * w - z * fp * fp)
               + 2.0 * R2 * (w + z * fp) - 4.0 * R2 * fp)
        return np.array([fp, fpp, -num / (zz * zz)])

    return fun


@dataclass(frozen=True)
class SigmaSolution:
    """Dense solution ``z -> (f, f', f'')`` of the sigma form."""

    sol: Callable[[float], Array]
    z_lo: float
    z_hi: float
    R2: float
    D: float

    def __call__(self, z: float | Array) -> Array:
        return self.sol(z)


def solve_sigma(
    z0: float, f0: float, fp0: float, fpp0: float, R2: float, D: float,
    span: tuple[float, float], pole_guard: float = DEFAULT_POLE_GUARD,
    rtol: float = 1e-13, atol: float = 1e-14,
) -> SigmaSolution:
    """Integrate the sigma form (through its third-order derivative) over ``span``."""
    lo, hi = span
    _check_span(lo, hi, pole_guard)
    fun = sigma_third_order_rhs(R2)
    y0 = np.array([f0, fp0, fpp0], dtype=float)
    legs = []
    for end in (lo, hi):
        if end == z0:
            continue
        r = solve_ivp(fun, (z0, end), y0, method="DOP853", rtol=rtol, atol=atol,
                      dense_output=True)
        if not r.success:
            raise NumericError(f"sigma-form integration failed: {r.message}")
        legs.append((min(z0, end), max(z0, end), r.sol))

    def sol(z: float | Array) -> Array:
        zz = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty((zz.size, 3))
        for idx, t in enumerate(zz):
            if t < lo - 1e-14 or t > hi + 1e-14:
                raise DomainError(f"z={t:g} outside the solved span")
            out[idx] = y0
            for a, b, s in legs:
                if a <= t <= b:
                    out[idx] = s(t)
                    break
        return out[0] if np.ndim(z) == 0 else out

    return SigmaSolution(sol, lo, hi, R2, D)


# --------------------------------------------------------------------------
# inverse map
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReconstructionConstants:
    """Data fixing one solution of the six-ODE system from a sigma solution.

    Attributes:
        z0: Base point.
        f0, fp0, fpp0: ``(f, f', f'')`` at ``z0``.
        R2, D: Constants of the sigma form.
        A, B: Free constants (``C21 = A``, ``C31 = B``).
        signs: Branch signs ``(s1, s2, s3)`` multiplying the principal roots of
            ``f'``, ``f - z f' - R^2`` and ``(z-1) f' - f``.
        complex_mode: Use complex logarithms and roots.
    """

    z0: float
    f0: float
    fp0: float
    fpp0: float
    R2: float
    D: float
    A: complex
    B: complex
    signs: tuple[int, int, int] = (1, 1, 1)
    complex_mode: bool = False

    def radicands(self, z: float, f: float, fp: float) -> tuple[float, float, float]:
        return fp, f - z * fp - self.R2, (z - 1.0) * fp - f

    def roots0(self) -> tuple[complex, complex, complex]:
        r = self.radicands(self.z0, self.f0, self.fp0)
        return tuple(s * cmath.sqrt(x) for s, x in zip(self.signs, r))  # type: ignore

    @property
    def products0(self) -> tuple[float, float]:
        """``(z0(z0-1) f''(z0) - D, z0(z0-1) f''(z0) + D)``."""
        q = self.z0 * (self.z0 - 1.0) * self.fpp0
        return q - self.D, q + self.D

    def validate(self) -> None:
        """Check the real-mode requirements.

        Raises:
            DegenerateConstantsError: If ``alpha`` or ``beta`` would take the
                logarithm of a non-positive number, or ``gamma`` of zero.
            BranchError: If a radicand is negative or the signs are inconsistent.
        """
        a, b = self.products0
        r = self.radicands(self.z0, self.f0, self.fp0)
        if min(abs(a), abs(b)) == 0.0 or min(abs(x) for x in r) == 0.0:
            raise DegenerateConstantsError("alpha, beta or gamma is the log of zero")
        if self.complex_mode:
            return
        if a <= 0 or b <= 0:
            raise DegenerateConstantsError(
                f"alpha/beta undefined in real mode: z0(z0-1)f''0 -+ D = {a:.6g}, {b:.6g}"
            )
        if min(r) <= 0:
            raise BranchError(f"negative radicand at z0 in real mode: {r}")
        if self.signs[0] * self.signs[1] * self.signs[2] != 1:
            raise BranchError("real mode needs s1*s2*s3 = 1")

    @property
    def alpha(self) -> complex:
        return cmath.log(self.products0[0])

    @property
    def beta(self) -> complex:
        return cmath.log(self.products0[1])

    @property
    def gamma(self) -> complex:
        q1, q2, q3 = self.roots0()
        return cmath.log(2.0) + cmath.log(q1) + cmath.log(q2) + cmath.log(q3)

    def C(self) -> dict[str, complex]:
        """The six integration constants."""
        A, B = self.A, self.B
        al, be, ga = self.alpha, self.beta, self.gamma
        return {
            "C12": -A + al + be - 2 * ga,
            "C13": -B + al + be - 2 * ga,
            "C21": A,
            "C23": A - B + be - ga,
            "C31": B,
            "C32": B - A + al - ga,
        }


def _cumulative_quadrature(
    integrand: Callable[[float], Array], grid: Array, z0: float, tol: float
) -> Array:
    """Integrals ``int_{z0}^{z_k}`` for every node of ``grid`` (which contains ``z0``)."""
    k0 = int(np.argmin(np.abs(grid - z0)))
    if abs(grid[k0] - z0) > 1e-14:
        raise ValueError("grid must contain z0")
    dim = np.asarray(integrand(z0)).shape
    out = np.zeros((grid.size,) + dim, dtype=complex)
    acc = np.zeros(dim, dtype=complex)
    for k in range(k0 + 1, grid.size):
        acc = acc + adaptive_simpson(integrand, grid[k - 1], grid[k], tol)
        out[k] = acc
    acc = np.zeros(dim, dtype=complex)
    for k in range(k0 - 1, -1, -1):
        acc = acc - adaptive_simpson(integrand, grid[k], grid[k + 1], tol)
        out[k] = acc
    return out


def reconstruct_F(
    rc: ReconstructionConstants,
    f_solver: Callable[[float], Array],
    grid: Sequence[float],
    quad_tol: float = 1e-11,
) -> TrajectoryN3:
    """Inverse map ``f -> F`` by square roots and exponentials of quadratures.

    Args:
        rc: Reconstruction constants.
        f_solver: ``z -> (f, f', f'')`` of a sigma-form solution.
        grid: Increasing grid containing ``rc.z0``.
        quad_tol: Adaptive Simpson tolerance per grid interval.

    Raises:
        BranchError: If a radicand changes sign on the grid outside complex mode.
        DegenerateConstantsError: If ``alpha`` or ``beta`` is undefined.
    """
    rc.validate()
    grid = np.asarray(grid, dtype=float)
    D, R2 = rc.D, rc.R2

    def radicands(t: float) -> tuple[float, float, float]:
        f, fp, _ = f_solver(t)
        return rc.radicands(t, f, fp)

    samples = np.array([radicands(t) for t in grid])
    ref = np.array(rc.radicands(rc.z0, rc.f0, rc.fp0))
    if np.any(samples * np.sign(ref)[None, :] <= 0):
        raise BranchError("a radicand changes sign on the reconstruction range")

    def integrand(t: float) -> Array:
        r1, r2, r3 = radicands(t)
        return np.array([
            D / (2.0 * t * (t - 1.0) * r1),
            D / (2.0 * (t - 1.0) * r2),
            D / (2.0 * t * r3),
        ])

    quad = _cumulative_quadrature(integrand, grid, rc.z0, quad_tol)
    C = rc.C()
    s1, s2, s3 = rc.signs
    F = np.empty((grid.size, 6), dtype=complex)
    for k, t in enumerate(grid):
        r1, r2, r3 = samples[k]
        q1 = s1 * cmath.sqrt(r1)
        q2 = s2 * cmath.sqrt(r2)
        q3 = s3 * cmath.sqrt(r3)
        i12, i13, i23 = quad[k]
        F[k, I12] = q1 * cmath.exp(-i12 + C["C12"])
        F[k, I21] = q1 * cmath.exp(i12 + C["C21"])
        F[k, I13] = q2 * cmath.exp(-i13 + C["C13"])
        F[k, I31] = q2 * cmath.exp(i13 + C["C31"])
        F[k, I23] = q3 * cmath.exp(-i23 + C["C23"])
        F[k, I32] = q3 * cmath.exp(i23 + C["C32"])
    imag = float(np.max(np.abs(F.imag)))
    Fr = F.real
    m, d = invariants(Fr)
    meta = {
        "method": "quadrature reconstruction",
        "z0": rc.z0,
        "minusR2_0": -R2,
        "D_0": D,
        "max_imag": imag,
        "complex_mode": rc.complex_mode,
    }
    return TrajectoryN3(grid.copy(), Fr, m, d, meta)


def constants_from_state(
    z0: float,
    F0: Sequence[float],
    sigma0: tuple[float, float, float],
    R2: float,
    D: float,
    complex_mode: bool | None = None,
) -> tuple[ReconstructionConstants, dict[str, float]]:
    """Solve ``(A, B)`` from ``F21(z0)`` and ``F31(z0)``.

    Args:
        z0: Base point.
        F0: State at ``z0``.
        sigma0: ``(f, f', f'')`` at ``z0``.
        R2, D: Sigma-form constants.
        complex_mode: Force complex mode on or off; ``None`` selects real mode
            whenever its requirements are met.

    Returns:
        The constants and the residuals ``|F_ij(z0) - F_ij^rec(z0)|`` of the
        four components not used to fix ``(A, B)``.
    """
    F0 = np.asarray(F0, dtype=float)
    f0, fp0, fpp0 = (float(x) for x in sigma0)
    signs = tuple(int(np.sign(F0[k])) or 1 for k in (I21, I31, I32))
    trial = ReconstructionConstants(z0, f0, fp0, fpp0, R2, D, 0.0, 0.0, signs, False)
    if complex_mode is None:
        try:
            trial.validate()
            complex_mode = False
        except (BranchError, DegenerateConstantsError):
            complex_mode = True
    if complex_mode:
        signs = (1, 1, 1)
    base = ReconstructionConstants(z0, f0, fp0, fpp0, R2, D, 0.0, 0.0, signs, complex_mode)
    q1, q2, _ = base.roots0()
    A = cmath.log(F0[I21] / q1)
    B = cmath.log(F0[I31] / q2)
    if not complex_mode:
        A, B = A.real, B.real
    rc = ReconstructionConstants(z0, f0, fp0, fpp0, R2, D, A, B, signs, complex_mode)
    rc.validate()
    C = rc.C()
    q1, q2, q3 = rc.roots0()
    pred = {
        "F12": q1 * cmath.exp(C["C12"]),
        "F13": q2 * cmath.exp(C["C13"]),
        "F23": q3 * cmath.exp(C["C23"]),
        "F32": q3 * cmath.exp(C["C32"]),
    }
    idx = {"F12": I12, "F13": I13, "F23": I23, "F32": I32}
    resid = {k: float(abs(v - F0[idx[k]])) for k, v in pred.items()}
    return rc, resid


def round_trip(
    traj: TrajectoryN3,
    z0: float | None = None,
    quad_tol: float = 1e-11,
    complex_mode: bool | None = None,
) -> tuple[TrajectoryN3, dict[str, float]]:
    """``F -> f -> F`` on the grid of ``traj`` using the independent sigma solver."""
    z0 = traj.meta["z0"] if z0 is None else z0
    m0, d0 = traj.reference
    R2 = -m0
    F0 = traj(z0)
    sig0 = sigma_values(z0, F0, R2)
    sol = solve_sigma(z0, *sig0, R2, d0, traj.z_range)
    rc, resid = constants_from_state(z0, F0, sig0, R2, d0, complex_mode)
    rec = reconstruct_F(rc, sol, traj.z, quad_tol)
    resid["sup_error"] = float(np.max(np.abs(rec.F - traj.F)))
    return rec, resid


# --------------------------------------------------------------------------
# parameters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PainleveParameters:
    """Roots ``v_k^2`` of ``x^3 - 2R^2 x^2 + R^4 x - D^2`` with Vieta residuals."""

    roots: Array
    vieta: tuple[float, float, float]
    back_substitution: float


def painleve_parameters(R2: float, D: float, polish: int = 3) -> PainleveParameters:
    """Roots of the parameter cubic by companion-matrix eigenvalues.

    ``D = 0`` is deflated exactly to ``{0, R^2, R^2}``; otherwise the
    eigenvalues are refined by a few Newton steps that are kept only when they
    reduce the polynomial residual.
    """
    coeffs = np.array([1.0, -2.0 * R2, R2 * R2, -D * D])

    def poly(x: complex) -> complex:
        return ((x - 2.0 * R2) * x + R2 * R2) * x - D * D

    def dpoly(x: complex) -> complex:
        return (3.0 * x - 4.0 * R2) * x + R2 * R2

    if D == 0:
        roots = np.array([0.0, R2, R2], dtype=complex)
    else:
        companion = np.zeros((3, 3))
        companion[0, :] = -coeffs[1:]
        companion[1, 0] = companion[2, 1] = 1.0
        roots = np.linalg.eigvals(companion).astype(complex)
        for k in range(3):
            x = roots[k]
            for _ in range(polish):
                dp = dpoly(x)
                if dp == 0:
                    break
                nx = x - poly(x) / dp
                if abs(poly(nx)) < abs(poly(x)):
                    x = nx
                else:
                    break
            roots[k] = x
    roots = np.sort_complex(roots)
    s1 = roots.sum()
    s2 = roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2]
    s3 = roots.prod()
    vieta = (float(abs(s1 - 2 * R2)), float(abs(s2 - R2 * R2)), float(abs(s3 - D * D)))
    back = float(max(abs(poly(x)) for x in roots))
    return PainleveParameters(roots, vieta, back)


# --------------------------------------------------------------------------
# tabular output
# --------------------------------------------------------------------------


def trajectory_rows(traj: TrajectoryN3) -> list[list[float]]:
    """Rows ``z, F12..F32, mR2, D, sigma_res`` (sigma residual per sample)."""
    m0, d0 = traj.reference
    f, fp, fpp = sigma_values(traj.z, traj.F, -m0)
    res = sigma_residual(traj.z, f, fp, fpp, -m0, d0)
    return [
        [float(traj.z[k]), *map(float, traj.F[k]), float(traj.minusR2[k]),
         float(traj.D[k]), float(res[k])]
        for k in range(traj.z.size)
    ]
