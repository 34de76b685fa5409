"""Low-level numerical kernels: finite differences, quadrature, path integration."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

ArrayFunc = Callable[[np.ndarray], np.ndarray]

# relative base step and cap as a fraction of the local length scale
FD_BASE_STEP = 1e-4
FD_SCALE_FRACTION = 5e-3


def min_gap(u: np.ndarray) -> float:
    """Smallest pairwise distance between coordinates."""
    u = np.asarray(u, dtype=float)
    if u.size < 2:
        return np.inf
    s = np.sort(u)
    return float(np.min(np.diff(s)))


def length_scale(u: np.ndarray, nonzero: bool = False) -> float:
    g = min_gap(u)
    if nonzero:
        g = min(g, float(np.min(np.abs(u))))
    return g


def default_step(u: np.ndarray, nonzero: bool = False) -> float:
    """Finite-difference step for a point in canonical coordinates.

    The base step ``1e-4 * max(1, |u|_inf)`` is capped at a small fraction of
    the distance to the nearest coordinate collision (and of ``min |u^i|`` when
    ``nonzero`` is set), since the fields scale like inverse powers of those
    distances.
    """
    u = np.asarray(u, dtype=float)
    h = FD_BASE_STEP * max(1.0, float(np.max(np.abs(u))))
    g = length_scale(u, nonzero)
    if np.isfinite(g):
        h = min(h, FD_SCALE_FRACTION * g)
    return h


def check_stencil(u: np.ndarray, h: float, nonzero: bool = False) -> None:
    """Raise DomainError if the FD stencil of reach ``2h`` can approach a collision."""
    reach = 2.0 * h
    g = min_gap(u)
    if not g > 2.0 * reach:
        raise DomainError(
            f"finite-difference stencil (reach {reach:.3g}) approaches a coordinate "
            f"collision: min gap {g:.3g}"
        )
    if nonzero and not np.min(np.abs(u)) > 2.0 * reach:
        raise DomainError(
            f"finite-difference stencil (reach {reach:.3g}) approaches u^i = 0"
        )


def _central4(func: ArrayFunc, u: np.ndarray, m: int, h: float) -> np.ndarray:
    e = np.zeros_like(u)
    e[m] = h
    return (func(u - 2 * e) - 8 * func(u - e) + 8 * func(u + e) - func(u + 2 * e)) / (
        12.0 * h
    )


def partials(
    func: ArrayFunc,
    u: Sequence[float],
    h: float | None = None,
    *,
    nonzero: bool = False,
    guard: bool = True,
) -> np.ndarray:
    """All first partial derivatives of an array-valued function.

    Uses the 4th-order central stencil at steps ``h`` and ``h/2`` combined by one
    Richardson level. The result has shape ``(n, *func(u).shape)`` with the
    differentiation index first.
    """
    u = np.asarray(u, dtype=float)
    if h is None:
        h = default_step(u, nonzero)
    if guard:
        check_stencil(u, h, nonzero)
    out = []
    for m in range(u.size):
        coarse = _central4(func, u, m, h)
        fine = _central4(func, u, m, 0.5 * h)
        out.append((16.0 * fine - coarse) / 15.0)
    return np.stack(out)


def adaptive_simpson(
    f: Callable[[float], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-11,
    max_depth: int = 40,
) -> np.ndarray:
    """Adaptive Simpson quadrature of a (possibly vector-valued) integrand."""
    fa, fb = np.asarray(f(a)), np.asarray(f(b))
    m = 0.5 * (a + b)
    fm = np.asarray(f(m))
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    total = np.zeros_like(whole)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a_, b_, fa_, fm_, fb_, whole_, tol_, depth = stack.pop()
        m_ = 0.5 * (a_ + b_)
        lm, rm = 0.5 * (a_ + m_), 0.5 * (m_ + b_)
        flm, frm = np.asarray(f(lm)), np.asarray(f(rm))
        left = (m_ - a_) / 6.0 * (fa_ + 4 * flm + fm_)
        right = (b_ - m_) / 6.0 * (fm_ + 4 * frm + fb_)
        delta = left + right - whole_
        if depth >= max_depth or np.max(np.abs(delta)) <= 15.0 * tol_:
            total = total + left + right + delta / 15.0
        else:
            stack.append((a_, m_, fa_, flm, fm_, left, 0.5 * tol_, depth + 1))
            stack.append((m_, b_, fm_, frm, fb_, right, 0.5 * tol_, depth + 1))
    return total


PathRhs = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def integrate_path(
    rhs: PathRhs,
    y0: np.ndarray,
    waypoints: Sequence[Sequence[float]],
    steps: int = 200,
) -> np.ndarray:
    """Classical RK4 along a polyline in coordinate space.

    ``rhs(u, y, v)`` must return ``dy/ds`` at the point ``u`` where the path
    moves with constant velocity ``v`` (so ``dy/ds = sum_m v_m dy/du^m``). Each
    straight segment is parametrised by ``s`` in ``[0, 1]`` and integrated with
    ``steps`` equal steps.
    """
    pts = [np.asarray(w, dtype=float) for w in waypoints]
    y = np.array(y0, dtype=np.result_type(np.asarray(y0), float), copy=True)
    ds = 1.0 / steps
    for a, b in zip(pts[:-1], pts[1:]):
        v = b - a
        for k in range(steps):
            s = k * ds
            u = a + s * v
            k1 = rhs(u, y, v)
            k2 = rhs(u + 0.5 * ds * v, y + 0.5 * ds * k1, v)
            k3 = rhs(u + 0.5 * ds * v, y + 0.5 * ds * k2, v)
            k4 = rhs(u + ds * v, y + ds * k3, v)
            y = y + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y
