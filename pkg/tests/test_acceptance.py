"""Acceptance suite.

Each criterion prints one ``PASS``/``FAIL`` line (followed by indented
sub-check lines) and fails its test when any sub-check fails. Run directly
with ``python tests/test_acceptance.py`` or through pytest; in both cases the
summary lines are written to the terminal.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

import numpy as np
import pytest

from biflat.config import Tolerances
from biflat.darboux import (
    RotationField,
    build_natural_connection,
    de_residual_values,
    dual_connection,
    natural_connection,
    v_matrix,
)
from biflat.errors import BranchError
from biflat.geometry import ProductField, riemann_curvature
from biflat.hierarchy import (
    GridState,
    VectorFieldSample,
    commutator_study,
    euler_vector_field,
    recursion_field,
    recursion_step,
    symmetry_residual,
    unit_vector_field,
)
from biflat.models import (
    EpsilonModel,
    N2Model,
    epsilon_fields,
    n2_biflat,
    solve_dual_ode,
    special_dual_f,
)
from biflat.painleve import (
    FState,
    integrate_span,
    painleve_parameters,
    rotation_field_from_trajectory,
    round_trip,
    sigma_data_from_F,
    sigma_residual_data,
)
from biflat.suites import random_points, verify_biflat


@dataclass
class Criterion:
    number: int
    title: str
    lines: list[tuple[bool, str]] = field(default_factory=list)

    def check(self, ok: bool, text: str) -> bool:
        self.lines.append((bool(ok), text))
        return bool(ok)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.lines)

    def render(self) -> str:
        head = f"{'PASS' if self.passed else 'FAIL'} criterion {self.number}: {self.title}"
        body = [f"    {'ok  ' if ok else 'FAIL'} {text}" for ok, text in self.lines]
        return "\n".join([head, *body])


SUMMARY: dict[int, Criterion] = {}


def _emit(crit: Criterion) -> None:
    SUMMARY[crit.number] = crit
    print(crit.render(), flush=True)


@pytest.fixture(scope="module", autouse=True)
def _print_summary(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    if reporter is None:
        return
    reporter.write_line("")
    reporter.write_line("acceptance summary")
    for k in sorted(SUMMARY):
        reporter.write_line(SUMMARY[k].render())


# --------------------------------------------------------------------------
# 1. epsilon-system suite
# --------------------------------------------------------------------------


def criterion_1() -> Criterion:
    crit = Criterion(1, "epsilon-system bi-flat suite (n=3,4,5; eps=0.5,-0.25; 100 points)")
    limits = {
        "ED1": 1e-7, "ED2": 1e-7, "ED3": 1e-7, "L1": 1e-7, "L2": 1e-7, "L3": 1e-7,
        "riemann_natural": 1e-6, "riemann_dual": 1e-6,
        "parallel_e": 1e-10, "parallel_E": 1e-10,
        "almost_equivalence": 0.0,
        "hertling_manin_canonical": 1e-7, "hertling_manin_dual": 1e-7,
        "compat_natural": 1e-7, "compat_dual": 1e-7,
    }
    worst = dict.fromkeys(limits, 0.0)
    t0 = time.perf_counter()
    for n in (3, 4, 5):
        pts = random_points(n, 100, seed=7)
        for eps in (0.5, -0.25):
            beta, H = epsilon_fields(EpsilonModel(n, eps))
            res = verify_biflat(beta, H, pts, Tolerances(), checks=tuple(limits),
                                overrides=limits)
            for k in limits:
                worst[k] = max(worst[k], res.max(k))
    elapsed = time.perf_counter() - t0
    for k, lim in limits.items():
        if lim == 0.0:
            crit.check(worst[k] == 0.0, f"{k}: max {worst[k]:.3g} (must be exactly 0)")
        else:
            crit.check(worst[k] < lim, f"{k}: max {worst[k]:.3g} < {lim:g}")
    crit.check(elapsed < 30.0, f"runtime {elapsed:.1f} s < 30 s")
    return crit


# --------------------------------------------------------------------------
# 2. n = 2 exact values
# --------------------------------------------------------------------------


def criterion_2() -> Criterion:
    crit = Criterion(2, "n=2 exact values")
    u = np.array([3.0, 1.0])
    for c1, c2 in [(1.0, -4.0), (2.0, -0.5), (-3.0, 1.5), (0.7, 2.0)]:
        beta = N2Model(c1, c2).rotation_field()
        vm = v_matrix(beta, u)
        exact = np.array([[0.0, -c1], [c2, 0.0]])
        err_v = float(np.max(np.abs(vm.matrix - exact)))
        err_l = float(np.max(np.abs(vm.eigenvalues**2 + c1 * c2)))
        crit.check(err_v < 1e-14, f"V for (C1,C2)=({c1:g},{c2:g}): max error {err_v:.2g}")
        crit.check(err_l < 1e-10, f"lambda^2 = -C1C2 for ({c1:g},{c2:g}): max error {err_l:.2g}")
    lam = np.sort(v_matrix(N2Model(1.0, -4.0).rotation_field(), u).eigenvalues.real)
    crit.check(np.allclose(lam, [-2.0, 2.0], atol=1e-10),
               f"(C1,C2)=(1,-4) eigenvalues {lam.tolist()} = [-2, 2]")

    bf = n2_biflat(N2Model(1.0, -4.0))
    crit.check(abs(bf.d - 2.0) < 1e-15, f"bi-flat degree d = {bf.d:g}")
    err_stated = 0.0
    err_constants = 0.0
    detail = ""
    for p in ([3.0, 1.0], [2.5, -0.5], [-1.0, -2.0]):
        p = np.asarray(p)
        g = build_natural_connection(bf.beta, bf.lame, p)
        stated = -bf.d / (p[1] - p[0])
        err_stated = max(err_stated, abs(g[0, 0, 1] - stated))
        err_constants = max(err_constants, abs(g[0, 0, 1] - bf.gamma_from_constants(p)[0]))
        if not detail:
            detail = f" (built {g[0, 0, 1]:.6g} vs -d/(u2-u1) = {stated:.6g} at {p.tolist()})"
    crit.check(err_constants < 1e-12,
               f"Gamma^1_12 = (D2/D1) C1/(u1-u2): max error {err_constants:.2g}")
    crit.check(err_stated < 1e-12,
               f"Gamma^1_12 = -d/(u2-u1): max error {err_stated:.3g}{detail}")
    for name, conn in (("natural", natural_connection(bf.beta, bf.lame)),
                       ("dual", dual_connection(bf.beta, bf.lame))):
        r = float(np.max(np.abs(riemann_curvature(conn, u))))
        crit.check(r < 1e-7, f"bi-flat {name} connection flat: max|R| {r:.2g} < 1e-7")

    worst = 0.0
    for d in (1.0, 1.5, 2.0):
        for a, b in ((1.0, 0.0), (0.0, 1.0), (0.7, -0.3)):
            f0, fp0 = special_dual_f(0.5, d, a, b)
            sol = solve_dual_ode(d, -4.0, 0.5, f0, fp0, (0.1, 0.9))
            for z in np.linspace(0.1, 0.9, 81):
                worst = max(worst, float(np.max(np.abs(sol(z) - special_dual_f(z, d, a, b)))))
    crit.check(worst < 1e-8, f"special closed form vs ODE on [0.1, 0.9]: max {worst:.2g} < 1e-8")
    return crit


# --------------------------------------------------------------------------
# 3. Painleve pipeline
# --------------------------------------------------------------------------


def sample_trajectories(count: int, seed: int, z0: float = 0.5, span=(0.4, 0.6)):
    """Seeded draws of ``F0`` in ``[-1, 1]^6`` whose inverse map is defined on ``span``.

    Draws for which a square-root radicand of the inverse map changes sign
    inside the span are rejected; the number of rejections is returned.
    """
    rng = np.random.default_rng(seed)
    out, rejected = [], 0
    while len(out) < count:
        F0 = rng.uniform(-1.0, 1.0, 6)
        traj = integrate_span(FState(z0, tuple(F0)), span)
        try:
            rec, resid = round_trip(traj)
        except BranchError:
            rejected += 1
            continue
        out.append((traj, rec, resid))
    return out, rejected


def criterion_3() -> Criterion:
    crit = Criterion(3, "Painleve pipeline (20 trajectories on [0.4, 0.6])")
    t0 = time.perf_counter()
    runs, rejected = sample_trajectories(20, seed=2024)
    drift = sig = ed = rt = inv = 0.0
    probes = [np.array([0.0, 1.0, z]) for z in (0.42, 0.5, 0.58)]
    probes += [np.array([0.3, 2.3, 0.3 + 2.0 * 0.47]), np.array([-1.0, -3.0, -1.0 - 2 * 0.55])]
    for traj, rec, resid in runs:
        drift = max(drift, *traj.drift())
        sig = max(sig, float(np.max(sigma_residual_data(sigma_data_from_F(traj)))))
        beta = rotation_field_from_trajectory(rec, "reconstructed")
        for p in probes:
            ed = max(ed, max(de_residual_values(beta, p).values()))
        rt = max(rt, resid["sup_error"])
        m0, d0 = traj.reference
        inv = max(inv, float(np.max(np.abs(rec.minusR2 - m0))), float(np.max(np.abs(rec.D - d0))))
    crit.check(drift < 1e-9, f"invariant drift max {drift:.2g} < 1e-9")
    crit.check(sig < 1e-6, f"sigma-form residual max {sig:.2g} < 1e-6")
    crit.check(ed < 1e-6, f"reconstructed beta ED1-ED3 max {ed:.2g} < 1e-6")
    crit.check(rt < 1e-6, f"F -> f -> F round trip sup {rt:.2g} < 1e-6 "
                          f"({rejected} draws rejected for radicand sign changes)")
    crit.check(inv < 1e-8, f"reconstructed invariants match (-R^2, D): {inv:.2g} < 1e-8")

    rng = np.random.default_rng(99)
    sym = dsym = 0.0
    for _ in range(5):
        a, b, c = rng.uniform(-1.0, 1.0, 3)
        t = integrate_span(FState(0.5, (a, b, a, c, b, c)), (0.4, 0.6))
        F = t.F
        sym = max(sym, float(np.max(np.abs(F[:, [0, 1, 3]] - F[:, [2, 4, 5]]))))
        dsym = max(dsym, float(np.max(np.abs(t.D))))
    crit.check(sym < 1e-10, f"symmetric data stays symmetric: {sym:.2g} < 1e-10")
    crit.check(dsym < 1e-10, f"symmetric data has D = 0: max |D| {dsym:.2g}")

    vieta = 0.0
    for traj, _, _ in runs:
        m0, d0 = traj.reference
        vieta = max(vieta, *painleve_parameters(-m0, d0).vieta)
    for R2, D in rng.uniform(-2.0, 2.0, (50, 2)):
        vieta = max(vieta, *painleve_parameters(R2, D).vieta)
    crit.check(vieta < 1e-10, f"parameter cubic Vieta residuals max {vieta:.2g} < 1e-10")
    deg = 0.0
    for R2 in (0.3, -1.7, 2.5, 0.0):
        roots = np.sort_complex(painleve_parameters(R2, 0.0).roots)
        deg = max(deg, float(np.max(np.abs(np.sort(roots.real) - np.sort([0.0, R2, R2])))),
                  float(np.max(np.abs(roots.imag))))
    crit.check(deg <= 1e-12, f"D = 0 gives roots {{0, R^2, R^2}}: max error {deg:.2g}")
    elapsed = time.perf_counter() - t0
    crit.check(elapsed < 60.0, f"runtime {elapsed:.1f} s < 60 s")
    return crit


# --------------------------------------------------------------------------
# 4. hierarchy
# --------------------------------------------------------------------------

MODEL = EpsilonModel(3, 0.5)


def _velocity() -> VectorFieldSample:
    return VectorFieldSample(MODEL.velocity, ("eps-velocity",), MODEL.velocity_jacobian)


def criterion_4() -> Criterion:
    crit = Criterion(4, "hierarchy: symmetries, recursion, commuting flows")
    beta, H = epsilon_fields(MODEL)
    nat, dual = natural_connection(beta, H), dual_connection(beta, H)
    can = ProductField.canonical(3)
    pts = random_points(3, 50, seed=11)
    sym = max(symmetry_residual(nat, can, _velocity(), p) for p in pts)
    crit.check(sym < 1e-9, f"epsilon velocity symmetry residual at 50 points: {sym:.2g} < 1e-9")

    base = np.array([1.0, 2.0, 4.0])
    target = np.array([1.4, 2.3, 3.5])
    detours = ([[1.7, 2.6, 3.1]], [[0.8, 1.8, 4.4], [1.2, 2.9, 4.0]])
    e, E = unit_vector_field(3), euler_vector_field(3)
    x_base = np.array([0.3, -0.2, 0.5])
    for scheme, conn2, Ef in (("principal", None, None), ("dual", dual, E)):
        ref = recursion_step(scheme, nat, conn2, can, Ef, e, base, x_base, target)
        spread = max(float(np.max(np.abs(
            recursion_step(scheme, nat, conn2, can, Ef, e, base, x_base, target, waypoints=w)
            - ref))) for w in detours)
        crit.check(spread < 1e-7, f"{scheme} step path independence {spread:.2g} < 1e-7")
        field_ = recursion_field(scheme, nat, conn2, can, Ef, e, base, x_base)
        s = symmetry_residual(nat, can, field_, target)
        crit.check(s < 1e-6, f"{scheme} step output symmetry residual {s:.2g} < 1e-6")

    state = GridState.smooth(0.5 * base, 0.1, 128)
    study = commutator_study(can, MODEL.velocity, lambda u: np.ones(3), state,
                             (0.02, 0.01, 0.005), 0.5, "spectral")
    ratios = ", ".join(f"{r:.2f}" for r in study.ratios)
    crit.check(min(study.ratios) >= 6.0,
               f"commutator on 128 cells shrinks by >= 6 per halving: ratios {ratios}")
    crit.check(study.order >= 2.5, f"fitted order {study.order:.2f} >= 2.5")
    return crit


# --------------------------------------------------------------------------
# 5. negative controls
# --------------------------------------------------------------------------


def criterion_5() -> Criterion:
    crit = Criterion(5, "negative controls")
    rng = np.random.default_rng(5)
    beta, _ = epsilon_fields(MODEL)
    amp = rng.standard_normal((3, 3))
    freq = rng.standard_normal((3, 3, 3))

    def noisy(u):
        return beta(u) + 1e-3 * amp * np.sin(np.einsum("ijk,k->ij", freq, u))

    pert = RotationField(noisy, 3)
    worst = min(max(de_residual_values(pert, p).values()) for p in random_points(3, 10, seed=3))
    crit.check(worst > 1e-4,
               f"beta + 1e-3 noise: smallest per-point max ED residual {worst:.2g} > 1e-4")

    can = ProductField.canonical(3)
    nat = natural_connection(*epsilon_fields(MODEL))

    def y_field(u):
        return 0.25 * np.asarray(u) ** 2

    s = symmetry_residual(nat, can, VectorFieldSample(y_field), np.array([1.0, 2.0, 4.0]))
    crit.check(s > 1e-3, f"Y = u^2/4 is not a symmetry: residual {s:.2g}")
    state = GridState.smooth(0.5 * np.array([1.0, 2.0, 4.0]), 0.1, 128)
    study = commutator_study(can, MODEL.velocity, y_field, state, (0.02, 0.01, 0.005), 0.5,
                             "spectral")
    ratios = ", ".join(f"{r:.2f}" for r in study.ratios)
    crit.check(min(study.ratios) < 6.0 and study.order < 2.5,
               f"commutator with Y does not converge at order: ratios {ratios}, "
               f"order {study.order:.2f}")
    return crit


# --------------------------------------------------------------------------
# pytest entry points
# --------------------------------------------------------------------------

CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_acceptance_criterion(number):
    crit = CRITERIA[number]()
    _emit(crit)
    failed = [text for ok, text in crit.lines if not ok]
    assert not failed, "; ".join(failed)


if __name__ == "__main__":
    results = []
    for k in sorted(CRITERIA):
        c = CRITERIA[k]()
        _emit(c)
        results.append(c.passed)
    sys.exit(0 if all(results) else 1)
