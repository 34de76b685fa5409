from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biflat.darboux import (
    LameField,
    RotationField,
    build_dual_connection,
    build_natural_connection,
    de_residual_values,
    de_residuals,
    flat_form_and_closedness,
    lame_residual_values,
    lame_residuals,
    transported_lame_field,
    v_matrix,
)
from biflat.errors import DegeneracyError, DomainError
from biflat.models import EpsilonModel, epsilon_adjoint, epsilon_fields


def constant_beta(n: int, c: float) -> RotationField:
    return RotationField(lambda u: np.full((n, n), c), n, dfunc=lambda u: np.zeros((n, n, n)))


def test_constant_beta_residuals_by_substitution():
    c = -0.7
    vals = de_residual_values(constant_beta(3, c), [1.0, 2.0, 4.0])
    assert vals["ED1"] == pytest.approx(c * c, abs=1e-15)
    assert vals["ED2"] == 0.0
    assert vals["ED3"] == pytest.approx(abs(c), abs=1e-15)


def test_constant_beta_fd_path():
    b = RotationField(lambda u: np.full((3, 3), 0.3), 3)
    vals = de_residual_values(b, [1.0, 2.0, 4.0])
    assert vals["ED1"] == pytest.approx(0.09, abs=1e-10)


def test_epsilon_beta_solves_system(eps_half, p3):
    _, beta, _ = eps_half
    rep = de_residuals(beta, p3, tol=1e-7)
    assert all(r.passed for r in rep.values())
    fd = RotationField(beta.func, 3)
    assert max(de_residual_values(fd, p3).values()) < 1e-7


def test_trivial_lame():
    beta = constant_beta(3, 0.0)
    H = LameField(lambda u: np.ones(3), 3, degree=0.0, dfunc=lambda u: np.zeros((3, 3)))
    assert lame_residual_values(beta, H, [1.0, 2.0, 4.0]) == {"L1": 0.0, "L2": 0.0, "L3": 0.0}


def test_epsilon_lame(eps_half, p3):
    _, beta, H = eps_half
    rep = lame_residuals(beta, H, p3, tol=1e-7)
    assert all(r.passed for r in rep.values())
    H_fd = LameField(H.func, 3, degree=H.degree)
    assert max(lame_residual_values(beta, H_fd, p3).values()) < 1e-7


def test_degree_sign_convention(eps_half, p3):
    _, beta, H = eps_half
    flipped = LameField(H.func, 3, degree=H.degree, dfunc=H.dfunc, degree_sign=+1)
    assert lame_residual_values(beta, flipped, p3, checks=("L3",))["L3"] > 0.1


def test_natural_connection_values(eps_half, p3):
    _, beta, H = eps_half
    g = build_natural_connection(beta, H, p3)
    assert g[0, 0, 1] == pytest.approx(-0.5, abs=1e-14)
    assert g[0, 1, 2] == 0.0
    assert g[0, 0, 0] == pytest.approx(2.0 / 3.0, abs=1e-14)
    for i in range(3):
        for j in range(3):
            if i != j:
                assert g[i, i, j] == pytest.approx(0.5 / (p3[i] - p3[j]), abs=1e-14)


def test_dual_connection_values(eps_half, p3):
    _, beta, H = eps_half
    g = build_dual_connection(beta, H, p3)
    assert g[0, 1, 1] == pytest.approx(0.25, abs=1e-14)
    assert g[0, 0, 0] == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert g[0, 1, 2] == 0.0 and g[1, 0, 2] == 0.0 and g[2, 0, 1] == 0.0


def test_zero_beta_gives_zero_connection():
    beta = constant_beta(3, 0.0)
    H = LameField(lambda u: np.ones(3), 3)
    assert np.all(build_natural_connection(beta, H, [1.0, 2.0, 4.0]) == 0.0)


def test_connection_degeneracy():
    beta = constant_beta(2, 0.1)
    H = LameField(lambda u: np.array([1.0, 0.0]), 2)
    with pytest.raises(DegeneracyError):
        build_natural_connection(beta, H, [1.0, 2.0])
    with pytest.raises(DomainError):
        build_dual_connection(beta, LameField(lambda u: np.ones(2), 2), [0.0, 2.0])


def test_v_matrix_n2():
    C1, C2 = 1.0, -4.0
    beta = RotationField(lambda u: np.array([[0, C1], [C2, 0]]) / (u[0] - u[1]), 2)
    vm = v_matrix(beta, [3.0, 1.0])
    assert np.allclose(vm.matrix, [[0, -C1], [C2, 0]], atol=1e-15)
    assert np.allclose(np.sort(vm.eigenvalues.real), [-2.0, 2.0], atol=1e-12)


def test_v_matrix_epsilon_spectrum(eps_half, p3):
    model, beta, H = eps_half
    vm = v_matrix(beta, p3)
    lam = np.sort(vm.eigenvalues.real)
    assert np.allclose(lam, [-2 * model.eps, model.eps, model.eps], atol=1e-12)
    h = H(p3)
    assert np.allclose(vm.matrix @ h, -2 * model.eps * h, atol=1e-13)


def test_transported_lame_matches_closed_form(eps_half, p3):
    model, beta, H = eps_half
    T = transported_lame_field(beta, p3, H(p3), degree=H.degree)
    q = np.array([1.3, 2.4, 3.5])
    assert np.allclose(T(q), H(q), atol=1e-9)


def test_flat_form_trivial():
    beta = constant_beta(3, 0.0)
    one = LameField(lambda u: np.full(3, 2.0), 3)
    rep = flat_form_and_closedness(one, one, beta, [1.0, 2.0, 4.0])
    assert rep.closedness == 0.0 and rep.covariant == 0.0


def test_flat_form_epsilon(eps_half, p3):
    model, beta, H = eps_half
    K = epsilon_adjoint(model)
    assert max(lame_residual_values(beta, K, p3, checks=("L1", "L2")).values()) < 1e-9
    rep = flat_form_and_closedness(K, H, beta, p3)
    assert rep.closedness < 1e-6 and rep.covariant < 1e-6
    bad = LameField(lambda u: np.array([1.0, u[0], 1.0]), 3, role="adjoint")
    assert lame_residual_values(beta, bad, p3, checks=("L1",))["L1"] > 1e-3
    assert flat_form_and_closedness(bad, H, beta, p3).closedness > 1e-3


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-5.0, 5.0))
def test_epsilon_beta_homogeneity(lam, shift):
    model = EpsilonModel(3, 0.5)
    u = np.array([1.0, 2.0, 4.0])
    b = model.rotation(u)
    assert np.allclose(model.rotation(u + shift), b, atol=1e-12)
    assert np.allclose(model.rotation(lam * u), b / lam, atol=1e-12)


def test_translation_invariance_ten_shifts(eps_half):
    _, beta, H = eps_half
    u = np.array([-0.4, 0.7, 1.9])
    rng = np.random.default_rng(1)
    ref_de = de_residual_values(RotationField(beta.func, 3), u)
    ref_l = lame_residual_values(beta, LameField(H.func, 3, degree=H.degree), u, checks=("L1", "L2"))
    for s in rng.uniform(-3.0, 3.0, 10):
        de = de_residual_values(RotationField(beta.func, 3), u + s)
        lm = lame_residual_values(beta, LameField(H.func, 3, degree=H.degree), u + s,
                                  checks=("L1", "L2"))
        for k in ("ED1", "ED2"):
            assert abs(de[k] - ref_de[k]) < 1e-8
        for k in ("L1", "L2"):
            assert abs(lm[k] - ref_l[k]) < 1e-8
