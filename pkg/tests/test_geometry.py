from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biflat.darboux import dual_connection, natural_connection
from biflat.errors import DomainError
from biflat.geometry import (
    ConnectionField,
    ProductField,
    almost_equivalence_residual,
    as_point,
    compatibility_residual,
    euler_field,
    first_bianchi_residual,
    hertling_manin_residual,
    parallel_vector_residual,
    riemann_curvature,
    unit_field,
    zero_connection,
)


def test_as_point_rejects_collisions():
    with pytest.raises(DomainError):
        as_point([1.0, 1.0 + 1e-5])
    with pytest.raises(DomainError):
        as_point([0.0, 1.0], nonzero=True)
    assert as_point([1, 2]).dtype == float


def test_zero_connection_is_flat(p3):
    assert np.max(np.abs(riemann_curvature(zero_connection(3), p3))) == 0.0


def test_epsilon_natural_connection_is_flat(eps_half, p3):
    _, beta, H = eps_half
    assert np.max(np.abs(riemann_curvature(natural_connection(beta, H), p3))) < 1e-7


def test_curved_connection_detected():
    # polar-type connection Gamma^1_22 = -u1 on the plane has nonzero curvature
    def gamma(u):
        g = np.zeros((2, 2, 2))
        g[0, 1, 1] = -u[0] ** 2
        g[1, 0, 1] = g[1, 1, 0] = 1.0 / u[0]
        return g

    r = riemann_curvature(ConnectionField(gamma), np.array([1.5, 0.3]))
    assert np.max(np.abs(r)) > 1e-2
    assert first_bianchi_residual(r) < 1e-8


def test_riemann_antisymmetric(eps_half, p3):
    _, beta, H = eps_half
    r = riemann_curvature(dual_connection(beta, H), p3)
    assert np.max(np.abs(r + r.transpose(0, 1, 3, 2))) == 0.0


def test_hertling_manin_constant_product_vanishes(p3):
    assert hertling_manin_residual(ProductField.canonical(3), p3) == 0.0


def test_hertling_manin_dual_product(p3):
    assert hertling_manin_residual(ProductField.dual(3), p3) < 1e-8


def test_hertling_manin_negative_control(p3):
    eta = lambda u: 0.1 * u[0] * np.ones((3, 3, 3))  # noqa: E731
    c = ProductField.canonical(3).perturbed(eta)
    assert c.associativity_residual(p3) > 0
    assert hertling_manin_residual(c, p3) > 1e-3


def test_hertling_manin_coordinate_invariance():
    # push the canonical product forward by x = phi(u); the result stays
    # an F-manifold product, while the constants become non-constant
    def phi(u):
        return np.array([u[0] + 0.1 * u[1] ** 2, u[1] + 0.2 * np.sin(u[0])])

    def jac(u):
        return np.array([[1.0, 0.2 * u[1]], [0.2 * np.cos(u[0]), 1.0]])

    def inv(x, iters=60):
        u = x.copy()
        for _ in range(iters):
            u = u - np.linalg.solve(jac(u), phi(u) - x)
        return u

    def c_x(x):
        u = inv(np.asarray(x, dtype=float))
        J = jac(u)
        Ji = np.linalg.inv(J)
        cu = np.zeros((2, 2, 2))
        cu[0, 0, 0] = cu[1, 1, 1] = 1.0
        return np.einsum("ai,ijk,jb,kc->abc", J, cu, Ji, Ji)

    c = ProductField(c_x, unit=lambda x: jac(inv(np.asarray(x))) @ np.ones(2))
    x = phi(np.array([0.4, 1.3]))
    assert np.max(np.abs(c.derivative(x))) > 1e-2
    assert hertling_manin_residual(c, x) < 1e-8
    assert c.associativity_residual(x) < 1e-12
    assert c.unit_residual(x) < 1e-12


def test_compatibility(eps_half, p3):
    _, beta, H = eps_half
    assert compatibility_residual(natural_connection(beta, H), ProductField.canonical(3), p3) < 1e-8
    assert compatibility_residual(dual_connection(beta, H), ProductField.dual(3), p3) < 1e-8
    # d_l (1/u^i) only appears with l = i = j = k, which is symmetric in (l, j)
    assert compatibility_residual(zero_connection(3), ProductField.dual(3), p3) == 0.0
    assert compatibility_residual(natural_connection(beta, H), ProductField.dual(3), p3) > 1e-3


def test_parallel_fields(eps_half, p3):
    _, beta, H = eps_half
    e, je = unit_field(3)
    E, jE = euler_field(3)
    nat = natural_connection(beta, H)
    assert parallel_vector_residual(nat, e, p3, je) < 1e-12
    assert parallel_vector_residual(dual_connection(beta, H), E, p3, jE) < 1e-12
    assert parallel_vector_residual(nat, E, p3, jE) > 1e-3


def test_almost_equivalence(eps_half, p3):
    _, beta, H = eps_half
    nat = natural_connection(beta, H)
    assert almost_equivalence_residual(nat, dual_connection(beta, H), p3) == 0.0
    assert almost_equivalence_residual(nat, nat, p3) == 0.0


def test_product_axioms(p3):
    for c in (ProductField.canonical(3), ProductField.dual(3)):
        assert c.commutativity_residual(p3) == 0.0
        assert c.associativity_residual(p3) < 1e-15
        assert c.unit_residual(p3) < 1e-15


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0.5, 3.0), min_size=3, max_size=3))
def test_dual_hertling_manin_property(offsets):
    u = np.cumsum(offsets)
    assert hertling_manin_residual(ProductField.dual(3), u) < 1e-8
