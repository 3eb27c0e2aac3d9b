import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothext import taylor as T
from smoothext.errors import ContractViolation, DomainError
from smoothext.mapspace import (GROUPS, GridMap, GroupMapElement, ParamMap, chart_transport,
                                complexify, d2_pushforward, detect_epsilon, dpf_battery,
                                grid_max_diff, holomorphy_battery, holomorphy_check,
                                in_chart_domain, inverse_transport, jet_expm, jet_logm,
                                jet_matinv, pointwise_inv, pointwise_mul, pushforward, realify,
                                special_linear, special_orthogonal, tangent_pushforward, times_i,
                                uniform_grid, verify_dpf, verify_local_group_axioms)
from smoothext.taylor import Box, Jet, JetOracle

GRID = uniform_grid(17)


def elements(name, n=3, seed=0, order=4, radius=0.8):
    K = GROUPS[name]()
    rng = np.random.default_rng(seed)
    return K, [GroupMapElement.random(K, GRID, rng, order=order, radius=radius) for _ in range(n)]


def param(prog, e=1, U=None, name=""):
    return ParamMap(JetOracle.from_program(prog, 1 + e, name=name), 1, e, U, name)


# -- groups --------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["SO3", "SL2", "GL2C", "torus"])
def test_group_laws(name):
    K, (a, b, c) = elements(name)
    e = GroupMapElement.identity(K, GRID, 4)
    mul, inv = pointwise_mul, pointwise_inv
    assert grid_max_diff(mul(mul(a, b), c), mul(a, mul(b, c))) < 1e-12
    assert grid_max_diff(mul(a, e), a) == 0.0
    assert grid_max_diff(mul(e, a), a) == 0.0
    assert grid_max_diff(mul(a, inv(a)), e) < 1e-12
    assert grid_max_diff(inv(inv(a)), a) < 1e-12
    assert max(x.membership_residual() for x in (a, mul(a, b), inv(a))) < 1e-12


def test_product_value_is_matrix_product():
    grid = uniform_grid(5)  # contains m = 0.5 at index 2
    K = special_orthogonal(3)
    rng = np.random.default_rng(3)
    a, b = (GroupMapElement.random(K, grid, rng, order=3) for _ in range(2))
    np.testing.assert_array_equal(pointwise_mul(a, b).values[2], a.values[2] @ b.values[2])


def test_inverse_derivative():
    _, (a,) = elements("SL2", n=1, seed=5)
    ai = pointwise_inv(a)
    da = np.asarray(a.jet.coeffs[1])
    expected = -ai.values @ da @ ai.values
    np.testing.assert_allclose(np.asarray(ai.jet.coeffs[1]), expected, atol=1e-13)


def test_torus_is_abelian():
    K, (a, b) = elements("torus", n=2, seed=9)
    assert K.abelian
    assert grid_max_diff(pointwise_mul(a, b), pointwise_mul(b, a)) < 1e-14


def test_so3_is_not_abelian():
    _, (a, b) = elements("SO3", n=2, seed=9)
    assert grid_max_diff(pointwise_mul(a, b), pointwise_mul(b, a)) > 1e-3


def test_mixed_groups_rejected():
    _, (a,) = elements("SO3", n=1)
    _, (b,) = elements("SL2", n=1)
    with pytest.raises(ContractViolation):
        pointwise_mul(a, b)


def test_different_grids_rejected():
    K = special_orthogonal(3)
    rng = np.random.default_rng(0)
    a = GroupMapElement.random(K, uniform_grid(5), rng, order=2)
    b = GroupMapElement.random(K, uniform_grid(6), rng, order=2)
    with pytest.raises(ContractViolation):
        pointwise_mul(a, b)


def test_realify_round_trip():
    Z = np.array([[1 + 2j, -0.5j], [3.0, 0.25 - 1j]])
    np.testing.assert_array_equal(complexify(realify(Z)), Z)
    W = np.array([[0.5j, 1.0], [2.0 - 1j, 1j]])
    np.testing.assert_allclose(realify(Z) @ realify(W), realify(Z @ W), atol=1e-15)


def test_group_residuals():
    so3, sl2 = special_orthogonal(3), special_linear(2)
    assert so3.residual(np.eye(3)) == 0.0
    assert so3.residual(np.diag([1.0, 1.0, -1.0])) == pytest.approx(2.0)
    assert sl2.residual(np.array([[2.0, 0.0], [0.0, 0.5]])) == 0.0
    assert sl2.residual(2.0 * np.eye(2)) == pytest.approx(3.0)


# -- jet matrix functions --------------------------------------------------------------


def test_scalar_jet_expm_matches_exp():
    # 1x1 matrices reduce to scalar jets
    x = Jet.variable(np.array([0.3]), 0, 5)
    a = Jet(np.asarray(x.coeffs)[..., None, None], x.point)
    e = jet_expm(a)
    np.testing.assert_allclose(np.asarray(e.coeffs)[..., 0, 0], T.exp(x).coeffs, atol=1e-14)
    back = jet_logm(e)
    np.testing.assert_allclose(np.asarray(back.coeffs), np.asarray(a.coeffs), atol=1e-13)


def test_jet_matinv_product_is_identity():
    K, (a,) = elements("GL2C", n=1, seed=2, order=5)
    prod = a.jet @ jet_matinv(a.jet)
    c = np.asarray(prod.coeffs)
    np.testing.assert_allclose(c[0], np.broadcast_to(np.eye(4), c[0].shape), atol=1e-13)
    assert np.abs(c[1:]).max() < 1e-12


def test_singular_inverse_raises():
    grid = uniform_grid(3)
    a = Jet.constant(np.zeros((3, 2, 2)), grid, 2)
    with pytest.raises(DomainError):
        jet_matinv(a)


# -- chart ------------------------------------------------------------------------------


def test_chart_of_identity_is_zero():
    K = special_orthogonal(3)
    X = chart_transport(GroupMapElement.identity(K, GRID, 3))
    assert np.abs(np.asarray(X.jet.coeffs)).max() == 0.0


@pytest.mark.parametrize("name", ["SO3", "SL2", "torus"])
def test_chart_round_trip(name):
    K, (a,) = elements(name, n=1, seed=11, radius=0.8)
    assert in_chart_domain(a.values).all()
    assert grid_max_diff(inverse_transport(K, chart_transport(a)), a) < 1e-12


def test_chart_of_one_parameter_subgroup():
    K = special_orthogonal(3)
    X = K.random_algebra(np.random.default_rng(4), 0.6)
    gm = GridMap.from_program(lambda m: Jet(np.asarray(m.coeffs)[..., None, None] * X, m.point), GRID, 4)
    Y = chart_transport(GroupMapElement.exp_of(K, gm))
    assert grid_max_diff(Y, gm) < 1e-13


def test_chart_outside_domain():
    K = GROUPS["SO2"]()
    th = 2.0
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    a = GroupMapElement(K, GRID, Jet.constant(np.broadcast_to(R, (GRID.shape[1], 2, 2)), GRID, 2))
    assert not in_chart_domain(a.values).any()
    with pytest.raises(DomainError):
        chart_transport(a)


# -- push-forward ---------------------------------------------------------------------------


def test_pushforward_projection_is_identity():
    f = param(lambda m, u: u)
    g = GridMap.from_program(lambda m: T.sin(m * 2.0) + m * m, GRID, 4)
    assert grid_max_diff(pushforward(f, g), g) < 1e-15


def test_pushforward_of_constant_one():
    f = param(lambda m, u: m * u * u)
    one = GridMap.from_program(lambda m: m * 0.0 + 1.0, GRID, 3)
    out = pushforward(f, one)
    np.testing.assert_allclose(out.values, GRID[0], atol=1e-15)
    np.testing.assert_allclose(np.asarray(out.jet.coeffs[1]), 1.0)
    np.testing.assert_allclose(np.asarray(out.jet.coeffs[2]), 0.0, atol=1e-15)


def test_pushforward_leaves_U():
    f = param(lambda m, u: T.log(u), U=Box((0.0,), (np.inf,), closed=False))
    g = GridMap.from_program(lambda m: m - 0.5, GRID, 2)
    with pytest.raises(DomainError):
        pushforward(f, g)


@pytest.mark.parametrize("idx", range(5))
def test_tangent_two_paths(idx):
    name, f, gamma, _ = dpf_battery(GRID, 3)[idx]
    value, deriv = tangent_pushforward(f, gamma, [1.0])
    pf = pushforward(f, gamma)
    np.testing.assert_allclose(value, pf.values, atol=1e-14)
    np.testing.assert_allclose(deriv, np.asarray(pf.jet.coeffs[1]), atol=1e-13)


def test_detect_epsilon():
    f = param(lambda m, u: T.log(u), U=Box((0.0,), (np.inf,), closed=False))
    g = GridMap.from_program(lambda m: m * 0.0 + 0.3, GRID, 2)
    eta = GridMap.from_program(lambda m: m * 0.0 + 1.0, GRID, 2)
    # gamma + t eta > 0 for |t| <= 2^-2 but not 2^-1
    assert detect_epsilon(f, g, eta) == 0.25
    assert detect_epsilon(param(lambda m, u: u), g, eta) == 1.0


def test_dpf_first_order_value():
    f = param(lambda m, u: m * u * u)
    one = GridMap.from_program(lambda m: m * 0.0 + 1.0, GRID, 3)
    rep = verify_dpf(f, one, one, 1)
    np.testing.assert_allclose(rep.exact, 2.0 * GRID[0], atol=1e-15)
    assert rep.residual < 1e-10


def test_dpf_linear_is_exact():
    f = param(lambda m, u: 3.0 * u + m)
    g = GridMap.from_program(lambda m: T.cos(m), GRID, 3)
    eta = GridMap.from_program(lambda m: m + 1.0, GRID, 3)
    r1 = verify_dpf(f, g, eta, 1)
    np.testing.assert_allclose(r1.exact, 3.0 * (GRID[0] + 1.0), atol=1e-14)
    assert r1.residual < 1e-11
    assert np.abs(d2_pushforward(f, g, eta, 2)).max() == 0.0


def test_dpf_cubic_second_order():
    f = param(lambda m, u: u * u * u)
    g = GridMap.from_program(lambda m: m + 0.5, GRID, 3)
    eta = GridMap.from_program(lambda m: m * 0.0 + 2.0, GRID, 3)
    rep = verify_dpf(f, g, eta, 2)
    np.testing.assert_allclose(rep.exact, 6.0 * (GRID[0] + 0.5) * 4.0, atol=1e-13)
    assert rep.residual < 1e-8


@pytest.mark.parametrize("n", [1, 2])
def test_dpf_battery(n):
    for name, f, gamma, eta in dpf_battery(uniform_grid(32), 3):
        assert verify_dpf(f, gamma, eta, n).passes(1e-5), name


def test_dpf_rejects_order_three():
    f, gamma, eta = dpf_battery(GRID, 2)[0][1:]
    with pytest.raises(ContractViolation):
        verify_dpf(f, gamma, eta, 3)


def test_dpf_eps_too_small():
    f = param(lambda m, u: T.log(u), U=Box((0.0,), (np.inf,), closed=False))
    g = GridMap.from_program(lambda m: m * 0.0 + 1e-4, GRID, 2)
    eta = GridMap.from_program(lambda m: m * 0.0 + 1.0, GRID, 2)
    with pytest.raises(DomainError):
        verify_dpf(f, g, eta, 1)


# -- complex linearity -----------------------------------------------------------------------


def test_times_i():
    np.testing.assert_array_equal(times_i([1.0, 2.0, 3.0, 4.0]), [-2.0, 1.0, -4.0, 3.0])
    v = np.array([0.3, -0.7])
    np.testing.assert_array_equal(times_i(times_i(v)), -v)


@pytest.mark.parametrize("name", ["z^2", "exp(z)", "matrix product", "conj(z)", "Re(z)"])
def test_holomorphy_battery(name):
    f, expected = holomorphy_battery()[name]
    pts = np.random.default_rng(0).standard_normal((16, f.dim)) * 0.5
    rep = holomorphy_check(f, pts)
    assert rep.passes == expected
    if not expected:
        assert rep.residual > 0.5


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_hol_square_pointwise(x, y):
    f, _ = holomorphy_battery()["z^2"]
    assert holomorphy_check(f, [[x, y]], seed=1).residual < 1e-12


# -- local group axioms ------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["SO3", "torus"])
def test_local_group_axioms(name):
    rep = verify_local_group_axioms(GROUPS[name](), 0.3, samples=100, seed=0)
    assert rep.passes
    assert rep.samples == 100


def test_local_group_axioms_fail_for_large_ball():
    rep = verify_local_group_axioms(GROUPS["SO3"](), 2.0, samples=100, seed=0)
    assert not rep.passes
    assert rep.product_violations > 0
