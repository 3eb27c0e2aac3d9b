import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothext import taylor as T
from smoothext.errors import ContractViolation, DomainError
from smoothext.taylor import Box, Jet, JetOracle, jet_compose, multi_indices

ULP4 = 4 * np.finfo(float).eps


def x_at(p, order):
    return Jet.variable(p, 0, order)


def poly_jet(coeffs, order):
    """Jet at 0 of the polynomial with ascending coefficients."""
    c = np.zeros(order + 1)
    c[: min(len(coeffs), order + 1)] = coeffs[: order + 1]
    return Jet(c, 0.0)


# -- construction ---------------------------------------------------------------


def test_jet_truncates_high_degrees():
    c = np.ones((3, 3))
    j = Jet(c, (0.0, 0.0))
    np.testing.assert_array_equal(j.coeffs, [[1, 1, 1], [1, 1, 0], [1, 0, 0]])


def test_multi_index_count_matches_binomial():
    for d in range(1, 5):
        for n in range(0, 7):
            assert len(multi_indices(d, n)) == math.comb(d + n, n)


def test_nonfinite_rejected():
    with pytest.raises(ContractViolation):
        Jet([1.0, np.nan], 0.0)


def test_jets_are_immutable():
    j = Jet([1.0, 2.0], 0.0)
    with pytest.raises(ValueError):
        j.coeffs[0] = 3.0


def test_raw_and_from_raw_round_trip():
    j = Jet.from_raw([1.0, 2.0, 6.0, 24.0], 0.3)
    np.testing.assert_array_equal(j.coeffs, [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(j.raw(), [1.0, 2.0, 6.0, 24.0])


# -- arithmetic -------------------------------------------------------------------


def test_add_example():
    s = Jet([1.0, 2.0], 0.0) + Jet([3.0, 4.0], 0.0)
    np.testing.assert_array_equal(s.coeffs, [4.0, 6.0])


def test_add_zero_is_identity():
    a = Jet([1.5, -2.0, 0.25], 0.0)
    assert np.array_equal((a + Jet.constant(0.0, 0.0, 2)).coeffs, a.coeffs)


def test_sin_plus_cos_order4():
    s = T.sin(x_at(0.0, 4)) + T.cos(x_at(0.0, 4))
    np.testing.assert_allclose(s.coeffs, [1.0, 1.0, -0.5, -1 / 6, 1 / 24], rtol=0, atol=1e-15)


def test_mul_examples():
    a = Jet([1.0, 1.0, 0.0, 0.0], 0.0)
    b = Jet([1.0, -1.0, 0.0, 0.0], 0.0)
    np.testing.assert_array_equal((a * b).coeffs, [1.0, 0.0, -1.0, 0.0])
    e = T.exp(x_at(0.0, 5))
    np.testing.assert_allclose((e * e).coeffs, [2.0**k / math.factorial(k) for k in range(6)], rtol=ULP4)


def test_mul_unit_is_identity():
    a = Jet([0.3, -1.0, 2.0], 0.0)
    assert np.array_equal((a * Jet.constant(1.0, 0.0, 2)).coeffs, a.coeffs)


def test_incompatible_points_rejected():
    with pytest.raises(ContractViolation):
        Jet([1.0, 2.0], 0.0) + Jet([1.0, 2.0], 1.0)


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=7),
       st.lists(st.integers(-5, 5), min_size=1, max_size=7))
def test_leibniz_matches_polynomial_product(p, q):
    N = 6
    prod = np.convolve(np.array(p, float), np.array(q, float))[: N + 1]
    got = (poly_jet(np.array(p, float), N) * poly_jet(np.array(q, float), N)).coeffs
    want = np.zeros(N + 1)
    want[: len(prod)] = prod
    # integer coefficients: exact
    np.testing.assert_array_equal(got, want)


def test_bivariate_product_matches_expansion():
    x, y = (Jet.variable((0.5, -1.0), i, 3) for i in range(2))
    j = (x + y) * (x - y)
    # x^2 - y^2 at (0.5, -1): value -0.75, d/dx 1, d/dy 2, x^2 and -y^2 coefficients
    assert j.coeffs[0, 0] == -0.75
    assert j.coeffs[1, 0] == 1.0 and j.coeffs[0, 1] == 2.0
    assert j.coeffs[2, 0] == 1.0 and j.coeffs[0, 2] == -1.0 and j.coeffs[1, 1] == 0.0


# -- composition -------------------------------------------------------------------


def test_compose_with_identity():
    a = T.sin(x_at(0.2, 5))
    ident = x_at(0.0, 5)
    b = jet_compose(T.sin(x_at(0.0, 5)), ident)
    np.testing.assert_array_equal(b.coeffs, T.sin(x_at(0.0, 5)).coeffs)
    assert a.order == 5


def test_compose_exp_of_2x():
    inner = Jet([0.0, 2.0, 0.0, 0.0, 0.0], 0.0)
    got = jet_compose(T.exp(x_at(0.0, 4)), inner)
    np.testing.assert_allclose(got.coeffs, [2.0**k / math.factorial(k) for k in range(5)], rtol=ULP4)


def test_compose_sin_sin():
    # sin(sin x) = x - x^3/3 + x^5/10 + O(x^7)
    got = jet_compose(T.sin(x_at(0.0, 5)), T.sin(x_at(0.0, 5)))
    np.testing.assert_allclose(got.coeffs, [0, 1, 0, -1 / 3, 0, 1 / 10], atol=1e-15)


def test_compose_base_point_mismatch():
    with pytest.raises(ContractViolation):
        jet_compose(T.exp(x_at(1.0, 3)), x_at(0.0, 3))


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=4),
       st.lists(st.integers(-3, 3), min_size=2, max_size=4))
def test_compose_polynomials_exact(p, q):
    N = 6
    q = [0] + q[1:]  # inner vanishes at 0
    outer = poly_jet(np.array(p, float), N)
    inner = poly_jet(np.array(q, float), N)
    # brute-force substitution with numpy polynomials
    want = np.zeros(1)
    qp = np.polynomial.Polynomial(q)
    acc = np.polynomial.Polynomial([0.0])
    for k, a in enumerate(p):
        acc = acc + a * qp**k
    want = np.zeros(N + 1)
    w = acc.coef[: N + 1]
    want[: len(w)] = w
    np.testing.assert_array_equal(jet_compose(outer, inner).coeffs, want)


# -- elementary functions ------------------------------------------------------------


def test_elementary_examples():
    np.testing.assert_allclose(T.elementary_jets("exp", 0.0, 3).coeffs, [1, 1, 0.5, 1 / 6], rtol=ULP4)
    np.testing.assert_array_equal(T.elementary_jets("polynomial", 1.0, 2, poly=[0, 0, 1]).coeffs, [1, 2, 1])
    np.testing.assert_allclose(T.elementary_jets("sin", 0.0, 4).coeffs, [0, 1, 0, -1 / 6, 0], atol=1e-16)


@pytest.mark.parametrize("name, f, lo, hi", [
    ("exp", np.exp, -2, 2), ("sin", np.sin, -3, 3), ("cos", np.cos, -3, 3),
    ("log", np.log, 0.2, 3), ("sqrt", np.sqrt, 0.2, 3), ("atan", np.arctan, -2, 2),
    ("reciprocal", lambda x: 1 / x, 0.3, 3),
])
def test_elementary_oracles_match_fd(name, f, lo, hi, rng):
    fn = getattr(T, name)
    oracle = JetOracle.from_program(fn, 1)
    for x in rng.uniform(lo, hi, 100):
        for k in (1, 2):
            pred, fd = T.fd_crosscheck(oracle, [x], [1.0], k, h=1e-3)
            assert abs(float(pred) - float(fd)) <= 1e-6


def test_atan2_derivative_sign():
    p = np.array([0.6, 0.8])
    y, x = Jet.variable(p, 1, 1), Jet.variable(p, 0, 1)
    j = T.atan2(y, x)
    # d/dx atan2(y,x) = -y/r^2, d/dy = x/r^2
    assert j.coeffs[0, 0] == pytest.approx(math.atan2(0.8, 0.6))
    assert j.coeffs[1, 0] == pytest.approx(-0.8)
    assert j.coeffs[0, 1] == pytest.approx(0.6)


def test_recenter_is_exact_for_polynomials():
    j = poly_jet(np.array([1.0, -2.0, 0.5, 3.0]), 3)
    r = j.recenter(0.5)
    # p(x) = 1 - 2x + 0.5x^2 + 3x^3 at 0.5: p, p', p''/2, p'''/6
    np.testing.assert_allclose(r.coeffs, [0.5, 0.75, 5.0, 3.0], rtol=ULP4)


# -- cutoffs ------------------------------------------------------------------------------


def test_zeta_examples():
    z0 = T.bump_zeta_jet(0.0, 6)
    np.testing.assert_array_equal(z0.coeffs, [1, 0, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(T.bump_zeta_jet(2.0, 6).coeffs, np.zeros(7))
    z = T.bump_zeta_jet(0.75, 4)
    assert 0.0 < float(z.value) < 1.0
    oracle = JetOracle.from_program(T.cutoff, 1)
    for k in (1, 2, 3):
        pred, fd = T.fd_crosscheck(oracle, [0.75], [1.0], k, h=1e-3)
        assert abs(float(pred) - float(fd)) <= 1e-5


@given(st.floats(-0.5, 0.5))
def test_zeta_plateau(x):
    np.testing.assert_array_equal(T.bump_zeta_jet(x, 5).coeffs, [1, 0, 0, 0, 0, 0])


@given(st.floats(1.0, 50.0), st.booleans())
def test_zeta_vanishes_outside(x, neg):
    np.testing.assert_array_equal(T.bump_zeta_jet(-x if neg else x, 5).coeffs, np.zeros(6))


def test_zeta_values_in_unit_interval():
    xs = np.linspace(-1.2, 1.2, 2001)
    v = T.bump_zeta_jet(xs, 0).coeffs[0]
    assert v.min() >= 0.0 and v.max() <= 1.0


def test_xi_power_examples():
    assert np.array_equal(T.xi_power_jet(0, 0.7, 4).coeffs, [1, 0, 0, 0, 0])
    np.testing.assert_array_equal(T.xi_power_jet(1, 0.25, 4).coeffs, [0.25, 1, 0, 0, 0])
    np.testing.assert_array_equal(T.xi_power_jet(2, 0.0, 4).coeffs, [0, 0, 1, 0, 0])


# -- oracles ------------------------------------------------------------------------------


def test_fd_crosscheck_examples():
    e = JetOracle.from_program(T.exp, 1)
    pred, fd = T.fd_crosscheck(e, [0.5], [1.0], 1)
    assert abs(float(pred) - float(fd)) <= 1e-8
    c = JetOracle.from_program(lambda x: x * 0.0 + 2.0, 1)
    for k in (1, 2, 3):
        pred, fd = T.fd_crosscheck(c, [0.3], [1.0], k)
        assert float(pred) == 0.0 and abs(float(fd)) < 1e-6
    s = JetOracle.from_program(T.sin, 1)
    pred, fd = T.fd_crosscheck(s, [0.0], [1.0], 2)
    assert float(pred) == 0.0 and abs(float(fd)) < 1e-8


def test_fd_crosscheck_domain_guard():
    f = JetOracle.from_program(T.sqrt, 1, domain=Box((0.0,), (1.0,)))
    with pytest.raises(DomainError):
        T.fd_crosscheck(f, [0.0], [1.0], 1)


def test_oracle_is_deterministic():
    f = JetOracle.from_program(lambda x, y: T.sin(x * y) + y, 2)
    a = f.jet([0.3, 0.7], 4)
    b = f.jet([0.3, 0.7], 4)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert float(a.value) == math.sin(0.21) + 0.7


def test_oracle_rejects_points_outside_domain():
    f = JetOracle.from_program(T.exp, 1, domain=Box.unit(1))
    with pytest.raises(DomainError):
        f.jet([1.5])


def test_directional_jet_matches_chain_rule():
    f = JetOracle.from_program(lambda x, y: x * x * y, 2)
    j = f.directional_jet([1.0, 2.0], [1.0, -1.0], 2)
    # t -> (1+t)^2 (2-t) = 2 + 3t + 0 t^2 - t^3
    np.testing.assert_allclose(j.coeffs, [2.0, 3.0, 0.0], atol=1e-15)
