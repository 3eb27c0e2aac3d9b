import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothext import taylor as T
from smoothext.errors import ContractViolation, DomainError
from smoothext.extend import (FD_STEPS, LEFT, RIGHT, curry, extend_box, extend_interval,
                              plateau_steps, seam_fd_convergence, seam_smoothness_report,
                              shared_certificates, straddle_report, uncurry)
from smoothext.taylor import Box, Jet, JetOracle

SOURCES = {
    "sin": lambda x: T.sin(x),
    "exp": lambda x: T.exp(x),
    "runge": lambda x: T.reciprocal(1.0 + 25.0 * x * x),
    "poly5": lambda x: 1.0 + x * (2.0 - x * (3.0 + x * (0.5 - x * (1.5 + 0.7 * x)))),
}


def unit_oracle(prog, dim=1, name=""):
    return JetOracle.from_program(prog, dim, domain=Box.unit(dim), name=name)


@pytest.fixture(scope="module")
def extensions():
    return {n: extend_interval(unit_oracle(p, name=n), 6) for n, p in SOURCES.items()}


@pytest.fixture(scope="module")
def exp_box():
    return extend_box(unit_oracle(lambda x, y: T.exp(x + y), 2), 4)


# -- interval ------------------------------------------------------------------------


def test_constant_extends_to_constant():
    e = extend_interval(unit_oracle(lambda x: x * 0.0 + 5.0), 6)
    for x in np.linspace(-3, 4, 71):
        assert float(e(np.array([x]))) == 5.0
    assert seam_smoothness_report(e, 6) == {(0, 0.0): 0.0, (0, 1.0): 0.0}


def test_identity_on_left_plateau():
    e = extend_interval(unit_oracle(lambda x: x), 6)
    c1 = e.left.certificate.scales[0]
    for x in np.linspace(-1 / (2 * c1), 0, 21, endpoint=False):
        assert float(e(np.array([x]))) == x
    x = -0.9
    want = float(T.xi_power_jet(1, c1 * x, 0).value) / c1
    assert float(e(np.array([x]))) == want


def test_sin_one_sided_jets(extensions):
    e = extensions["sin"]
    for face, side in ((0.0, LEFT), (1.0, RIGHT)):
        out = e.branch_jet(face, side).raw()
        want = T.sin(Jet.variable(face, 0, 6)).raw()
        np.testing.assert_allclose(out, want, atol=1e-9)


@pytest.mark.parametrize("name", sorted(SOURCES))
def test_restriction_identity_bit_exact(extensions, name, rng):
    e = extensions[name]
    for x in np.r_[0.0, 1.0, rng.random(200)]:
        assert float(e(np.array([x]))) == float(e.source(np.array([x])))


@pytest.mark.parametrize("name", sorted(SOURCES))
def test_seam_match_all_orders(extensions, name):
    e = extensions[name]
    for k in range(7):
        assert max(seam_smoothness_report(e, k).values()) <= 1e-8


def test_truncated_left_is_detected(extensions):
    bad = extensions["sin"].with_truncated(LEFT, 2)
    rep = seam_smoothness_report(bad, 3)
    assert rep[(0, 0.0)] > 1e-3
    assert rep[(0, 1.0)] == 0.0


def test_seam_report_order_check(extensions):
    with pytest.raises(ContractViolation):
        seam_smoothness_report(extensions["sin"], 7)


@pytest.mark.parametrize("name", sorted(SOURCES))
@pytest.mark.parametrize("k", [1, 2])
def test_fd_rate_fixed_steps_at_zero(extensions, name, k):
    c = seam_fd_convergence(extensions[name], k, 0.0, steps=FD_STEPS)
    assert c.passes()


@pytest.mark.parametrize("name", sorted(SOURCES))
@pytest.mark.parametrize("seam", [0.0, 1.0])
@pytest.mark.parametrize("k, lift", [(1, 0), (2, 0), (2, 1)])
def test_fd_rate_plateau_steps(extensions, name, seam, k, lift):
    c = seam_fd_convergence(extensions[name], k, seam, lift=lift)
    assert c.passes()


def test_fd_rate_measured_where_expected(extensions):
    # frozen: which seams give a measurable second-order rate
    measured = {(n, s) for n, e in extensions.items() for s in (0.0, 1.0)
                if seam_fd_convergence(e, 2, s, lift=1).measurable}
    assert measured == {("sin", 0.0), ("sin", 1.0), ("exp", 0.0), ("exp", 1.0),
                        ("runge", 1.0), ("poly5", 0.0)}


def test_fd_detects_kink():
    # |x| shifted: C^0 but not C^1 across the seam at 0
    e = extend_interval(unit_oracle(lambda x: x), 6)
    bad = e.with_truncated(LEFT, 0)
    c = seam_fd_convergence(bad, 1, 0.0, steps=FD_STEPS)
    assert not c.passes()


def test_plateau_steps_fit_inside_plateau(extensions):
    e = extensions["sin"]
    c = e.right.certificate.scale_array()
    steps = plateau_steps(e, 2, 1.0)
    assert steps[0] <= 1 / (2 * max(c[3], c[4]))


def test_fixed_certificate_linearity():
    f = unit_oracle(T.sin)
    g = unit_oracle(T.exp)
    a = -1.5
    h = unit_oracle(lambda x: T.sin(x) * a + T.exp(x))
    certs = shared_certificates([f, g], 6, weights=[a, 1.0])
    ef, eg, eh = (extend_interval(s, 6, certs) for s in (f, g, h))
    for x in np.linspace(-0.7, 1.7, 97):
        p = np.array([x])
        lhs = float(eh(p))
        rhs = a * float(ef(p)) + float(eg(p))
        scale = abs(a * float(ef(p))) + abs(float(eg(p)))
        assert abs(lhs - rhs) <= 16 * np.finfo(float).eps * max(scale, 1.0)


def test_order_bounds():
    with pytest.raises(ContractViolation):
        extend_interval(unit_oracle(T.sin), 13)


def test_degenerate_order_zero_flagged():
    e = extend_interval(unit_oracle(T.sin), 0)
    assert "degenerate-order-0" in e.record.flags


def test_source_must_reach_endpoints():
    f = JetOracle.from_program(T.sqrt, 1, domain=Box((0.1,), (1.0,)))
    with pytest.raises(DomainError):
        extend_interval(f, 3)


# -- box ----------------------------------------------------------------------------------


def test_box_d1_is_interval():
    f = unit_oracle(T.sin)
    b = extend_box(f, 6)
    i = extend_interval(f, 6)
    for x in np.linspace(-1, 2, 31):
        assert float(b(np.array([x]))) == float(i(np.array([x])))


def test_affine_source_on_plateau():
    e = extend_box(unit_oracle(lambda x, y: x + y, 2), 4)
    for p in np.random.default_rng(3).random((50, 2)):
        assert float(e(p)) == p[0] + p[1]
    assert float(e(np.array([-0.01, 0.5]))) == pytest.approx(0.49, abs=1e-15)


def test_exp_box_straddle(exp_box):
    rep = straddle_report(exp_box)
    assert rep["faces"] <= 1e-6 and rep["corners"] <= 1e-6


def test_exp_box_seams(exp_box):
    rep = seam_smoothness_report(exp_box, 4, samples=5)
    assert set(rep) == {(0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)}
    assert max(rep.values()) <= 1e-8


def test_exp_box_restriction(exp_box, rng):
    for p in rng.random((100, 2)):
        assert float(exp_box(p)) == float(exp_box.source(p))


def test_exp_box_fd_across_face(exp_box):
    c = seam_fd_convergence(exp_box, 1, point=[0.0, 0.5], direction=[1.0, 0.0])
    assert c.passes()


def test_axis_order_validation():
    with pytest.raises(ContractViolation):
        extend_box(unit_oracle(lambda x, y: x * y, 2), 3, axis_order=(0, 0))


def test_exp_box_scales_frozen(exp_box):
    certs = exp_box.record.certificates
    assert certs[(0, LEFT)].scales == (4.0, 16.0, 128.0, 2048.0)
    assert certs[(0, RIGHT)].scales == (16.0, 64.0, 512.0, 4096.0)


# -- currying ---------------------------------------------------------------------------


BIVARIATE = [lambda x, y: x * y, lambda x, y: T.sin(x) * T.exp(y), lambda x, y: T.reciprocal(1.0 + x * x + y * y)]


@pytest.mark.parametrize("prog", BIVARIATE)
def test_curry_exact(prog, rng):
    f = JetOracle.from_program(prog, 2)
    v = curry(f, 1)
    for x, y in rng.uniform(-2, 2, (100, 2)):
        assert float(v.at([x])([y])) == float(f([x, y]))


def test_curry_example():
    v = curry(JetOracle.from_program(lambda x, y: x * y, 2), 1)
    g = v.at([2.0])
    assert float(g([3.0])) == 6.0
    np.testing.assert_array_equal(g.jet([3.0], 2).coeffs, [6.0, 2.0, 0.0])


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_curried_jet_is_slice(x, y):
    f = JetOracle.from_program(lambda a, b: T.sin(a * b) + b * b, 2)
    J = f.jet([x, y], 4)
    np.testing.assert_array_equal(curry(f).at([x]).jet([y], 4).coeffs, J.coeffs[0])


def test_uncurry_round_trip(rng):
    f = JetOracle.from_program(BIVARIATE[1], 2)
    g = uncurry(curry(f))
    for p in rng.uniform(-1, 1, (100, 2)):
        assert float(g(p)) == float(f(p))


def test_curry_split_bounds():
    with pytest.raises(ContractViolation):
        curry(JetOracle.from_program(lambda x, y: x, 2), 2)
