import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bersaut.errors import DomainError, UnsupportedCompositionError, UsageError
from bersaut.series import (TruncatedLaurent, TruncatedTaylor2, compose, eval_series, hadamard_radii, multiply,
                            series_from_json)

coef = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def laurent(draw_coeffs, low):
    return TruncatedLaurent(np.array(draw_coeffs, complex), low)


def test_constant_series():
    s = TruncatedLaurent.constant(1.0)
    assert s(0.3 - 0.2j) == 1.0
    assert np.all(s(np.array([0.1, 0.7j])) == 1.0)


def test_identity_series():
    s = TruncatedLaurent.monomial(1)
    assert s(0.3 + 0.1j) == pytest.approx(0.3 + 0.1j, abs=1e-15)


def test_geometric_sum():
    s = TruncatedLaurent(np.ones(51))
    # oracle: partial geometric sum in closed form
    assert abs(s(0.5) - (1 - 0.5 ** 51) / 0.5) <= 1e-12


def test_laurent_negative_powers():
    s = TruncatedLaurent({-2: 1.0, -1: 2.0, 0: 3.0, 3: 1j})
    z = 0.6 + 0.3j
    assert abs(s(z) - (z ** -2 + 2 / z + 3 + 1j * z ** 3)) < 1e-13


def test_multiply_unit_and_square():
    t = TruncatedLaurent([0.5, -1.0, 2j], low=-1)
    p = multiply(TruncatedLaurent.constant(1.0), t)
    assert p.as_dict() == t.as_dict()
    z = TruncatedLaurent.monomial(1)
    assert (z * z).as_dict() == {2: 1.0}


def test_multiply_telescoping():
    p = multiply(TruncatedLaurent(np.ones(11)), TruncatedLaurent([1.0, -1.0]))
    assert p.as_dict() == {0: 1.0, 11: -1.0}
    assert p.bound == 0.0


def test_multiply_truncates_to_window():
    s = TruncatedLaurent(np.ones(4), orders=(0, 3))
    p = multiply(s, s)
    assert p.N == 3 and max(p.as_dict()) == 3
    # discarded z^4 .. z^6 coefficients are 3, 2, 1
    assert p.bound == pytest.approx(6.0)
    z = 0.4
    assert abs(p(z) - s(z) ** 2) <= p.bound * z ** 4 + 1e-15


def test_window_validation():
    with pytest.raises(UsageError):
        TruncatedLaurent(np.ones(5), orders=(0, 2))
    with pytest.raises(UsageError):
        multiply(TruncatedLaurent([1.0]), TruncatedLaurent([1.0], center=0.5))


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=1, max_size=6), st.lists(coef, min_size=1, max_size=6),
       st.integers(-3, 2), st.integers(-3, 2))
def test_multiply_commutes(a, b, la, lb):
    s, t = laurent(a, la), laurent(b, lb)
    st_, ts = multiply(s, t), multiply(t, s)
    assert st_.low == ts.low
    np.testing.assert_allclose(st_.coeffs, ts.coeffs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=1, max_size=5), st.lists(coef, min_size=1, max_size=5), st.integers(-2, 1))
def test_product_evaluates_pointwise(a, b, la):
    # the default window is wide enough for the product to be exact
    s = laurent(a, la)
    t = laurent(b, la)
    z = 0.7 * np.exp(1j * np.linspace(0, 6, 7))
    np.testing.assert_allclose(multiply(s, t)(z), s(z) * t(z), atol=1e-9)


def test_compose_identity_and_binomial():
    f = TruncatedLaurent([0.2, 1j, 3.0], low=0)
    assert compose(f, TruncatedLaurent.monomial(1)).as_dict() == f.as_dict()
    sq = compose(TruncatedLaurent.monomial(2), TruncatedLaurent([1.0, 1.0]))
    assert sq.as_dict() == {0: 1.0, 1: 2.0, 2: 1.0}


def test_compose_rotation_rule():
    rng = np.random.default_rng(3)
    a = rng.standard_normal(11) + 1j * rng.standard_normal(11)
    f = TruncatedLaurent(a, low=-5)
    alpha = 0.8 * np.exp(0.4j)
    out = compose(f, TruncatedLaurent({1: alpha}))
    j = np.arange(-5, 6)
    np.testing.assert_allclose(out.coeffs, alpha ** j * a, rtol=1e-14)


def test_compose_flip_reverses_indices():
    f = TruncatedLaurent({-1: 2.0, 2: 1.0})
    out = compose(f, TruncatedLaurent({-1: 0.5}))
    z = 0.6 + 0.2j
    assert abs(out(z) - f(0.5 / z)) < 1e-13


def test_compose_rejects_negative_powers_in_general():
    f = TruncatedLaurent({-1: 1.0, 0: 1.0})
    with pytest.raises(UnsupportedCompositionError):
        compose(f, TruncatedLaurent([0.1, 0.5]))


def test_compose_region_check():
    f = TruncatedLaurent([1.0, 1.0], region=(0.0, 1.0))
    g = TruncatedLaurent([0.9, 0.5], region=(0.0, 0.5))
    with pytest.raises(DomainError):
        compose(f, g)


@settings(max_examples=30, deadline=None)
@given(st.lists(coef, min_size=1, max_size=5), st.lists(coef, min_size=2, max_size=3))
def test_compose_matches_evaluation(a, b):
    f = TruncatedLaurent(np.array(a, complex))
    g = TruncatedLaurent(np.array(b, complex) * 0.3)
    z = np.array([0.1, 0.2j, -0.3 + 0.1j])
    out = compose(f, g, order=len(a) * len(b) + 2)
    np.testing.assert_allclose(out(z), f(g(z)), atol=1e-10)


def test_radii_geometric():
    est = hadamard_radii(TruncatedLaurent(np.ones(200)))
    assert est.r_outer == pytest.approx(1.0)
    assert "truncation-limited" in est.flags


def _two_sided(order=200):
    j = np.arange(1, order + 1)
    c = {0: 1.0}
    c.update({int(k): 2.0 ** -k for k in j})
    c.update({int(-k): 4.0 ** -k for k in j})
    return TruncatedLaurent(c)


def test_radii_two_sided():
    est = hadamard_radii(_two_sided())
    # root test on the exact coefficients: outer 2, inner 1/4
    assert est.r_inner == pytest.approx(0.25, rel=1e-9)
    assert est.r_outer == pytest.approx(2.0, rel=1e-9)


def test_radii_after_dilation():
    est = hadamard_radii(compose(_two_sided(), TruncatedLaurent({1: 2.0})))
    assert est.r_inner == pytest.approx(0.125, rel=1e-9)
    assert est.r_outer == pytest.approx(1.0, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.05, 0.5))
def test_radii_scale_under_dilation(lam, rho):
    j = np.arange(1, 121)
    s = TruncatedLaurent({**{int(k): rho ** -k for k in j}, 0: 1.0})
    before = hadamard_radii(s).r_outer
    after = hadamard_radii(compose(s, TruncatedLaurent({1: lam}))).r_outer
    assert after == pytest.approx(before / lam, rel=1e-9)


def test_radii_window_validation():
    with pytest.raises(UsageError):
        hadamard_radii(TruncatedLaurent(np.ones(5)), tail_window=16)
    with pytest.raises(UsageError):
        hadamard_radii(TruncatedLaurent(np.ones(50)), tail_window=1)


def test_laurent_json_round_trip():
    s = TruncatedLaurent({-2: 1 + 1j, 3: -0.5}, center=0.1j, bound=1e-3, region=(0.2, 0.9))
    t = series_from_json(s.to_json())
    assert t.as_dict() == s.as_dict()
    assert t.center == s.center and t.region == s.region and t.bound == s.bound
    assert t.orders == s.orders


def test_taylor2_eval_and_product():
    p = TruncatedTaylor2.from_dict({(1, 0): 1.0, (0, 2): 2.0}, degree=4)
    q = TruncatedTaylor2.from_dict({(0, 0): 1.0, (1, 1): -1j}, degree=4)
    z = np.array([[0.3, 0.2j], [-0.1, 0.4]])
    np.testing.assert_allclose((p * q)(z), p(z) * q(z), atol=1e-14)
    r = series_from_json(p.to_json())
    np.testing.assert_allclose(r(z), p(z))


def test_taylor2_rejects_high_index():
    with pytest.raises(UsageError):
        TruncatedTaylor2.from_dict({(3, 3): 1.0}, degree=4)


def test_eval_series_array_shape():
    s = TruncatedLaurent([1.0, 2.0])
    z = np.zeros((3, 4), complex)
    assert eval_series(s, z).shape == (3, 4)
