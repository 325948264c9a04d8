import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bersaut.domains import Ball, Bidisc, Ellipsoid, Siegel
from bersaut.errors import DomainError, FrameError, UsageError
from bersaut.scaling import (BoundaryFrame, DilationMap, DilationStep, cayley, cayley_inverse, dilation_map,
                             scale_sequence)


def test_unit_delta_is_identity():
    psi = dilation_map(DilationStep(np.array([0.3, 0.1j]), 1.0))
    z = np.array([[0.2, 0.5j], [1 + 1j, -2.0]])
    np.testing.assert_allclose(psi(z), z)


def test_dilation_values():
    psi = dilation_map(DilationStep(np.zeros(2), 0.01))
    np.testing.assert_allclose(psi(np.array([0.01, 0.1])), [1.0, 1.0])
    np.testing.assert_allclose(psi(np.array([1.0, 1.0])), [100.0, 10.0])
    assert psi.jacobian == pytest.approx(1000.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-6, 10), st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
def test_dilation_inverse(delta, a, b):
    psi = DilationMap(np.array([a, b]), delta)
    z = np.array([0.3 - 0.2j, 0.7j])
    np.testing.assert_allclose(psi.inverse(psi(z)), z, atol=1e-9)


def test_nonpositive_delta():
    with pytest.raises(UsageError):
        DilationStep(np.zeros(2), 0.0)
    with pytest.raises(UsageError):
        scale_sequence(Ball(), [1.0, 0.0], [0.1, -1])


def test_ball_defects_decrease():
    rep = scale_sequence(Ball(), [1.0, 0.0], 10.0 ** -np.arange(1, 6))
    assert rep.decreasing
    assert rep.final_defect < 1e-2
    devs = [s.orbit_deviation for s in rep.steps]
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert rep.to_csv().splitlines()[0] == "delta,defect,window,samples"


def test_ball_defect_scales_linearly():
    rep = scale_sequence(Ball(), [0.6, 0.8j], [1e-2, 1e-3, 1e-4])
    d = [s.defect for s in rep.steps]
    # second order terms of the defining function survive the rescaling at rate delta
    assert d[1] / d[0] == pytest.approx(0.1, rel=0.2)
    assert d[2] / d[1] == pytest.approx(0.1, rel=0.2)


def test_siegel_is_fixed():
    for X in ([0.0, 0.0], [0.25 + 0.3j, 0.5]):
        rep = scale_sequence(Siegel(), X, [1.0, 0.1, 1e-3], n_samples=200)
        assert max(s.defect for s in rep.steps) <= 1e-10


def test_ellipsoid_strongly_pseudoconvex_point():
    s = 0.5
    rep = scale_sequence(Ellipsoid(2), [math.sqrt(1 - s ** 4), s], 10.0 ** -np.arange(1, 7))
    assert rep.decreasing and rep.final_defect < 1e-2
    # third order boundary terms are not normalized away, so the defect decays like sqrt(delta)
    d = [x.defect for x in rep.steps]
    assert d[-1] / d[-2] == pytest.approx(10 ** -0.5, rel=0.05)


def test_frame_is_unitary():
    for d, X in ((Ball(), [0.6, 0.8j]), (Ellipsoid(2), [math.sqrt(1 - 0.5 ** 4), 0.5])):
        f = BoundaryFrame.at(d, X)
        assert f.unitary_check() < 1e-12
        np.testing.assert_allclose(f.to_frame(f.X), 0, atol=1e-15)
        z = np.array([0.1, 0.2j])
        np.testing.assert_allclose(f.from_frame(f.to_frame(z)), z, atol=1e-13)


def test_frame_errors():
    with pytest.raises(FrameError):
        BoundaryFrame.at(Ball(), [0.5, 0.0])
    # weakly pseudoconvex point of the ellipsoid
    with pytest.raises(FrameError):
        BoundaryFrame.at(Ellipsoid(2), [1.0, 0.0])
    with pytest.raises(FrameError):
        scale_sequence(Bidisc(), [1.0, 1.0], [0.1])


def test_cayley_center():
    np.testing.assert_allclose(cayley(np.zeros(2)), [1.0, 0.0])
    assert Siegel().contains(cayley(np.zeros(2)))


def test_cayley_round_trip():
    z = Ball().sample(np.random.default_rng(0), 100)
    w = cayley(z)
    assert np.all(Siegel().contains(w))
    assert np.max(np.abs(cayley_inverse(w) - z)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, np.pi / 2), st.floats(0, 2 * np.pi))
def test_cayley_boundary_correspondence(t1, a, t2):
    # sphere points other than (-1, 0) land on Re w1 = |w2|^2
    x = np.array([math.cos(a) * np.exp(1j * t1), math.sin(a) * np.exp(1j * t2)])
    if abs(1 + x[0]) < 1e-3:
        return
    den = 1 + x[0]
    w1, w2 = (1 - x[0]) / den, x[1] / den
    assert abs(w1.real - abs(w2) ** 2) < 1e-9 * max(1.0, abs(w1))


def test_cayley_rejects_outside():
    with pytest.raises(DomainError):
        cayley(np.array([1.0, 0.5]))
    with pytest.raises(DomainError):
        cayley_inverse(np.array([0.1, 1.0]))
