import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bersaut.bergman import (ClosedFormKernel, NumericKernel, QuadratureSpec, bergman_metric, blowup_exponent,
                             build_numeric_kernel, ellipsoid_monomial_norm, holo_curvature, kernel_from_json,
                             klembeck_profile, transformation_residual)
from bersaut.domains import (Annulus, Ball, BallAutomorphism, Bidisc, Disk, DiskAutomorphism, Ellipsoid, Siegel,
                             random_automorphism)
from bersaut.errors import DegreeTooHighError, DomainError, StencilError, UsageError

D, B, BD, A = Disk(), Ball(), Bidisc(), Annulus(0.5)


@pytest.fixture(scope="module")
def ball12():
    return build_numeric_kernel(B, 12)


def test_disk_kernel_values():
    k = ClosedFormKernel(D)
    assert k(0j, 0j).real == pytest.approx(1 / math.pi, rel=1e-15)
    # orthonormal monomials sqrt((j+1)/pi) z^j summed directly
    oracle = sum((j + 1) / math.pi * 0.25 ** j for j in range(200))
    assert k(0.5, 0.5).real == pytest.approx(oracle, rel=1e-13)
    assert k(0.5, 0.5).real == pytest.approx(0.565884242104517, rel=1e-12)


def test_bidisc_kernel_origin():
    assert ClosedFormKernel(BD)(np.zeros(2), np.zeros(2)).real == pytest.approx(1 / math.pi ** 2)


def test_annulus_kernel_matches_monomial_series():
    k = ClosedFormKernel(A)
    z, w = 0.7 + 0.1j, 0.6 - 0.2j
    t = z * np.conj(w)
    # independent evaluation: sum over j of t^j / ||z^j||^2 with the norms integrated by quadrature
    total = 0
    for j in range(-150, 151):
        norm2 = 2 * math.pi * integrate.quad(lambda r: r ** (2 * j + 1), 0.5, 1, epsabs=0, epsrel=1e-13)[0]
        total += t ** j / norm2
    assert abs(k(z, w) - total) / abs(total) < 1e-10
    assert k.tail_bound(z, w) < 1e-20


def test_closed_form_rejects_other_domains():
    with pytest.raises(UsageError):
        ClosedFormKernel(Ellipsoid(2))
    with pytest.raises(DomainError):
        ClosedFormKernel(D)(1.2, 0.0)


@pytest.mark.parametrize("a,b", [(0, 0), (1, 0), (0, 1), (2, 3), (4, 1)])
def test_ellipsoid_norm_against_direct_integration(a, b):
    # |z1^a z2^b|^2 over {r1^2 + r2^4 < 1}, polar in both factors
    val = integrate.dblquad(lambda r2, r1: r1 ** (2 * a + 1) * r2 ** (2 * b + 1),
                            0, 1, 0, lambda r1: (1 - r1 ** 2) ** 0.25, epsabs=0, epsrel=1e-12)[0]
    assert ellipsoid_monomial_norm(2, a, b) == pytest.approx(4 * math.pi ** 2 * val, rel=1e-9)


def test_numeric_disk_converges():
    ref = ClosedFormKernel(D)(0.5, 0.5).real
    errs = [abs(build_numeric_kernel(D, n)(0.5, 0.5).real / ref - 1) for n in (10, 20, 40)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-6


def test_numeric_ball_matches_closed_form(ball12):
    z = np.array([0.3, 0.2])
    exact = 2 / (math.pi ** 2 * (1 - 0.13) ** 3)
    assert abs(ball12(z, z).real / exact - 1) < 1e-6


def test_numeric_ellipsoid_positive_diagonal():
    E = Ellipsoid(2)
    k = build_numeric_kernel(E, 12)
    z = E.sample(np.random.default_rng(0), 100)
    assert np.all(k.diag(z) > 0)


def test_numeric_norms_are_exact():
    k = build_numeric_kernel(Ellipsoid(2), 8)
    P, W = build_numeric_kernel(Ellipsoid(2), 3, QuadratureSpec(8, 8)).quadrature_nodes()
    assert len(P) == len(W)
    z = np.array([0.4, 0.3j])
    # the diagonal sum over orthogonal monomials uses the exact norms
    a = k.alphas
    direct = np.sum(np.abs(z[0] ** a[:, 0] * z[1] ** a[:, 1]) ** 2 / ellipsoid_monomial_norm(2, a[:, 0], a[:, 1]))
    assert k(z, z).real == pytest.approx(direct, rel=1e-10)


def test_reproducing_property_on_nodes():
    k = build_numeric_kernel(D, 5, QuadratureSpec(16, 16))
    P, W = k.quadrature_nodes()
    z0 = 0.3 + 0.2j
    for j in range(6):
        assert abs(np.sum(k(z0, P) * P ** j * W) - z0 ** j) < 1e-12


def test_degree_too_high():
    with pytest.raises(DegreeTooHighError) as info:
        build_numeric_kernel(D, 80, QuadratureSpec(64, 8, exact_angles=False))
    assert info.value.condition_number > 1e12
    with pytest.raises(UsageError):
        build_numeric_kernel(Siegel(), 4)


def test_numeric_json_round_trip():
    k = build_numeric_kernel(B, 6)
    k2 = kernel_from_json(k.to_json())
    assert isinstance(k2, NumericKernel)
    z = np.array([0.2, -0.1j])
    assert k2(z, z) == pytest.approx(k(z, z), rel=1e-13)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([D, A, B, BD]))
def test_kernel_matrix_is_positive_semidefinite(seed, d):
    k = ClosedFormKernel(d)
    z = d.sample(np.random.default_rng(seed), 12, clearance=0.1, boundary_bias=0.0)
    G = k.kernel_matrix(z, z)
    np.testing.assert_allclose(G, G.conj().T, rtol=1e-10, atol=1e-12)
    ev = np.linalg.eigvalsh((G + G.conj().T) / 2)
    assert ev.min() > -1e-8 * ev.max()


@pytest.mark.parametrize("z", [0j, 0.5 + 0.3j, 0.9, -0.7j])
def test_disk_curvature(z):
    c = holo_curvature(ClosedFormKernel(D), z)
    assert c.value == pytest.approx(-2.0, abs=1e-3)
    assert c.error < 1e-6


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_ball_curvature_any_direction(seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    c = holo_curvature(ClosedFormKernel(B), np.array([0.2, 0.1]), v)
    assert c.value == pytest.approx(-4 / 3, abs=1e-2)


def test_bidisc_curvature_along_factor():
    c = holo_curvature(ClosedFormKernel(BD), np.array([0.3, 0.0]), np.array([1.0, 0.0]))
    assert c.value == pytest.approx(-2.0, abs=1e-2)


def test_metric_disk():
    m = bergman_metric(ClosedFormKernel(D), 0.3)
    # d d-bar log K = 2 / (1 - |z|^2)^2
    assert m.g.real.ravel()[0] == pytest.approx(2 / (1 - 0.09) ** 2, rel=1e-10)


def test_curvature_stencil_failure():
    with pytest.raises(StencilError):
        holo_curvature(ClosedFormKernel(D), 0.3, radius=0.69)


def test_transformation_identity_and_mobius():
    k = ClosedFormKernel(D)
    rng = np.random.default_rng(1)
    Z, W = D.sample(rng, 100, boundary_bias=0.0), D.sample(rng, 100, boundary_bias=0.0)
    assert transformation_residual(k, DiskAutomorphism(0, 0), Z, W) == 0.0
    assert transformation_residual(k, DiskAutomorphism(0.5), Z, W) <= 1e-10


def test_transformation_numeric_ball_shrinks():
    rng = np.random.default_rng(3)
    Z = B.sample(rng, 50, boundary_bias=0.0) * 0.4
    W = B.sample(rng, 50, boundary_bias=0.0) * 0.4
    F = BallAutomorphism(np.array([0.3 * np.exp(0.7j), 0.1]))
    res = [transformation_residual(build_numeric_kernel(B, n), F, Z, W) for n in (12, 16)]
    assert res[0] <= 1e-4 and res[1] < res[0]


def test_transformation_random_catalog():
    rng = np.random.default_rng(4)
    for d in (D, A, B, BD):
        k = ClosedFormKernel(d)
        Z = d.sample(rng, 100, clearance=0.1, boundary_bias=0.0)
        W = d.sample(rng, 100, clearance=0.1, boundary_bias=0.0)
        assert transformation_residual(k, random_automorphism(d, rng), Z, W) <= 1e-9


def test_blowup_bidisc_face():
    fit = blowup_exponent(ClosedFormKernel(BD), np.array([1.0, 0.0]), 10.0 ** -np.arange(1, 5))
    assert fit.exponent == pytest.approx(2.0, abs=0.1)
    with pytest.raises(UsageError):
        blowup_exponent(ClosedFormKernel(D), 1.0, [0.1, 0.01])


def test_klembeck_model_cases():
    prof = klembeck_profile(ClosedFormKernel(B), np.array([1.0, 0.0]), 10.0 ** -np.arange(1, 4))
    assert np.all(np.abs(prof.values + 4 / 3) < 2e-2)
    assert prof.target == pytest.approx(-4 / 3)
    prof = klembeck_profile(ClosedFormKernel(D), 1.0, 10.0 ** -np.arange(1, 4))
    assert np.all(np.abs(prof.values + 2) < 1e-3)
    assert prof.to_csv().splitlines()[0] == "delta,curvature,error_estimate,deviation"
