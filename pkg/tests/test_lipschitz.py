import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bersaut.domains import Annulus, AnnulusAutomorphism, Ball, Disk, DiskAutomorphism, random_automorphism
from bersaut.errors import UsageError
from bersaut.lipschitz import CompactExhaustion, PairSampler, family_classify, lipschitz_norm

D = Disk()


def test_constant_has_zero_norm():
    assert lipschitz_norm(lambda z: 0 * z + 1, PairSampler(D, 2000)).value == 0.0


def test_identity_norm_is_one():
    assert lipschitz_norm(lambda z: z, PairSampler(D, 2000)).value == pytest.approx(1.0, abs=1e-9)


def test_mobius_lower_bound():
    est = lipschitz_norm(DiskAutomorphism(0.9), PairSampler(D, 10 ** 4), refine=8)
    # true norm 19; every sampled quotient is a lower bound
    assert 10 <= est.value <= 19 + 1e-9


def test_sampler_prefix_stable():
    s = PairSampler(D, seed=4)
    x1, y1 = s.pairs(300)
    x2, y2 = s.pairs(900)
    np.testing.assert_array_equal(x1, x2[:300])
    np.testing.assert_array_equal(y1, y2[:300])
    assert np.all(np.abs(x2 - y2) >= s.min_separation)
    with pytest.raises(UsageError):
        s.pairs(0)


@settings(max_examples=15, deadline=None)
@given(st.integers(100, 3000), st.integers(0, 1000))
def test_norm_monotone_in_budget(n, seed):
    f = DiskAutomorphism(0.7)
    s = PairSampler(D, seed=seed)
    assert lipschitz_norm(f, s, n).value <= lipschitz_norm(f, s, n + 500).value


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 3.0), st.integers(0, 1000))
def test_norm_of_linear_map(c, seed):
    v = lipschitz_norm(lambda z: c * z, PairSampler(D, 500, seed)).value
    # near pairs are 1e-8 apart at worst, so rounding enters at that level
    assert v == pytest.approx(c, rel=1e-7)


def test_ball_sampler():
    x, y = PairSampler(Ball(), 500).pairs()
    assert x.shape == (500, 2) and np.all(Ball().contains(y))


def test_exhaustion_nested():
    ex = CompactExhaustion(D)
    for small, big in zip(ex.sets, ex.sets[1:]):
        assert set(map(complex, small)) <= set(map(complex, big))
    with pytest.raises(UsageError):
        CompactExhaustion(D, clearances=(0.1, 0.2))


def test_family_rotations_equicontinuous():
    ex = CompactExhaustion(D)
    rep = family_classify(lambda z: z, [DiskAutomorphism(0, float(j)) for j in range(1, 13)], ex)
    assert rep.verdict == "equicontinuous"
    np.testing.assert_allclose(rep.norms, 1.0, atol=1e-8)


def test_family_drift_noncompact():
    ex = CompactExhaustion(D)
    auts = [DiskAutomorphism(1 - 2.0 ** -j) for j in range(1, 13)]
    rep = family_classify(lambda z: z, auts, ex)
    assert rep.verdict == "noncompact"
    expected = np.array([(2 - 2.0 ** -j) / 2.0 ** -j for j in range(1, 13)])
    assert np.all(rep.norms <= expected * (1 + 1e-9))
    assert np.all(rep.norms >= expected / 2)
    assert rep.evidence_csv().startswith("j,sampled_norm")


def test_family_annulus_random():
    A = Annulus(0.5)
    rng = np.random.default_rng(3)
    auts = [random_automorphism(A, rng) for _ in range(12)]
    rep = family_classify(lambda z: z, auts, CompactExhaustion(A, (0.2, 0.1, 0.05)))
    assert rep.verdict == "equicontinuous"


def test_family_annulus_flips():
    A = Annulus(0.5)
    auts = [AnnulusAutomorphism(0.5, float(j), bool(j % 2)) for j in range(1, 13)]
    rep = family_classify(lambda z: z, auts, CompactExhaustion(A, (0.2, 0.1, 0.05)))
    assert rep.verdict == "equicontinuous"
    # the flip r/z has derivative r/z^2, largest at the inner circle: 1/r
    assert rep.norms.max() == pytest.approx(2.0, rel=1e-7)


def test_family_needs_terms():
    with pytest.raises(UsageError):
        family_classify(lambda z: z, [], CompactExhaustion(D))
