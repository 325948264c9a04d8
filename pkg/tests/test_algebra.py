import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bersaut.algebra import (CompositionOperator, Probe, annulus_auto_classify, bers_recover, character_locate,
                             composition_action, evaluation_character, is_unital_hom, lipschitz_hom_bound,
                             standard_test_set)
from bersaut.domains import Annulus, AnnulusAutomorphism, Ball, Disk, DiskAutomorphism, random_automorphism
from bersaut.errors import (InvalidHomomorphism, NotPointEvaluation, OracleError, RecoveryFailure, UnitObstruction,
                            UsageError)
from bersaut.series import TruncatedLaurent

D = Disk()


@pytest.fixture(scope="module")
def grid():
    return D.sample(np.random.default_rng(0), 200)


def test_composition_is_hom(grid):
    phi = composition_action(DiskAutomorphism(0.4, np.pi / 3))
    rep = is_unital_hom(phi, standard_test_set(D), grid)
    assert rep.verdict and rep.residual_max <= 1e-12


def test_doubling_is_not_unital(grid):
    rep = is_unital_hom(lambda f: Probe(lambda z: 2 * f(z), "2f"), standard_test_set(D), grid)
    assert not rep.verdict
    assert rep.unit_residual == pytest.approx(1.0)


def test_shifted_composition_residual(grid):
    h = DiskAutomorphism(0.4, np.pi / 3)
    rep = is_unital_hom(lambda f: Probe(lambda z: f(h(z)) + 0.01, "f(h)+0.01"), standard_test_set(D), grid)
    assert not rep.verdict
    # phi(1) = 1.01 exactly; products pick up 0.01 (f + g) terms of size at most a few hundredths
    assert rep.unit_residual == pytest.approx(0.01)
    assert 0.01 <= rep.residual_max <= 0.1


def test_character_at_point():
    rep = character_locate(evaluation_character(0.3 + 0.1j), D)
    assert rep.c == 0.3 + 0.1j and rep.residual_max <= 1e-12


def test_character_through_mobius():
    h = DiskAutomorphism(0.4, np.pi / 3)
    c = 0.3 + 0.1j
    rep = character_locate(lambda f: f(np.asarray(h(c))), D)
    assert abs(rep.c - h(c)) < 1e-15


def test_character_outside_is_unit_obstruction():
    with pytest.raises(UnitObstruction):
        character_locate(evaluation_character(1.5), D)


def test_character_that_is_not_evaluation():
    # chi(id) is inside, but chi(z^2) != chi(z)^2
    def chi(f):
        return complex(f(np.asarray(0.2 + 0j))) + (0.05 if f.name == "z^2" else 0)
    with pytest.raises(NotPointEvaluation):
        character_locate(chi, D)


def test_oracle_failure_wrapped():
    def chi(f):
        raise KeyError("boom")
    with pytest.raises(OracleError):
        character_locate(chi, D)
    with pytest.raises(UsageError):
        is_unital_hom(chi, [])


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 0.95), st.floats(0, 2 * np.pi))
def test_character_locates_any_point(r, t):
    c = r * cmath.exp(1j * t)
    rep = character_locate(evaluation_character(c), D)
    assert abs(rep.c - c) <= 1e-15 and rep.residual_max <= 1e-10


def test_recover_planted_mobius(grid):
    h0 = DiskAutomorphism(0.4, np.pi / 3)
    rep = bers_recover(composition_action(h0), D, D, grid, inverse=h0.inverse().apply)
    assert np.max(np.abs(rep.h(grid) - h0(grid))) <= 1e-9
    assert rep.bijective and rep.injective_on_grid


def test_recover_square_not_injective(grid):
    rep = bers_recover(CompositionOperator(lambda z: z ** 2, D, D), D, D, grid)
    assert not rep.injective_on_grid
    z, w = rep.collision
    assert abs(z ** 2 - w ** 2) < 1e-10 and abs(z + w) < 1e-8
    assert rep.bijective is False


def test_recover_annulus_flip():
    A = Annulus(0.5)
    g = A.sample(np.random.default_rng(1), 200)
    fl = AnnulusAutomorphism(0.5, 0.0, True)
    rep = bers_recover(composition_action(fl), A, A, g, inverse=fl.apply)
    assert rep.bijective
    np.testing.assert_allclose(rep.h(g), 0.5 / g)


def test_recover_ball():
    B = Ball()
    rng = np.random.default_rng(2)
    g = B.sample(rng, 200)
    a = random_automorphism(B, rng)
    rep = bers_recover(composition_action(a), B, B, g, inverse=a.inverse().apply)
    assert rep.bijective and rep.residual_max <= 1e-8


def test_recover_rejects_bad_oracles(grid):
    with pytest.raises(InvalidHomomorphism):
        bers_recover(CompositionOperator(lambda z: 2 * z, D, D), D, D, grid)
    h = DiskAutomorphism(0.2)
    with pytest.raises(RecoveryFailure):
        bers_recover(lambda f: Probe(lambda z: f(h(z)) + (0 if f.name == "z" else 1e-3), "x"), D, D, grid)
    with pytest.raises(UsageError):
        bers_recover(composition_action(h), D, D, np.array([2.0 + 0j]))


def test_annulus_accepts_rotation():
    alpha = cmath.exp(1j * np.pi / 7)
    v = annulus_auto_classify(TruncatedLaurent({1: alpha}), 0.5)
    assert v.accepted and abs(v.alpha - alpha) < 1e-15


def test_annulus_rejects_contraction():
    v = annulus_auto_classify(TruncatedLaurent({1: 0.9}), 0.5)
    assert not v.accepted
    assert v.probe_radii[0] == pytest.approx(0.5 / 0.9, rel=1e-6)
    assert v.probe_radii[1] == pytest.approx(1 / 0.9, rel=1e-6)


def test_annulus_rejects_other_forms():
    assert annulus_auto_classify(TruncatedLaurent({2: 1.0}), 0.5).reason == "not surjective form"
    assert annulus_auto_classify(TruncatedLaurent({0: 0.0}), 0.5).reason == "zero map"
    with pytest.raises(UsageError):
        annulus_auto_classify(TruncatedLaurent({1: 1.0}), 1.5)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0.2, 0.8))
def test_annulus_rotation_property(t, r):
    assert annulus_auto_classify(TruncatedLaurent({1: cmath.exp(1j * t)}), r).accepted


def test_lipschitz_identity():
    rep = lipschitz_hom_bound(lambda z: z, D, D)
    assert rep.verdict and rep.lip_h == pytest.approx(1.0)
    for row in rep.rows:
        # the f-norm is taken over a superset of the pairs
        assert row["norm_f_h"] <= row["norm_f"]
        assert row["norm_f_h"] == pytest.approx(row["norm_f"], rel=1e-3)


def test_lipschitz_half():
    row = lipschitz_hom_bound(lambda z: 0.5 * z, D, D).rows[0]
    assert row["f"] == "z"
    assert row["norm_f_h"] == pytest.approx(0.5, rel=1e-12)
    assert row["bound"] == pytest.approx(0.5, rel=1e-12)


def test_lipschitz_mobius():
    h = DiskAutomorphism(0.9)
    rep = lipschitz_hom_bound(h, D, D, h_inverse=h.inverse().apply)
    # sup |h'| = (1 + 0.9) / (1 - 0.9)
    assert 15 <= rep.lip_h <= 19 + 1e-9
    assert rep.verdict
