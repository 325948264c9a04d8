"""Normal limits of automorphism sequences: constant or automorphism.

Limits are estimated on the levels of a compact exhaustion by averaging the
last quarter of the sequence.  A non-constant limit must be matched by a
catalog automorphism fitted by linear least squares; anything else is a
DichotomyViolation.
"""
from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .algebra import find_collision
from .domains import (Annulus, AnnulusAutomorphism, Automorphism, Ball, BallAutomorphism, Bidisc,
                      BidiscAutomorphism, Disk, DiskAutomorphism, ModelDomain, Siegel, SiegelAutomorphism)
from .errors import ConstructionError, DichotomyViolation, HypothesisFailure, UsageError
from .lipschitz import CompactExhaustion

MIN_TERMS = 20
TAIL_FRACTION = 0.25
DEFAULT_TOL = 1e-6
DEFAULT_CAUCHY_TOL = 1e-3


def _sup(x):
    x = np.abs(np.asarray(x))
    return float(np.max(x)) if x.size else 0.0


# --------------------------------------------------------------------------
# Fitting catalog automorphisms to sampled values
# --------------------------------------------------------------------------
def _fit_disk(z, w):
    # w = p z + q + r z w with p = e^{i theta}, q = -p a, r = conj(a)
    A = np.stack([z, np.ones_like(z), z * w], -1)
    (p, q, r), *_ = np.linalg.lstsq(A, w, rcond=None)
    a = -q / p
    return DiskAutomorphism(complex(a), float(np.angle(p)))


def _fit_annulus(d: Annulus, z, w):
    out = []
    for flip in (False, True):
        u = d.r / z if flip else z
        p = np.vdot(u, w) / np.vdot(u, u)
        out.append(lambda p=p, flip=flip: AnnulusAutomorphism(d.r, float(np.angle(p)), flip))
    return out


def _fit_ball(z, w):
    # w (1 - <z, a>) = A z + b  ->  w = A z + b + w (c . z), c = conj(a)
    n = len(z)
    rows, rhs = [], []
    for i in range(2):
        M = np.zeros((n, 8), complex)
        M[:, 2 * i:2 * i + 2] = z
        M[:, 4 + i] = 1.0
        M[:, 6:8] = w[:, i:i + 1] * z
        rows.append(M)
        rhs.append(w[:, i])
    sol, *_ = np.linalg.lstsq(np.concatenate(rows), np.concatenate(rhs), rcond=None)
    A = sol[:4].reshape(2, 2)
    b = sol[4:6]
    c = sol[6:8]

    def F(x):
        x = np.asarray(x, complex)
        return (x @ A.T + b) / (1 - x @ c)[..., None]

    return BallAutomorphism._from_map(F, np.conj(c))


def _fit_bidisc(z, w):
    out = []
    for swap in (False, True):
        ww = w[:, ::-1] if swap else w
        out.append(lambda ww=ww, swap=swap: BidiscAutomorphism(
            _fit_disk(z[:, 0], ww[:, 0]), _fit_disk(z[:, 1], ww[:, 1]), swap))
    return out


def _fit_siegel(z, w):
    A = np.concatenate([z, np.ones((len(z), 1))], axis=1)
    coef, *_ = np.linalg.lstsq(A, w, rcond=None)

    def F(x):
        x = np.asarray(x, complex)
        return x @ coef[:2] + coef[2]

    return SiegelAutomorphism._from_affine(F)


def fit_automorphism(domain: ModelDomain, z, w):
    """Best catalog automorphism F with F(z) ~ w; returns (F, sup residual)."""
    z = np.asarray(z, complex)
    w = np.asarray(w, complex)
    if isinstance(domain, Disk):
        cands = [lambda: _fit_disk(z, w)]
    elif isinstance(domain, Annulus):
        cands = _fit_annulus(domain, z, w)
    elif isinstance(domain, Ball):
        cands = [lambda: _fit_ball(z, w)]
    elif isinstance(domain, Bidisc):
        cands = _fit_bidisc(z, w)
    elif isinstance(domain, Siegel):
        cands = [lambda: _fit_siegel(z, w)]
    else:
        cands = []
    best, res = None, np.inf
    for make in cands:
        # an infeasible parameter (|a| >= 1, say) just drops the candidate
        try:
            F = make()
            r = _sup(F.apply(z) - w)
        except (ConstructionError, np.linalg.LinAlgError, ZeroDivisionError, FloatingPointError):
            continue
        if r < res:
            best, res = F, r
    return best, res


# --------------------------------------------------------------------------
# Normal limits
# --------------------------------------------------------------------------
class LevelRow(NamedTuple):
    level: int
    clearance: float
    tail_oscillation: float
    limit_oscillation: float
    fit_residual: float

    def to_json(self):
        return self._asdict()


class NormalLimitReport(NamedTuple):
    verdict: str
    limit: object
    levels: list
    injective: bool | None = None
    inverse_residual: float | None = None
    boundary_distance: float | None = None

    def to_json(self):
        limit = self.limit.to_json() if hasattr(self.limit, "to_json") else self.limit
        return {"verdict": self.verdict, "limit": limit, "levels": [r._asdict() for r in self.levels],
                "injective": self.injective, "inverse_residual": self.inverse_residual,
                "boundary_distance": self.boundary_distance}


def _tail(n):
    return max(2, int(round(n * TAIL_FRACTION)))


def _tail_limit(values):
    """Average of the last quarter and the sup deviation of the tail from it."""
    t = values[len(values) - _tail(len(values)):]
    lim = t.mean(axis=0)
    return lim, _sup(t - lim)


def normal_limit_classify(auts: Sequence[Automorphism], exhaustion: CompactExhaustion,
                          tol: float = DEFAULT_TOL, cauchy_tol: float = DEFAULT_CAUCHY_TOL) -> NormalLimitReport:
    """Classify the normal limit of phi_j as constant, automorphism or not_converged.

    ``cauchy_tol`` bounds the tail oscillation on every level; ``tol`` is the
    threshold for calling the limit constant and for the automorphism fit.
    """
    if len(auts) < MIN_TERMS:
        raise UsageError(f"need at least {MIN_TERMS} terms, got {len(auts)}")
    d = exhaustion.domain
    rows, limits = [], []
    for k, (K, cl) in enumerate(zip(exhaustion.sets, exhaustion.clearances), start=1):
        vals = np.array([a.apply(K) for a in auts])
        lim, osc = _tail_limit(vals)
        limits.append(lim)
        rows.append([k, cl, osc])
    if any(r[2] > cauchy_tol for r in rows):
        levels = [LevelRow(k, cl, osc, np.nan, np.nan) for k, cl, osc in rows]
        return NormalLimitReport("not_converged", None, levels)

    consts = [lim.mean(axis=0) for lim in limits]
    lim_osc = [_sup(lim - c) for lim, c in zip(limits, consts)]
    if all(o <= tol for o in lim_osc):
        value = consts[-1]
        levels = [LevelRow(k, cl, osc, lo, np.nan) for (k, cl, osc), lo in zip(rows, lim_osc)]
        bd = float(np.min(d.boundary_distance(np.asarray(value)))) if not bool(np.all(d.contains(value))) \
            else -float(np.min(d.boundary_distance(np.asarray(value))))
        return NormalLimitReport("constant", value if d.dim == 2 else complex(value), levels,
                                 boundary_distance=bd)

    K_all = exhaustion.sets[-1]
    F, _ = fit_automorphism(d, K_all, limits[-1])
    fit_res = [_sup(F.apply(K) - lim) if F is not None else np.inf
               for K, lim in zip(exhaustion.sets, limits)]
    levels = [LevelRow(k, cl, osc, lo, fr) for (k, cl, osc), lo, fr in zip(rows, lim_osc, fit_res)]
    if F is None or max(fit_res) > tol:
        raise DichotomyViolation(
            f"limit is neither constant (oscillation {max(lim_osc):.3e}) nor a catalog automorphism "
            f"(fit residual {min(fit_res):.3e}) at tolerance {tol:.1e}")
    injective = find_collision(F.apply, K_all, d) is None
    inv_res = _sup(F.inverse().apply(limits[-1]) - K_all)
    if not injective or inv_res > max(tol, 1e-9):
        raise DichotomyViolation("fitted automorphism failed the injectivity/inverse evidence test")
    return NormalLimitReport("automorphism", F, levels, injective, inv_res)


# --------------------------------------------------------------------------
# Composed sequences
# --------------------------------------------------------------------------
PART_B_NOTE = ("part (b) is measured, not asserted: the report gives the distance of every "
               "subsequential limit of h_k from the identity; when g is not an automorphism "
               "those limits can differ from the identity")


class Prop52Report(NamedTuple):
    g_is_automorphism: bool
    g_fit: object
    g_fit_residual: float
    f_injective: bool | None
    f_inverse_residual: float | None
    cluster_deviations: list
    h_tail_oscillation: float
    metadata: dict

    def to_json(self):
        g = self.g_fit.to_json() if hasattr(self.g_fit, "to_json") else None
        return {"g_is_automorphism": self.g_is_automorphism, "g_fit": g,
                "g_fit_residual": self.g_fit_residual, "f_injective": self.f_injective,
                "f_inverse_residual": self.f_inverse_residual,
                "h_limit_deviation_from_identity": self.cluster_deviations,
                "h_tail_oscillation": self.h_tail_oscillation, "metadata": self.metadata}


def _greedy_clusters(values, tol):
    """Group tail values whose sup-distance to a cluster seed is <= tol."""
    clusters = []
    for v in values[::-1]:
        for c in clusters:
            if _sup(v - c[0]) <= tol:
                c.append(v)
                break
        else:
            clusters.append([v])
    return [np.mean(c, axis=0) for c in clusters]


def prop52_check(f: Callable, auts: Sequence[Automorphism], exhaustion: CompactExhaustion,
                 tol: float = 1e-4, cauchy_tol: float | None = None) -> Prop52Report:
    """Examine g = lim f o phi_j and h_k = f o phi_{k+1} o phi_k^{-1}.

    (a) if g fits a catalog automorphism, report injectivity of f on the
    grid and the residual of the inverse candidate psi o g^{-1}
    (psi = lim phi_j when that exists);
    (b) cluster the tail of h_k and report sup |h - id| per cluster.
    """
    cauchy_tol = tol if cauchy_tol is None else cauchy_tol
    if len(auts) < MIN_TERMS:
        raise UsageError(f"need at least {MIN_TERMS} terms, got {len(auts)}")
    d = exhaustion.domain
    K = exhaustion.sets[-1]
    tail_idx = range(len(auts) - _tail(len(auts)), len(auts))
    gvals = np.array([np.asarray(f(auts[j].apply(K))) for j in tail_idx])
    g = gvals.mean(axis=0)
    if _sup(gvals - g) > cauchy_tol:
        raise HypothesisFailure(f"f o phi_j does not settle on the exhaustion (tail oscillation "
                                f"{_sup(gvals - g):.3e} > {cauchy_tol:.1e})")
    G, gres = fit_automorphism(d, K, g)
    g_aut = G is not None and gres <= tol
    f_inj = f_inv = None
    if g_aut:
        f_inj = find_collision(f, K, d) is None
        pvals = np.array([auts[j].apply(K) for j in tail_idx])
        plim = pvals.mean(axis=0)
        targets = d.sample(np.random.default_rng(1), 200, clearance=min(exhaustion.clearances),
                           boundary_bias=0.0)
        if _sup(pvals - plim) <= cauchy_tol:
            P, pres = fit_automorphism(d, K, plim)
            if P is not None and pres <= tol:
                cand = P.apply(G.inverse().apply(targets))
                f_inv = _sup(np.asarray(f(cand)) - targets)
    devs, hosc = [], 0.0
    hk = []
    for j in list(tail_idx)[:-1]:
        inv = auts[j].inverse()
        hk.append(np.asarray(f(auts[j + 1].apply(inv.apply(K)))))
    if hk:
        hk = np.array(hk)
        hosc = _sup(hk - hk.mean(axis=0))
        for c in _greedy_clusters(hk, max(cauchy_tol, tol)):
            devs.append(_sup(c - K))
    meta = {"tail_terms": len(tail_idx), "note": PART_B_NOTE}
    return Prop52Report(bool(g_aut), G, float(gres), f_inj, f_inv, devs, hosc, meta)
