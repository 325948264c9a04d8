"""Sampled Lipschitz norms and compactness evidence for families f o phi_j.

All norms here are lower bounds: the supremum of difference quotients is
taken over a finite, seeded set of point pairs (optionally improved by a
local hill climb).  Classifications quote the sampling budget they used.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ._io import csv_text
from .domains import Automorphism, ModelDomain, point_norm
from .errors import UsageError

CHUNK = 256
DEFAULT_PAIRS = 4096
DEFAULT_BLOWUP = 1e3
ASCOLI_TOL = 1e-6
# below this, rounding in f(x) - f(y) swamps the quotient
MIN_SEPARATION = 1e-8


@dataclass(frozen=True)
class PairSampler:
    """Seeded pairs of distinct domain points.

    Half of each chunk are far pairs (two independent samples), half are close
    pairs ``(x, x + eps u)`` with ``eps`` a log-uniform fraction of the
    boundary distance of ``x``; the close pairs see the derivative.  Pairs are
    generated chunk by chunk from ``(seed, chunk index)``, so the first ``n``
    pairs do not depend on how many are requested afterwards.
    """

    domain: ModelDomain
    n_pairs: int = DEFAULT_PAIRS
    seed: int = 0
    min_separation: float = MIN_SEPARATION

    def _chunk(self, k):
        d = self.domain
        rng = np.random.default_rng([self.seed, k])
        half = CHUNK // 2
        a = d.sample(rng, CHUNK)
        b = d.sample(rng, half)
        x = a[:half]
        base = a[half:]
        frac = 10 ** rng.uniform(-4, np.log10(0.5), half)
        dist = np.minimum(d.boundary_distance(base), 1.0)
        if d.dim == 1:
            u = np.exp(2j * np.pi * rng.random(half))
        else:
            g = rng.standard_normal((half, 4))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            u = g[:, 0::2] + 1j * g[:, 1::2]
            dist = dist[:, None]
            frac = frac[:, None]
        near = base + frac * dist * u
        xs = np.concatenate([x, base])
        ys = np.concatenate([b, near])
        ok = d.contains(ys) & (point_norm(xs - ys, d.dim) >= self.min_separation)
        return xs[ok], ys[ok]

    def pairs(self, n: int | None = None):
        n = self.n_pairs if n is None else n
        if n < 1:
            raise UsageError("pair count must be positive")
        xs, ys, have, k = [], [], 0, 0
        while have < n:
            x, y = self._chunk(k)
            xs.append(x)
            ys.append(y)
            have += len(x)
            k += 1
        return np.concatenate(xs)[:n], np.concatenate(ys)[:n]


class NormEstimate(NamedTuple):
    value: float
    pair: tuple
    n_pairs: int


def _quotients(f, x, y, dim):
    return np.abs(np.asarray(f(x)) - np.asarray(f(y))) / point_norm(x - y, dim)


def _real_basis(dim):
    if dim == 1:
        return np.array([1.0, 1j])
    return np.array([[1, 0], [1j, 0], [0, 1], [0, 1j]], dtype=complex)


def _local_stretch(f, d: ModelDomain, z):
    """Best short-pair quotient at each point of ``z`` (batched).

    The direction is the top right singular vector of a finite-difference
    real Jacobian; the returned quotient is evaluated on an actual pair
    ``(z, z + eps u)``, so it stays a genuine lower bound.
    """
    dim = d.dim
    basis = _real_basis(dim)
    eps = np.maximum(1e-3 * d.boundary_distance(z), 2 * MIN_SEPARATION)
    ez = eps[(...,) + (None,) * dim]
    probes = z[:, None] + ez * basis[None]
    f0 = np.asarray(f(z))
    df = (np.asarray(f(probes)) - f0[:, None]) / eps[:, None]
    J = np.stack([df.real, df.imag], axis=1)
    _, _, vt = np.linalg.svd(J)
    v = vt[:, 0]
    u = v[:, 0::2] + 1j * v[:, 1::2]
    if dim == 1:
        u = u[:, 0]
    w = z + eps[(...,) + (None,) * (dim - 1)] * u
    ok = d.contains(w)
    q = np.abs(np.asarray(f(w)) - f0) / point_norm(w - z, dim)
    return np.where(ok, q, -1.0), w


def _hill_climb(f, d: ModelDomain, z, rng, steps=300, width=8):
    """Move a point where the local stretch of ``f`` grows.

    Random search; step lengths are 1, 10, 100 and 1000 times a fraction of
    the boundary distance, so the point can still slide along the boundary
    once it is very close to it.
    """
    dim = d.dim
    shape = (width,) if dim == 1 else (width, 2)
    q, w = _local_stretch(f, d, np.array([z]))
    q, w = float(q[0]), w[0]
    scale = 0.5
    for _ in range(steps):
        u = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        u /= point_norm(u, dim)[(...,) + (None,) * (dim - 1)]
        mult = 10.0 ** (np.arange(width) % 4)
        h = np.minimum(scale * float(d.boundary_distance(z)) * mult, 0.5)
        cand = z + h[(...,) + (None,) * (dim - 1)] * u
        cand = cand[d.contains(cand)]
        if len(cand):
            vals, ws = _local_stretch(f, d, cand)
            k = int(np.argmax(vals))
            if vals[k] > q:
                z, w, q = cand[k], ws[k], float(vals[k])
                scale = min(scale * 2.0, 0.9)
                continue
        scale *= 0.5
        if scale < 1e-3:
            scale = 0.5
    return z, w, q


def lipschitz_norm(f: Callable, sampler: PairSampler, n: int | None = None,
                   refine: int = 0, refine_steps: int = 150) -> NormEstimate:
    """Largest sampled difference quotient of ``f``.

    With ``refine > 0`` the best ``refine`` pairs are additionally improved by
    a hill climb; the result is still a lower bound for the true norm but no
    longer monotone in ``n``.
    """
    d = sampler.domain
    x, y = sampler.pairs(n)
    q = _quotients(f, x, y, d.dim)
    if not np.all(np.isfinite(q)):
        raise FloatingPointError("function is not finite on the sampled pairs")
    order = np.argsort(q)[::-1]
    i = int(order[0])
    best = (float(q[i]), x[i], y[i])
    if refine:
        rng = np.random.default_rng([sampler.seed, 7919])
        for i in order[:refine]:
            a, b, v = _hill_climb(f, d, x[i], rng, refine_steps)
            if v > best[0]:
                best = (v, a, b)
    return NormEstimate(best[0], (best[1], best[2]), len(x))


@dataclass
class CompactExhaustion:
    """Nested point sets K_1 ⊂ K_2 ⊂ ... with clearances delta_k decreasing.

    Built from one master sample, so nestedness is automatic.
    """

    domain: ModelDomain
    clearances: Sequence[float] = (0.5, 0.25, 0.1, 0.05)
    n_points: int = 400
    seed: int = 0
    sets: list = field(init=False)

    def __post_init__(self):
        cl = [float(c) for c in self.clearances]
        if any(b >= a for a, b in zip(cl, cl[1:])) or min(cl) <= 0:
            raise UsageError("clearances must be positive and strictly decreasing")
        self.clearances = tuple(cl)
        rng = np.random.default_rng(self.seed)
        d = self.domain
        pts = d.sample(rng, self.n_points, clearance=cl[-1], boundary_bias=0.0)
        dist = d.boundary_distance(pts)
        self.sets = [pts[dist >= c] for c in cl]
        if any(len(s) < 2 for s in self.sets):
            raise UsageError("exhaustion level with fewer than two points; lower the first clearance")


class FamilyReport(NamedTuple):
    verdict: str
    norms: np.ndarray
    pairs: list
    budget: int
    factor: float
    level_bounds: list
    sup_bounds: list
    subsequence_gaps: list

    def to_json(self):
        return {"verdict": self.verdict, "budget": self.budget, "factor": self.factor,
                "norms": self.norms, "level_quotient_bounds": self.level_bounds,
                "level_sup_bounds": self.sup_bounds, "subsequence_gaps": self.subsequence_gaps}

    def evidence_csv(self) -> str:
        rows = []
        for j, (v, (a, b)) in enumerate(zip(self.norms, self.pairs), start=1):
            rows.append([j, float(v), _fmt_point(a), _fmt_point(b)])
        return csv_text(["j", "sampled_norm", "pair_x", "pair_y"], rows)


def _fmt_point(p):
    return " ".join(f"{complex(c).real:.15g}{complex(c).imag:+.15g}j" for c in np.atleast_1d(p))


def _greedy_gap(values):
    """Smallest sup-distance between consecutive members of a greedily chosen subsequence."""
    chosen = [len(values) // 2]
    rest = list(range(chosen[0] + 1, len(values)))
    gaps = []
    while rest:
        cur = values[chosen[-1]]
        dists = [np.max(np.abs(values[k] - cur)) for k in rest]
        k = int(np.argmin(dists))
        gaps.append(dists[k])
        chosen.append(rest[k])
        rest = rest[k + 1:]
    return float(min(gaps)) if gaps else 0.0


def family_classify(f: Callable, auts: Sequence[Automorphism], exhaustion: CompactExhaustion,
                    blowup_factor: float = DEFAULT_BLOWUP, sampler: PairSampler | None = None,
                    refine: int = 8) -> FamilyReport:
    """Classify {f o phi_j} as noncompact, equicontinuous or inconclusive.

    noncompact: the sampled norm at the end of the sequence exceeds
    ``blowup_factor`` times the first one, with a nondecreasing tail.
    equicontinuous: no such growth (max norm within sqrt(blowup_factor) of the
    first), and on every exhaustion level the difference quotients and sup
    norms are bounded uniformly in j.  The greedy-subsequence gaps of the finite
    Ascoli check are reported as evidence only.
    """
    if len(auts) == 0:
        raise UsageError("empty automorphism sequence")
    d = exhaustion.domain
    sampler = sampler or PairSampler(d)
    norms, pairs = [], []
    for a in auts:
        est = lipschitz_norm(lambda z, a=a: f(a.apply(z)), sampler, refine=refine)
        norms.append(est.value)
        pairs.append(est.pair)
    norms = np.array(norms)
    first = max(norms[0], 1e-300)
    tail = norms[len(norms) - max(2, len(norms) // 4):]
    grows = bool(norms[-1] >= blowup_factor * first and np.all(np.diff(tail) >= -1e-12 * tail[:-1]))

    level_bounds, sup_bounds, gaps = [], [], []
    uniform = True
    for K in exhaustion.sets:
        i, j = np.triu_indices(len(K), 1)
        values = np.array([np.asarray(f(a.apply(K))) for a in auts])
        sep = point_norm(K[i] - K[j], d.dim)
        quots = np.abs(values[:, i] - values[:, j]) / sep
        per_j = quots.max(axis=1)
        sups = np.abs(values).max(axis=1)
        level_bounds.append(float(per_j.max()))
        sup_bounds.append(float(sups.max()))
        gaps.append(_greedy_gap(values))
        if not (np.all(np.isfinite(per_j)) and np.all(np.isfinite(sups))):
            uniform = False
        elif per_j.max() > np.sqrt(blowup_factor) * max(per_j[0], 1e-300) and per_j.max() > 1e-12:
            uniform = False
    bounded_growth = bool(norms.max() <= np.sqrt(blowup_factor) * first or norms.max() <= 1e-12)

    if grows:
        verdict = "noncompact"
    elif bounded_growth and uniform:
        verdict = "equicontinuous"
    else:
        verdict = "inconclusive"
    return FamilyReport(verdict, norms, pairs, sampler.n_pairs, float(blowup_factor),
                        level_bounds, sup_bounds, gaps)
