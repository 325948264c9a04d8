"""Bergman kernels, metric, holomorphic sectional curvature and the
biholomorphic transformation law.

Closed forms cover the disk, ball, bidisc and annulus.  Numeric kernels
orthonormalize monomials on Reinhardt domains with a tensor quadrature:
Gauss-Legendre in radial variables and the trapezoid rule in each angle.
The trapezoid rule integrates e^{i k theta} exactly to zero unless k is a
multiple of the node count, so the Gram matrix splits into blocks of
multi-indices congruent modulo the angular node counts.  With enough angular
nodes every block is a single monomial.

Derivatives of log K are Taylor coefficients read off by the discrete Cauchy
formula on a small polydisc around the point: sample L(s, t) = log K(z + s, z + t)
on circles, FFT in s and inverse FFT in conj(t).  This needs only kernel
values and avoids the cancellation of high-order difference stencils.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import roots_legendre

from ._io import csv_text
from .domains import Annulus, Automorphism, Ball, Bidisc, Disk, Ellipsoid, ModelDomain, domain_from_json
from .errors import DegreeTooHighError, DomainError, StencilError, UsageError

ANNULUS_TERMS = 200
MAX_CONDITION = 1e12
CAUCHY_POINTS = 16
# curvature changes below this are cancellation noise in log K, not convergence
ROUNDOFF_FLOOR = 1e-10


class KernelModel:
    domain: ModelDomain
    mode: str = ""

    def _check(self, *pts):
        for p in pts:
            if not np.all(self.domain.contains(p)):
                raise DomainError(f"kernel evaluated outside the {self.domain.kind}")

    def _pair(self, z, w):
        raise NotImplementedError

    def __call__(self, z, w):
        """K(z, w), broadcasting over leading axes."""
        z = np.asarray(z, complex)
        w = np.asarray(w, complex)
        self._check(z, w)
        return self._pair(z, w)

    def kernel_matrix(self, Z, W):
        """Matrix K(Z_i, W_j)."""
        Z = np.asarray(Z, complex)
        W = np.asarray(W, complex)
        self._check(Z, W)
        if self.domain.dim == 1:
            return self._pair(Z[:, None], W[None, :])
        return self._pair(Z[:, None, :], W[None, :, :])

    def diag(self, z):
        return self(z, z).real


@dataclass(frozen=True)
class ClosedFormKernel(KernelModel):
    domain: ModelDomain
    terms: int = ANNULUS_TERMS
    mode = "closed_form"

    def __post_init__(self):
        if not isinstance(self.domain, (Disk, Ball, Bidisc, Annulus)):
            raise UsageError(f"no closed-form kernel for {self.domain.kind}")

    def _pair(self, z, w):
        d = self.domain
        if isinstance(d, Disk):
            return 1.0 / (np.pi * (1.0 - z * np.conj(w)) ** 2)
        if isinstance(d, Ball):
            ip = np.sum(z * np.conj(w), axis=-1)
            return 2.0 / (np.pi ** 2 * (1.0 - ip) ** 3)
        if isinstance(d, Bidisc):
            t = z * np.conj(w)
            return 1.0 / (np.pi ** 2 * (1.0 - t[..., 0]) ** 2 * (1.0 - t[..., 1]) ** 2)
        return self._annulus(z * np.conj(w))

    def _annulus_coeffs(self):
        r, J = self.domain.r, self.terms
        j = np.arange(-J, J + 1, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = (j + 1) / (np.pi * (1.0 - r ** (2 * j + 2)))
        c[J - 1] = 1.0 / (2 * np.pi * math.log(1.0 / r))
        return c

    def _annulus(self, t):
        J = self.terms
        c = self._annulus_coeffs()
        pos = np.zeros(np.shape(t), complex)
        for k in range(J, -1, -1):
            pos = pos * t + c[J + k]
        inv = 1.0 / t
        neg = np.zeros(np.shape(t), complex)
        for k in range(J, 0, -1):
            neg = neg * inv + c[J - k]
        return pos + neg * inv

    def tail_bound(self, z, w):
        """Bound on the annulus series terms beyond |j| = terms."""
        if not isinstance(self.domain, Annulus):
            return 0.0
        r, J = self.domain.r, self.terms
        x = np.abs(np.asarray(z) * np.conj(np.asarray(w)))
        pos = x ** (J + 1) * ((J + 2) - (J + 1) * x) / (1 - x) ** 2 / (np.pi * (1 - r ** (2 * J + 4)))
        y = r ** 2 / x
        neg = y ** (J + 1) * ((J + 1) - J * y) / (1 - y) ** 2 / (np.pi * r ** 2 * (1 - r ** (2 * J)))
        return pos + neg

    def to_json(self):
        out = {"mode": self.mode, "domain": self.domain.to_json()}
        if isinstance(self.domain, Annulus):
            out["terms"] = self.terms
        return out


# --------------------------------------------------------------------------
# Quadrature and numeric kernels
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts per radial variable and per angle.

    Radial counts are raised automatically to the Gauss-Legendre exactness
    requirement of the index set; angular counts are raised to make the Gram
    matrix diagonal unless ``exact_angles`` is False.
    """

    n_radial: int = 64
    n_angular: int = 160
    exact_angles: bool = True

    def to_json(self):
        return {"n_radial": self.n_radial, "n_angular": self.n_angular, "exact_angles": self.exact_angles}


def _gauss(n, a=0.0, b=1.0):
    x, w = roots_legendre(n)
    return (b - a) / 2 * x + (a + b) / 2, (b - a) / 2 * w


def index_set(domain: ModelDomain, degree: int, max_orders=None) -> np.ndarray:
    """Monomial exponents: |j| <= degree (annulus), total degree <= degree in
    two variables, or the box given by ``max_orders``."""
    if degree < 0:
        raise UsageError("degree must be nonnegative")
    if domain.dim == 1:
        lo = -degree if isinstance(domain, Annulus) else 0
        return np.arange(lo, degree + 1)[:, None]
    if max_orders is not None:
        A, B = (int(m) for m in max_orders)
        a, b = np.meshgrid(np.arange(A + 1), np.arange(B + 1), indexing="ij")
        return np.stack([a.ravel(), b.ravel()], -1)
    return np.array([(a, s - a) for s in range(degree + 1) for a in range(s + 1)])


class RadialRule(NamedTuple):
    """Separable radial rule; ``moment(p)`` integrates |z^p|^2-type weights."""

    moment: object
    nodes: tuple
    n_nodes: int


def _radial_rule(domain: ModelDomain, alphas: np.ndarray, n_radial: int):
    """Return f(p) = integral of prod |z_k|^{2 p_k} (p may be half-integer
    per coordinate), evaluated with a tensor Gauss-Legendre rule, and the
    radial nodes/weights for materializing the full rule."""
    top = alphas.max(axis=0)
    if isinstance(domain, Disk):
        n = max(n_radial, int(top[0]) + 2)
        u, w = _gauss(n)

        def moment(p):
            return np.pi * np.sum(w * u ** p[..., 0, None], axis=-1)
        return RadialRule(moment, ((np.sqrt(u), np.pi * w),), n)
    if isinstance(domain, Annulus):
        r = domain.r
        span = max(abs(int(alphas.min())), int(top[0])) + 1
        n = max(n_radial, span + 2)
        x, w = _gauss(n, 2 * math.log(r), 0.0)

        def moment(p):
            return np.pi * np.sum(w * np.exp(x * (p[..., 0, None] + 1)), axis=-1)
        return RadialRule(moment, ((np.exp(x / 2), np.pi * w * np.exp(x)),), n)
    if isinstance(domain, Bidisc):
        n1, n2 = max(n_radial, int(top[0]) + 2), max(n_radial, int(top[1]) + 2)
        u1, w1 = _gauss(n1)
        u2, w2 = _gauss(n2)

        def moment(p):
            return (np.pi * np.sum(w1 * u1 ** p[..., 0, None], axis=-1)
                    * np.pi * np.sum(w2 * u2 ** p[..., 1, None], axis=-1))
        return RadialRule(moment, ((np.sqrt(u1), np.pi * w1), (np.sqrt(u2), np.pi * w2)), n1 * n2)
    if isinstance(domain, (Ball, Ellipsoid)):
        m = 1 if isinstance(domain, Ball) else int(domain.m)
        need = m * (int(top[0]) + 1) + int(top[1]) + 2
        n = max(n_radial, need // 2 + 2)
        sg, ws = _gauss(n)
        nu, wn = _gauss(n)

        def moment(p):
            p1, p2 = p[..., 0, None], p[..., 1, None]
            a = np.sum(ws * sg ** (m + m * p1 + p2), axis=-1)
            b = np.sum(wn * (1 - nu ** m) ** p1 * nu ** p2, axis=-1)
            return np.pi ** 2 * m * a * b

        # materialized nodes on (sigma, nu): r1 = sqrt(s (1 - tau)), r2 = (s tau)^{1/(2m)}
        S, N = np.meshgrid(sg, nu, indexing="ij")
        s, tau = S ** m, N ** m
        r1 = np.sqrt(s * (1 - tau)).ravel()
        r2 = ((s * tau) ** (1.0 / (2 * m))).ravel()
        wt = (np.pi ** 2 * m * S ** m * ws[:, None] * wn[None, :]).ravel()
        return RadialRule(moment, ((r1, r2), wt), n * n)
    raise UsageError(f"no quadrature for {domain.kind}")


def ellipsoid_monomial_norm(m: int, a, b):
    """Exact squared L2 norm of z1^a z2^b on {|z1|^2 + |z2|^{2m} < 1}."""
    from scipy.special import gammaln
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return np.exp(2 * np.log(np.pi) + gammaln(a + 1) + gammaln((b + 1) / m) - np.log(m)
                  - gammaln(a + 2 + (b + 1) / m))


class GramBlock(NamedTuple):
    rows: np.ndarray
    H: np.ndarray


@dataclass
class NumericKernel(KernelModel):
    domain: ModelDomain
    degree: int
    alphas: np.ndarray
    blocks: list
    quadrature: QuadratureSpec
    condition_number: float
    n_nodes: int
    n_angular: tuple
    mode: str = "numeric"
    _diag: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if all(len(b.rows) == 1 for b in self.blocks):
            h = np.zeros(len(self.alphas), complex)
            for b in self.blocks:
                h[b.rows[0]] = b.H[0, 0]
            self._diag = h

    def monomials(self, z):
        z = np.asarray(z, complex)
        if self.domain.dim == 1:
            return z[..., None] ** self.alphas[:, 0]
        return z[..., 0, None] ** self.alphas[:, 0] * z[..., 1, None] ** self.alphas[:, 1]

    def _pair(self, z, w):
        Mz, Mw = self.monomials(z), np.conj(self.monomials(w))
        if self._diag is not None:
            return np.sum(Mz * self._diag * Mw, axis=-1)
        out = 0
        for b in self.blocks:
            out = out + np.einsum("...i,ij,...j->...", Mz[..., b.rows], b.H, Mw[..., b.rows])
        return out

    def kernel_matrix(self, Z, W):
        Z = np.asarray(Z, complex)
        W = np.asarray(W, complex)
        self._check(Z, W)
        Mz, Mw = self.monomials(Z), np.conj(self.monomials(W))
        if self._diag is not None:
            return (Mz * self._diag) @ Mw.T
        out = np.zeros((len(Z), len(W)), complex)
        for b in self.blocks:
            out += Mz[:, b.rows] @ b.H @ Mw[:, b.rows].T
        return out

    def orthonormal_basis(self, z):
        """Values of an orthonormal basis of the polynomial space at z."""
        M = self.monomials(z)
        cols = []
        for b in self.blocks:
            # H = conj(G^{-1}); an orthonormal basis is M G^{-1/2} via Cholesky of conj(H)
            L = np.linalg.cholesky(np.conj(b.H))
            cols.append(M[..., b.rows] @ np.conj(L))
        return np.concatenate(cols, axis=-1)

    def quadrature_nodes(self):
        """Materialized tensor rule: points and weights (for small degrees)."""
        rule = _radial_rule(self.domain, self.alphas, self.quadrature.n_radial)
        nt = self.n_angular
        if self.domain.dim == 1:
            r, w = rule.nodes[0]
            th = 2 * np.pi * np.arange(nt[0]) / nt[0]
            pts = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
            wts = np.repeat(w / nt[0], nt[0])
            return pts, wts
        if isinstance(self.domain, Bidisc):
            (r1, w1), (r2, w2) = rule.nodes
            R1, R2 = np.meshgrid(r1, r2, indexing="ij")
            r1, r2, wr = R1.ravel(), R2.ravel(), np.outer(w1, w2).ravel()
        else:
            (r1, r2), wr = rule.nodes
        t1 = np.exp(2j * np.pi * np.arange(nt[0]) / nt[0])
        t2 = np.exp(2j * np.pi * np.arange(nt[1]) / nt[1])
        z1 = r1[:, None, None] * t1[None, :, None] * np.ones(nt[1])[None, None, :]
        z2 = r2[:, None, None] * np.ones(nt[0])[None, :, None] * t2[None, None, :]
        w = wr[:, None, None] * np.full((1, nt[0], nt[1]), 1.0 / (nt[0] * nt[1]))
        return np.stack([z1.ravel(), z2.ravel()], -1), w.ravel()

    def to_json(self):
        coeffs = []
        for b in self.blocks:
            coeffs.append({"indices": self.alphas[b.rows].tolist(),
                           "H": [[[x.real, x.imag] for x in row] for row in b.H]})
        return {"mode": self.mode, "domain": self.domain.to_json(), "degree": self.degree,
                "quadrature": self.quadrature.to_json(), "n_angular": list(self.n_angular),
                "condition_number": self.condition_number, "n_nodes": self.n_nodes,
                "coefficients": coeffs}

    @classmethod
    def from_json(cls, data):
        d = domain_from_json(data["domain"])
        alphas, blocks = [], []
        for blk in data["coefficients"]:
            start = len(alphas)
            alphas.extend(blk["indices"])
            H = np.array([[complex(x[0], x[1]) for x in row] for row in blk["H"]])
            blocks.append(GramBlock(np.arange(start, len(alphas)), H))
        q = data.get("quadrature", {})
        return cls(d, int(data["degree"]), np.array(alphas, dtype=int).reshape(len(alphas), d.dim), blocks,
                   QuadratureSpec(**q), float(data.get("condition_number", 1.0)),
                   int(data.get("n_nodes", 0)), tuple(data.get("n_angular", ())))


def build_numeric_kernel(domain: ModelDomain, degree: int, quadrature: QuadratureSpec | None = None,
                         max_orders=None, max_condition: float = MAX_CONDITION) -> NumericKernel:
    """Orthonormalize monomials under the quadrature inner product.

    Each congruence block of the Gram matrix is equilibrated (scaled to unit
    diagonal) and Cholesky-factored; a block whose equilibrated condition
    number exceeds ``max_condition`` raises DegreeTooHighError.
    """
    if not domain.bounded:
        raise UsageError("numeric kernels need a bounded domain")
    q = quadrature or QuadratureSpec()
    alphas = index_set(domain, degree, max_orders)
    rule = _radial_rule(domain, alphas, q.n_radial)
    span = alphas.max(axis=0) - alphas.min(axis=0)
    if q.exact_angles:
        n_ang = tuple(max(q.n_angular, int(s) + 1) for s in span)
    else:
        n_ang = (q.n_angular,) * domain.dim
    keys = [tuple(int(a) % n for a, n in zip(row, n_ang)) for row in alphas]
    groups: dict = {}
    for i, k in enumerate(keys):
        groups.setdefault(k, []).append(i)
    blocks, worst = [], 1.0
    for rows in groups.values():
        rows = np.array(rows)
        A = alphas[rows].astype(float)
        P = (A[:, None, :] + A[None, :, :]) / 2
        G = rule.moment(P)
        dg = np.sqrt(np.diag(G).real)
        if np.any(~(dg > 0)) or not np.all(np.isfinite(G)):
            raise DegreeTooHighError(np.inf)
        Ge = G / np.outer(dg, dg)
        cond = float(np.linalg.cond(Ge)) if len(rows) > 1 else 1.0
        worst = max(worst, cond)
        if cond > max_condition:
            raise DegreeTooHighError(cond)
        Ginv = cho_solve(cho_factor(Ge), np.eye(len(rows))) / np.outer(dg, dg)
        blocks.append(GramBlock(rows, np.conj(Ginv)))
    n_nodes = rule.n_nodes * int(np.prod(n_ang))
    return NumericKernel(domain, int(degree), alphas, blocks, q, worst, n_nodes, n_ang)


def kernel_from_json(data):
    if data.get("mode") == "numeric":
        return NumericKernel.from_json(data)
    return ClosedFormKernel(domain_from_json(data["domain"]), int(data.get("terms", ANNULUS_TERMS)))


# --------------------------------------------------------------------------
# Metric and curvature
# --------------------------------------------------------------------------
class MetricTensor(NamedTuple):
    g: np.ndarray
    error: float
    radius: float


class Curvature(NamedTuple):
    value: float
    error: float
    radius: float


def _stencil_radius(k: KernelModel, z, radius):
    clearance = float(np.min(k.domain.boundary_distance(np.asarray(z))))
    if radius is None:
        radius = min(0.25, clearance / 4)
    if not radius > 0 or radius * math.sqrt(k.domain.dim) >= clearance:
        raise StencilError(f"clearance {clearance:.3e} too small for a stencil of radius {radius}")
    return radius


def _log_taylor(k: KernelModel, z, rho, N):
    """C[p, q] ~ coefficient of s^p conj(t)^q in log K(z + s, z + t)."""
    n = k.domain.dim
    ang = np.exp(2j * np.pi * np.arange(N) / N)
    if n == 1:
        S = z + rho * ang
    else:
        g1, g2 = np.meshgrid(ang, ang, indexing="ij")
        S = z + rho * np.stack([g1.ravel(), g2.ravel()], -1)
    K = k.kernel_matrix(S, S)
    K0 = complex(k(z, z))
    if not np.all(np.isfinite(K)) or np.max(np.abs(np.angle(K / K0))) >= np.pi / 2:
        raise StencilError("log K is not single valued on the stencil; reduce the radius")
    L = np.log(K0) + np.log(K / K0)
    L = L.reshape((N,) * (2 * n))
    for ax in range(n):
        L = np.fft.fft(L, axis=ax) / N
    for ax in range(n, 2 * n):
        L = np.fft.ifft(L, axis=ax)
    return L


def _tensors(k, z, rho, N):
    n = k.domain.dim
    C = _log_taylor(k, z, rho, N)
    E = np.eye(n, dtype=int)

    def coef(p, q):
        return C[tuple(p) + tuple(q)] / rho ** (sum(p) + sum(q))

    def fac(p):
        return math.prod(math.factorial(int(x)) for x in p)

    g = np.array([[coef(E[i], E[j]) for j in range(n)] for i in range(n)])
    T3 = np.zeros((n, n, n), complex)
    T4 = np.zeros((n, n, n, n), complex)
    for kk, i, j in itertools.product(range(n), repeat=3):
        p = E[i] + E[kk]
        T3[kk, i, j] = fac(p) * coef(p, E[j])
    for kk, l, i, j in itertools.product(range(n), repeat=4):
        p, q = E[i] + E[kk], E[j] + E[l]
        T4[kk, l, i, j] = fac(p) * fac(q) * coef(p, q)
    return g, T3, T4


def _curvature_from(g, T3, T4, v):
    gvv = np.einsum("i,j,ij", v, v.conj(), g).real
    A = np.einsum("k,i,kiq->q", v, v, T3)
    second = A.conj() @ np.linalg.solve(g.conj(), A)
    fourth = np.einsum("k,l,i,j,klij", v, v.conj(), v, v.conj(), T4)
    return float((2 * (second - fourth) / gvv ** 2).real)


def _point(k, z):
    z = np.asarray(z, complex)
    if k.domain.dim == 2 and z.shape != (2,):
        raise UsageError("expected a single point")
    k._check(z)
    return z


def bergman_metric(k: KernelModel, z, radius: float | None = None, n_points: int = CAUCHY_POINTS) -> MetricTensor:
    """g_{i jbar} = d^2 log K(z, z) / dz_i dconj(z_j)."""
    z = _point(k, z)
    rho = _stencil_radius(k, z, radius)
    g = _tensors(k, z, rho, n_points)[0]
    g2 = _tensors(k, z, rho / 2, n_points)[0]
    g = (g + g.conj().T) / 2
    return MetricTensor(g, float(np.max(np.abs(g - g2))), rho)


def holo_curvature(k: KernelModel, z, v=None, radius: float | None = None,
                   n_points: int = CAUCHY_POINTS) -> Curvature:
    """Holomorphic sectional curvature of the Bergman metric at z along v.

    Normalized so the disk has constant curvature -2 and the ball in C^2 -4/3.
    The error estimate is the change when the contour radius is halved.
    """
    z = _point(k, z)
    n = k.domain.dim
    v = np.ones(n, complex) if v is None else np.atleast_1d(np.asarray(v, complex))
    if v.shape != (n,) or not np.any(v):
        raise UsageError("direction must be a nonzero vector of the domain dimension")
    rho = _stencil_radius(k, z, radius)
    val = _curvature_from(*_tensors(k, z, rho, n_points), v)
    half = _curvature_from(*_tensors(k, z, rho / 2, n_points), v)
    return Curvature(val, abs(val - half), rho)


# --------------------------------------------------------------------------
# Transformation law, blow-up, curvature profiles
# --------------------------------------------------------------------------
def transformation_residual(k: KernelModel, F: Automorphism, Z, W) -> float:
    """max |Jac F(z) K(F z, F w) conj(Jac F(w)) - K(z, w)| / |K(z, w)| over pairs."""
    Z = np.asarray(Z, complex)
    W = np.asarray(W, complex)
    lhs = F.jacobian(Z) * k(F.apply(Z), F.apply(W)) * np.conj(F.jacobian(W))
    rhs = k(Z, W)
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


class BlowupFit(NamedTuple):
    exponent: float
    intercept: float
    max_residual: float
    deltas: np.ndarray
    values: np.ndarray

    def to_json(self):
        return self._asdict()


def inward_points(domain: ModelDomain, X, deltas):
    X = np.asarray(X, complex)
    n = domain.inner_normal(X)
    d = np.asarray(deltas, float)
    return X + (d[:, None] * n if domain.dim == 2 else d * n)


def blowup_exponent(k: KernelModel, X, deltas: Sequence[float]) -> BlowupFit:
    """Least-squares slope of log K(z_d, z_d) against log(1/d) along the inner normal."""
    deltas = np.asarray(deltas, float)
    if len(deltas) < 3:
        raise UsageError("need at least three deltas")
    pts = inward_points(k.domain, X, deltas)
    vals = k.diag(pts)
    x, y = np.log(1 / deltas), np.log(vals)
    A = np.stack([x, np.ones_like(x)], -1)
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    return BlowupFit(float(slope), float(icpt), float(np.max(np.abs(A @ [slope, icpt] - y))), deltas, vals)


class CurvatureProfile(NamedTuple):
    deltas: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    target: float
    truncated: bool
    improving: bool

    def to_json(self):
        return self._asdict()

    def to_csv(self):
        rows = [[float(d), float(v), float(e), float(v - self.target)]
                for d, v, e in zip(self.deltas, self.values, self.errors)]
        return csv_text(["delta", "curvature", "error_estimate", "deviation"], rows)


def klembeck_profile(k: KernelModel, X, deltas: Sequence[float], v=None, n_points: int = CAUCHY_POINTS):
    """Curvature at points moved inward from X; target -4/(n+1).

    Stencil failures end the profile early (``truncated``).  ``improving``
    means the distance to the target shrank from the first to the last delta
    by more than the two error estimates combined plus ROUNDOFF_FLOOR.
    """
    n = k.domain.dim
    target = -4.0 / (n + 1)
    pts = inward_points(k.domain, X, deltas)
    vals, errs, used = [], [], []
    truncated = False
    for d, p in zip(deltas, pts):
        try:
            c = holo_curvature(k, p, v, n_points=n_points)
        except StencilError:
            truncated = True
            break
        vals.append(c.value)
        errs.append(c.error)
        used.append(d)
    vals = np.array(vals)
    improving = bool(len(vals) >= 2 and abs(vals[0] - target) - abs(vals[-1] - target)
                     > errs[0] + errs[-1] + ROUNDOFF_FLOOR)
    return CurvatureProfile(np.array(used), vals, np.array(errs), target, truncated, improving)
