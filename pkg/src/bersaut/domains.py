"""Model domains and their closed-form automorphisms.

Points of planar domains are complex scalars or arrays; points of the
two-variable domains are complex arrays whose last axis has length 2.

Ball automorphisms are parametrized as ``F = U o psi_a`` with
``psi_a(z) = (P_a z - a + s_a Q_a z) / (1 - <z, a>)``, ``s_a = sqrt(1 - |a|^2)``,
``P_a`` the orthogonal projection onto ``a`` and ``Q_a = I - P_a``.  So
``psi_a(a) = 0``, ``psi_0 = id``, and in one variable ``psi_a`` is the usual
``(z - a)/(1 - conj(a) z)``.  ``psi_a`` is minus the classical involution
``phi_a``, hence ``psi_a^{-1}(w) = -psi_a(-w)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConstructionError, DomainError, FrameError, UsageError

ACCUMULATION_TAIL = 10
ACCUMULATION_THRESHOLD = 1e-3


def _as_points(z, dim):
    z = np.asarray(z, dtype=complex)
    if dim == 2 and z.shape[-1:] != (2,):
        raise DomainError(f"expected points with last axis of length 2, got shape {z.shape}")
    return z


def point_norm(z, dim):
    z = np.asarray(z)
    return np.abs(z) if dim == 1 else np.linalg.norm(z, axis=-1)


# --------------------------------------------------------------------------
# Domains
# --------------------------------------------------------------------------
class ModelDomain:
    kind: str = ""
    dim: int = 1
    bounded: bool = True

    def params(self) -> dict:
        return {}

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params()}

    def rho(self, z):
        raise NotImplementedError

    def contains(self, z):
        return self.rho(_as_points(z, self.dim)) < 0

    def boundary_distance(self, z):
        raise NotImplementedError

    def inner_normal(self, X):
        raise NotImplementedError

    def project_to_boundary(self, z):
        return z

    def inradius(self) -> float:
        return 1.0

    def _uniform(self, rng, n):
        raise NotImplementedError

    def _near_boundary(self, rng, n):
        raise NotImplementedError

    def sample(self, rng, n: int, clearance: float = 0.0, boundary_bias: float = 0.5):
        """Draw ``n`` interior points, a ``boundary_bias`` share of them
        concentrated near the boundary (log-uniform boundary distance).

        Consumes ``rng`` deterministically, so a fixed seed reproduces the
        same points.
        """
        out = []
        have = 0
        for _ in range(10000):
            if have >= n:
                break
            m = max(2 * (n - have), 16)
            near = rng.random(m) < boundary_bias
            pts = self._uniform(rng, m)
            nb = self._near_boundary(rng, m)
            pts = np.where(near[:, None], nb, pts) if self.dim == 2 else np.where(near, nb, pts)
            ok = self.contains(pts)
            if clearance > 0:
                ok &= self.boundary_distance(pts) >= clearance
            pts = pts[ok]
            out.append(pts)
            have += len(pts)
        else:
            raise UsageError("could not draw enough interior points; clearance too large?")
        return np.concatenate(out)[:n]


def _log_uniform(rng, n, lo=1e-5, hi=1.0):
    return 10 ** rng.uniform(np.log10(lo), np.log10(hi), n)


def _unit_complex(rng, n):
    return np.exp(2j * np.pi * rng.random(n))


@dataclass(frozen=True)
class Disk(ModelDomain):
    kind = "disk"
    dim = 1

    def rho(self, z):
        return np.abs(z) ** 2 - 1.0

    def boundary_distance(self, z):
        return np.abs(1.0 - np.abs(z))

    def inner_normal(self, X):
        return -X / abs(X)

    def project_to_boundary(self, z):
        return z / np.abs(z)

    def _uniform(self, rng, n):
        return np.sqrt(rng.random(n)) * _unit_complex(rng, n)

    def _near_boundary(self, rng, n):
        return (1.0 - _log_uniform(rng, n)) * _unit_complex(rng, n)


@dataclass(frozen=True)
class Annulus(ModelDomain):
    r: float = 0.5
    kind = "annulus"
    dim = 1

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ConstructionError(f"annulus parameter must satisfy 0 < r < 1, got {self.r}")

    def params(self):
        return {"r": self.r}

    def rho(self, z):
        a = np.abs(z)
        # product form: negative exactly when r < |z| < 1
        return (1.0 - a) * (self.r - a)

    def boundary_distance(self, z):
        a = np.abs(z)
        return np.minimum(np.abs(a - self.r), np.abs(1.0 - a))

    def inner_normal(self, X):
        u = X / abs(X)
        return -u if abs(abs(X) - 1.0) < abs(abs(X) - self.r) else u

    def project_to_boundary(self, z):
        a = np.abs(z)
        target = np.where(np.abs(a - 1.0) < np.abs(a - self.r), 1.0, self.r)
        return target * z / a

    def inradius(self):
        return (1.0 - self.r) / 2

    def _uniform(self, rng, n):
        rad = np.sqrt(self.r ** 2 + rng.random(n) * (1 - self.r ** 2))
        return rad * _unit_complex(rng, n)

    def _near_boundary(self, rng, n):
        d = _log_uniform(rng, n, hi=(1 - self.r) / 2)
        outer = rng.random(n) < 0.5
        rad = np.where(outer, 1.0 - d, self.r + d)
        return rad * _unit_complex(rng, n)


@dataclass(frozen=True)
class Bidisc(ModelDomain):
    kind = "bidisc"
    dim = 2

    def rho(self, z):
        return np.max(np.abs(z), axis=-1) ** 2 - 1.0

    def boundary_distance(self, z):
        a = np.abs(z)
        inside = np.all(a < 1, axis=-1)
        d_in = np.min(1.0 - a, axis=-1)
        d_out = np.sqrt(np.sum(np.maximum(a - 1.0, 0.0) ** 2, axis=-1))
        return np.where(inside, d_in, d_out)

    def inner_normal(self, X):
        a = np.abs(X)
        active = np.isclose(a, 1.0, atol=1e-12)
        if active.sum() != 1:
            raise FrameError("bidisc boundary point is a corner (or not on the boundary); no normal")
        n = np.zeros(2, complex)
        k = int(np.argmax(active))
        n[k] = -X[k] / a[k]
        return n

    def _uniform(self, rng, n):
        return np.stack([np.sqrt(rng.random(n)) * _unit_complex(rng, n) for _ in range(2)], -1)

    def _near_boundary(self, rng, n):
        pts = self._uniform(rng, n)
        k = rng.integers(0, 2, n)
        rad = 1.0 - _log_uniform(rng, n)
        pts[np.arange(n), k] = rad * _unit_complex(rng, n)
        return pts


def _sphere(rng, n):
    g = rng.standard_normal((n, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g[:, 0::2] + 1j * g[:, 1::2]


@dataclass(frozen=True)
class Ball(ModelDomain):
    kind = "ball"
    dim = 2

    def rho(self, z):
        return np.sum(np.abs(z) ** 2, axis=-1) - 1.0

    def boundary_distance(self, z):
        return np.abs(1.0 - np.linalg.norm(z, axis=-1))

    def inner_normal(self, X):
        X = np.asarray(X, complex)
        return -X / np.linalg.norm(X)

    def project_to_boundary(self, z):
        return z / np.linalg.norm(z, axis=-1, keepdims=True)

    def _uniform(self, rng, n):
        return _sphere(rng, n) * (rng.random(n) ** 0.25)[:, None]

    def _near_boundary(self, rng, n):
        return _sphere(rng, n) * (1.0 - _log_uniform(rng, n))[:, None]


@dataclass(frozen=True)
class Ellipsoid(ModelDomain):
    """{|z1|^2 + |z2|^{2m} < 1}."""

    m: int = 2
    kind = "ellipsoid"
    dim = 2

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ConstructionError(f"ellipsoid exponent must be an integer >= 1, got {self.m}")

    def params(self):
        return {"m": int(self.m)}

    def rho(self, z):
        return np.abs(z[..., 0]) ** 2 + np.abs(z[..., 1]) ** (2 * self.m) - 1.0

    def grad_conj(self, z):
        """d rho / d conj(z) (a complex vector; the real gradient is twice it)."""
        z = np.asarray(z, complex)
        return np.stack([z[..., 0], self.m * np.abs(z[..., 1]) ** (2 * self.m - 2) * z[..., 1]], -1)

    def boundary_distance(self, z):
        # first-order estimate |rho| / |grad rho|, capped by the inradius
        g = 2 * np.linalg.norm(self.grad_conj(z), axis=-1)
        r = np.abs(self.rho(z))
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(g > 0, r / g, np.inf)
        return np.minimum(d, 1.0)

    def inner_normal(self, X):
        g = self.grad_conj(np.asarray(X, complex))
        return -g / np.linalg.norm(g)

    def _ray_exit(self, p):
        """t > 0 with rho(t p) = 0, by bisection."""
        lo, hi = np.zeros(len(p)), np.full(len(p), 2.0)
        for _ in range(60):
            mid = (lo + hi) / 2
            inside = self.rho(mid[:, None] * p) < 0
            lo, hi = np.where(inside, mid, lo), np.where(inside, hi, mid)
        return lo

    def _uniform(self, rng, n):
        return Bidisc()._uniform(rng, n)

    def _near_boundary(self, rng, n):
        p = _sphere(rng, n)
        t = self._ray_exit(p) * (1.0 - _log_uniform(rng, n))
        return t[:, None] * p


@dataclass(frozen=True)
class Siegel(ModelDomain):
    """{Re w1 > |w2|^2}; unbounded, sampled within a unit window."""

    kind = "siegel"
    dim = 2
    bounded = False

    def rho(self, w):
        return np.abs(w[..., 1]) ** 2 - w[..., 0].real

    def boundary_distance(self, w):
        return np.abs(self.rho(w)) / np.sqrt(1.0 + 4 * np.abs(w[..., 1]) ** 2)

    def inner_normal(self, X):
        v = np.array([0.5, -X[1]], complex)
        return v / np.linalg.norm(v)

    def _window(self, rng, n, s):
        w2 = np.sqrt(rng.random(n)) * _unit_complex(rng, n)
        w1 = np.abs(w2) ** 2 + s + 1j * rng.uniform(-1, 1, n)
        return np.stack([w1, w2], -1)

    def _uniform(self, rng, n):
        return self._window(rng, n, 2 * rng.random(n))

    def _near_boundary(self, rng, n):
        return self._window(rng, n, _log_uniform(rng, n))


DOMAIN_KINDS = {"disk": Disk, "annulus": Annulus, "bidisc": Bidisc, "ball": Ball,
                "ellipsoid": Ellipsoid, "siegel": Siegel}


def domain_from_json(data: dict) -> ModelDomain:
    kind = data.get("kind")
    if kind not in DOMAIN_KINDS:
        raise UsageError(f"unknown domain kind {kind!r}")
    return DOMAIN_KINDS[kind](**data.get("params", {}))


def contains(d: ModelDomain, z):
    return d.contains(z)


def boundary_distance(d: ModelDomain, z):
    return d.boundary_distance(z)


# --------------------------------------------------------------------------
# Automorphisms
# --------------------------------------------------------------------------
class Automorphism:
    domain: ModelDomain

    def __call__(self, z):
        return self.apply(z)

    def apply(self, z):
        raise NotImplementedError

    def inverse(self) -> Automorphism:
        raise NotImplementedError

    def compose(self, other: Automorphism) -> Automorphism:
        """self o other."""
        raise NotImplementedError

    def derivative(self, z):
        """Complex derivative: scalar for planar maps, (..., 2, 2) matrices otherwise."""
        raise NotImplementedError

    def jacobian(self, z):
        d = self.derivative(z)
        return d if self.domain.dim == 1 else np.linalg.det(d)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params()}


def _check_compatible(a: Automorphism, b: Automorphism):
    if type(a) is not type(b) or a.domain != b.domain:
        raise UsageError("automorphisms of different domains cannot be composed")


@dataclass(frozen=True)
class DiskAutomorphism(Automorphism):
    """z -> e^{i theta} (z - a) / (1 - conj(a) z)."""

    a: complex = 0.0
    theta: float = 0.0
    kind = "disk"
    domain = Disk()

    def __post_init__(self):
        if not abs(self.a) < 1:
            raise ConstructionError(f"Moebius parameter must satisfy |a| < 1, got {self.a}")
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "theta", float(self.theta))

    def params(self):
        return {"a": [self.a.real, self.a.imag], "theta": self.theta}

    def apply(self, z):
        z = np.asarray(z, complex)
        return np.exp(1j * self.theta) * (z - self.a) / (1 - np.conj(self.a) * z)

    def matrix(self):
        u = np.exp(1j * self.theta)
        return np.array([[u, -u * self.a], [-np.conj(self.a), 1.0]], complex)

    @staticmethod
    def from_matrix(m) -> DiskAutomorphism:
        p, q, r, s = m[0, 0] / m[1, 1], m[0, 1] / m[1, 1], m[1, 0] / m[1, 1], 1.0
        a = -np.conj(r)
        theta = float(np.angle(p))
        return DiskAutomorphism(a, theta)

    def inverse(self):
        m = self.matrix()
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
        return DiskAutomorphism.from_matrix(inv)

    def compose(self, other):
        _check_compatible(self, other)
        return DiskAutomorphism.from_matrix(self.matrix() @ other.matrix())

    def derivative(self, z):
        z = np.asarray(z, complex)
        return np.exp(1j * self.theta) * (1 - abs(self.a) ** 2) / (1 - np.conj(self.a) * z) ** 2


@dataclass(frozen=True)
class AnnulusAutomorphism(Automorphism):
    """z -> e^{i theta} z, or z -> e^{i theta} r / z when ``flip``."""

    r: float = 0.5
    theta: float = 0.0
    flip: bool = False
    kind = "annulus"

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))
        Annulus(self.r)

    @property
    def domain(self):
        return Annulus(self.r)

    def params(self):
        return {"r": self.r, "theta": self.theta, "flip": bool(self.flip)}

    def apply(self, z):
        z = np.asarray(z, complex)
        u = np.exp(1j * self.theta)
        return u * self.r / z if self.flip else u * z

    def inverse(self):
        if self.flip:
            return self
        return AnnulusAutomorphism(self.r, -self.theta, False)

    def compose(self, other):
        _check_compatible(self, other)
        t1, t2 = self.theta, other.theta
        if not self.flip and not other.flip:
            return AnnulusAutomorphism(self.r, t1 + t2, False)
        if not self.flip and other.flip:
            return AnnulusAutomorphism(self.r, t1 + t2, True)
        if self.flip and not other.flip:
            return AnnulusAutomorphism(self.r, t1 - t2, True)
        return AnnulusAutomorphism(self.r, t1 - t2, False)

    def derivative(self, z):
        z = np.asarray(z, complex)
        u = np.exp(1j * self.theta)
        return -u * self.r / z ** 2 if self.flip else u * np.ones_like(z)


@dataclass(frozen=True)
class BidiscAutomorphism(Automorphism):
    """(z1, z2) -> S(f1(z1), f2(z2)) with S the coordinate swap when ``swap``."""

    first: DiskAutomorphism = field(default_factory=DiskAutomorphism)
    second: DiskAutomorphism = field(default_factory=DiskAutomorphism)
    swap: bool = False
    kind = "bidisc"
    domain = Bidisc()

    def params(self):
        return {"first": self.first.params(), "second": self.second.params(), "swap": bool(self.swap)}

    def apply(self, z):
        z = np.asarray(z, complex)
        w = np.stack([self.first.apply(z[..., 0]), self.second.apply(z[..., 1])], -1)
        return w[..., ::-1] if self.swap else w

    def inverse(self):
        if not self.swap:
            return BidiscAutomorphism(self.first.inverse(), self.second.inverse(), False)
        return BidiscAutomorphism(self.second.inverse(), self.first.inverse(), True)

    def compose(self, other):
        _check_compatible(self, other)
        if not other.swap:
            return BidiscAutomorphism(self.first.compose(other.first),
                                      self.second.compose(other.second), self.swap)
        return BidiscAutomorphism(self.second.compose(other.first),
                                  self.first.compose(other.second), not self.swap)

    def derivative(self, z):
        z = np.asarray(z, complex)
        d = np.zeros(z.shape + (2,), complex)
        d1, d2 = self.first.derivative(z[..., 0]), self.second.derivative(z[..., 1])
        if self.swap:
            d[..., 1, 0], d[..., 0, 1] = d1, d2
        else:
            d[..., 0, 0], d[..., 1, 1] = d1, d2
        return d


def _psi(a, z):
    """psi_a(z) for a ball point a; vectorized over z (..., 2)."""
    z = np.asarray(z, complex)
    na2 = float(np.vdot(a, a).real)
    if na2 == 0:
        return z.copy()
    s = math.sqrt(1 - na2)
    za = z @ np.conj(a)  # <z, a>
    proj = za[..., None] * a / na2
    num = proj - a + s * (z - proj)
    return num / (1 - za)[..., None]


def _psi_inv(a, w):
    return -_psi(a, -np.asarray(w, complex))


def _nearest_unitary(m):
    u, _, vh = np.linalg.svd(m)
    return u @ vh


@dataclass(frozen=True, eq=False)
class BallAutomorphism(Automorphism):
    """z -> U psi_a(z) on the unit ball of C^2."""

    a: np.ndarray = field(default_factory=lambda: np.zeros(2, complex))
    U: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))
    kind = "ball"
    domain = Ball()

    def __post_init__(self):
        a = np.asarray(self.a, complex).reshape(2)
        U = np.asarray(self.U, complex).reshape(2, 2)
        if not np.linalg.norm(a) < 1:
            raise ConstructionError(f"ball automorphism needs |a| < 1, got |a| = {np.linalg.norm(a)}")
        if np.max(np.abs(U.conj().T @ U - np.eye(2))) > 1e-10:
            raise ConstructionError("U is not unitary")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "U", U)

    def __eq__(self, other):
        return (isinstance(other, BallAutomorphism) and np.allclose(self.a, other.a)
                and np.allclose(self.U, other.U))

    def __hash__(self):
        return hash((tuple(np.round(self.a, 12)), tuple(np.round(self.U.ravel(), 12))))

    def params(self):
        return {"a": [[x.real, x.imag] for x in self.a],
                "U": [[[x.real, x.imag] for x in row] for row in self.U]}

    def apply(self, z):
        return _psi(self.a, z) @ self.U.T

    def _apply_inverse(self, w):
        w = np.asarray(w, complex)
        return _psi_inv(self.a, w @ self.U.conj())

    @staticmethod
    def _from_map(fmap, c) -> BallAutomorphism:
        """Catalog form V psi_c of an automorphism ``fmap`` with fmap(c) = 0."""
        t = 0.5
        cols = [fmap(_psi_inv(c, t * e)) / t for e in np.eye(2, dtype=complex)]
        V = _nearest_unitary(np.stack(cols, axis=-1))
        return BallAutomorphism(c, V)

    def inverse(self):
        b = self.apply(np.zeros(2, complex))
        return BallAutomorphism._from_map(self._apply_inverse, b)

    def compose(self, other):
        _check_compatible(self, other)
        c = other._apply_inverse(self._apply_inverse(np.zeros(2, complex)))
        return BallAutomorphism._from_map(lambda z: self.apply(other.apply(z)), c)

    def derivative(self, z):
        z = np.asarray(z, complex)
        a = self.a
        na2 = float(np.vdot(a, a).real)
        if na2 == 0:
            A = np.eye(2, dtype=complex)
        else:
            P = np.outer(a, a.conj()) / na2
            A = P + math.sqrt(1 - na2) * (np.eye(2) - P)
        D = 1 - z @ np.conj(a)
        psi = _psi(a, z)
        dpsi = (A + psi[..., :, None] * np.conj(a)[None, :]) / D[..., None, None]
        return self.U @ dpsi


@dataclass(frozen=True)
class SiegelAutomorphism(Automorphism):
    """w -> (lam^2 (w1 + 2 conj(b) w2 + |b|^2 + i t), lam e^{i theta} (w2 + b)).

    Heisenberg translation by (b, t), then rotation and dilation; preserves
    Re w1 - |w2|^2 up to the positive factor lam^2.
    """

    lam: float = 1.0
    theta: float = 0.0
    b: complex = 0.0
    t: float = 0.0
    kind = "siegel"
    domain = Siegel()

    def __post_init__(self):
        if not self.lam > 0:
            raise ConstructionError("Siegel dilation factor must be positive")
        object.__setattr__(self, "b", complex(self.b))

    def params(self):
        return {"lam": self.lam, "theta": self.theta, "b": [self.b.real, self.b.imag], "t": self.t}

    def apply(self, w):
        w = np.asarray(w, complex)
        w1, w2 = w[..., 0], w[..., 1]
        b = self.b
        n1 = self.lam ** 2 * (w1 + 2 * np.conj(b) * w2 + abs(b) ** 2 + 1j * self.t)
        n2 = self.lam * np.exp(1j * self.theta) * (w2 + b)
        return np.stack([n1, n2], -1)

    @staticmethod
    def _from_affine(fmap) -> SiegelAutomorphism:
        g0 = fmap(np.zeros(2, complex))
        g1 = fmap(np.array([0.0, 1.0], complex))
        mu = g1[1] - g0[1]
        lam = abs(mu)
        b = g0[1] / mu
        t = float((g0[0] / lam ** 2 - abs(b) ** 2).imag)
        return SiegelAutomorphism(float(lam), float(np.angle(mu)), complex(b), t)

    def _apply_inverse(self, w):
        w = np.asarray(w, complex)
        w2 = w[..., 1] / (self.lam * np.exp(1j * self.theta)) - self.b
        b = self.b
        w1 = w[..., 0] / self.lam ** 2 - 2 * np.conj(b) * w2 - abs(b) ** 2 - 1j * self.t
        return np.stack([w1, w2], -1)

    def inverse(self):
        return SiegelAutomorphism._from_affine(self._apply_inverse)

    def compose(self, other):
        _check_compatible(self, other)
        return SiegelAutomorphism._from_affine(lambda w: self.apply(other.apply(w)))

    def derivative(self, w):
        w = np.asarray(w, complex)
        d = np.zeros(w.shape + (2,), complex)
        d[..., 0, 0] = self.lam ** 2
        d[..., 0, 1] = self.lam ** 2 * 2 * np.conj(self.b)
        d[..., 1, 1] = self.lam * np.exp(1j * self.theta)
        return d


def compose_aut(a: Automorphism, b: Automorphism) -> Automorphism:
    """a o b."""
    return a.compose(b)


def apply(a: Automorphism, z):
    return a.apply(z)


def inverse(a: Automorphism) -> Automorphism:
    return a.inverse()


def jacobian(a: Automorphism, z):
    return a.jacobian(z)


def _cpair(v):
    return complex(v[0], v[1])


def automorphism_from_json(data: dict) -> Automorphism:
    kind, p = data.get("kind"), data.get("params", {})
    if kind == "disk":
        return DiskAutomorphism(_cpair(p.get("a", [0, 0])), p.get("theta", 0.0))
    if kind == "annulus":
        return AnnulusAutomorphism(p.get("r", 0.5), p.get("theta", 0.0), bool(p.get("flip", False)))
    if kind == "bidisc":
        def disk(q):
            return DiskAutomorphism(_cpair(q.get("a", [0, 0])), q.get("theta", 0.0))
        return BidiscAutomorphism(disk(p.get("first", {})), disk(p.get("second", {})),
                                  bool(p.get("swap", False)))
    if kind == "ball":
        a = np.array([_cpair(x) for x in p.get("a", [[0, 0], [0, 0]])])
        U = np.array([[_cpair(x) for x in row] for row in p.get("U", [[[1, 0], [0, 0]], [[0, 0], [1, 0]]])])
        return BallAutomorphism(a, U)
    if kind == "siegel":
        return SiegelAutomorphism(p.get("lam", 1.0), p.get("theta", 0.0), _cpair(p.get("b", [0, 0])),
                                  p.get("t", 0.0))
    raise UsageError(f"unknown automorphism kind {kind!r}")


def random_automorphism(domain: ModelDomain, rng, max_radius: float = 0.9) -> Automorphism:
    """A random catalog automorphism; Moebius parameters have modulus < max_radius."""
    def disk():
        a = max_radius * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        return DiskAutomorphism(a, rng.uniform(-np.pi, np.pi))

    if isinstance(domain, Disk):
        return disk()
    if isinstance(domain, Annulus):
        return AnnulusAutomorphism(domain.r, rng.uniform(-np.pi, np.pi), bool(rng.random() < 0.5))
    if isinstance(domain, Bidisc):
        return BidiscAutomorphism(disk(), disk(), bool(rng.random() < 0.5))
    if isinstance(domain, Ball):
        a = _sphere(rng, 1)[0] * max_radius * rng.random() ** 0.25
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        q, _ = np.linalg.qr(g)
        return BallAutomorphism(a, q)
    if isinstance(domain, Siegel):
        return SiegelAutomorphism(float(np.exp(rng.uniform(-0.5, 0.5))), rng.uniform(-np.pi, np.pi),
                                  complex(rng.normal(0, 0.5), rng.normal(0, 0.5)), rng.normal(0, 0.5))
    raise UsageError(f"no automorphism catalog for {domain.kind}")


# --------------------------------------------------------------------------
# Orbits
# --------------------------------------------------------------------------
class OrbitReport(NamedTuple):
    points: np.ndarray
    boundary_distance: np.ndarray
    accumulates_at_boundary: bool
    X_estimate: object

    def csv_rows(self):
        rows = []
        pts = np.asarray(self.points)
        for j, (p, d) in enumerate(zip(pts, self.boundary_distance), start=1):
            coords = np.atleast_1d(p)
            vals = []
            for c in coords:
                vals += [float(c.real), float(c.imag)]
            rows.append([j, *vals, float(d)])
        return rows

    def csv_header(self):
        n = np.atleast_1d(np.asarray(self.points)[0]).size
        head = ["j"]
        for k in range(1, n + 1):
            head += [f"re_z{k}", f"im_z{k}"]
        return head + ["boundary_distance"]


def orbit(d: ModelDomain, auts: Sequence[Automorphism], P, tail: int = ACCUMULATION_TAIL,
          threshold: float = ACCUMULATION_THRESHOLD) -> OrbitReport:
    """phi_j(P) for each j, plus a boundary-accumulation verdict.

    Accumulation means the last ``tail`` orbit points all lie within
    ``threshold`` of the boundary with strictly decreasing distance.
    """
    if len(auts) == 0:
        raise UsageError("empty automorphism sequence")
    P = np.asarray(P, complex)
    if not np.all(d.contains(P)):
        raise DomainError("base point is not in the domain")
    pts = np.array([a.apply(P) for a in auts])
    dist = np.asarray(d.boundary_distance(pts), float)
    last = dist[-tail:]
    acc = bool(len(dist) >= tail and np.all(last < threshold) and np.all(np.diff(last) < 0))
    X = d.project_to_boundary(pts[-1]) if acc else None
    return OrbitReport(pts, dist, acc, X)
