"""Scaling toward the Siegel model at a strongly pseudoconvex boundary point.

Coordinates at a boundary point X: a unitary frame puts the inner complex
normal in the first coordinate and the complex tangent in the second,

    w = (<z - X, n>, <z - X, t>),

and a quadratic change ``w1_hat = c w1 - q w2^2``, ``w2_hat = sqrt(L) w2``
(c = 2|d rho|, L the Levi form on the tangent, q the pure second derivative
along the tangent) makes the defining function ``-Re w1_hat + |w2_hat|^2 +
higher order``.  Dilating by 1/delta in w1_hat and 1/sqrt(delta) in w2_hat then
pushes the boundary toward the paraboloid Re W1 = |W2|^2.

Cayley pair used here (pole at z1 = -1):
    w1 = (1 - z1)/(1 + z1),  w2 = z2/(1 + z1);   z1 = (1 - w1)/(1 + w1),  z2 = 2 w2/(1 + w1),
sending (1, 0) to the origin and the ball onto Re w1 > |w2|^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._io import csv_text
from .domains import Ball, BallAutomorphism, Bidisc, Ellipsoid, ModelDomain, Siegel, SiegelAutomorphism
from .errors import DomainError, FrameError, UsageError

N_BOUNDARY_SAMPLES = 500
WINDOW = {"abs_w2": 1.0, "abs_im_w1": 1.0}
LEVI_TOL = 1e-10


def _jets(d: ModelDomain, X):
    """(d rho / d conj z, Levi matrix rho_{i jbar}, pure Hessian rho_{ij}) at X."""
    z1, z2 = complex(X[0]), complex(X[1])
    if isinstance(d, Ball):
        return np.array([z1, z2]), np.eye(2, dtype=complex), np.zeros((2, 2), complex)
    if isinstance(d, Ellipsoid):
        m = int(d.m)
        a2 = abs(z2) ** 2
        gamma = np.array([z1, m * a2 ** (m - 1) * z2])
        levi = np.diag([1.0, m * m * a2 ** (m - 1)]).astype(complex)
        pure = np.zeros((2, 2), complex)
        if m >= 2:
            pure[1, 1] = m * (m - 1) * z2 ** (m - 2) * np.conj(z2) ** m
        return gamma, levi, pure
    if isinstance(d, Siegel):
        return np.array([-0.5, z2]), np.diag([0.0, 1.0]).astype(complex), np.zeros((2, 2), complex)
    if isinstance(d, Bidisc):
        n = d.inner_normal(np.asarray(X, complex))  # raises at corners
        k = int(np.argmax(np.abs(n)))
        gamma = np.zeros(2, complex)
        gamma[k] = X[k]
        levi = np.zeros((2, 2), complex)
        levi[k, k] = 1.0
        return gamma, levi, np.zeros((2, 2), complex)
    raise FrameError(f"no boundary frame for {d.kind}")


@dataclass(frozen=True)
class BoundaryFrame:
    """Normalized coordinates at boundary point X (see module docstring).

    On the Siegel domain the point is first moved to the origin by a
    Heisenberg translation (an automorphism), so the normal form is exact.
    """

    domain: ModelDomain
    X: np.ndarray
    U: np.ndarray
    c: float
    L: float
    q: complex
    pre: SiegelAutomorphism | None = None

    @classmethod
    def at(cls, d: ModelDomain, X) -> BoundaryFrame:
        X = np.asarray(X, complex).reshape(2)
        pre = None
        if isinstance(d, Siegel):
            if abs(d.rho(X)) > 1e-10:
                raise FrameError("anchor is not on the paraboloid")
            pre = SiegelAutomorphism(1.0, 0.0, -X[1], -float(X[0].imag))
            X = pre.apply(X)
        if abs(float(d.rho(X))) > 1e-8:
            raise FrameError("X is not a boundary point")
        gamma, levi, pure = _jets(d, X)
        gnorm = float(np.linalg.norm(gamma))
        if gnorm < 1e-12:
            raise FrameError("defining function has vanishing gradient at X")
        n = -gamma / gnorm
        t = np.array([-np.conj(n[1]), np.conj(n[0])])
        U = np.stack([np.conj(n), np.conj(t)])
        L = float((t @ levi.T @ np.conj(t)).real)
        q = complex(t @ pure @ t)
        if L <= LEVI_TOL:
            raise FrameError("Levi form vanishes on the complex tangent at X (not strongly pseudoconvex)")
        return cls(d, X, U, 2 * gnorm, L, q, pre)

    def to_frame(self, z):
        """z -> normalized coordinates (w1_hat, w2_hat)."""
        z = np.asarray(z, complex)
        if self.pre is not None:
            z = self.pre.apply(z)
        w = (z - self.X) @ self.U.T
        w1, w2 = w[..., 0], w[..., 1]
        return np.stack([self.c * w1 - self.q * w2 ** 2, math.sqrt(self.L) * w2], -1)

    def from_frame(self, wh):
        wh = np.asarray(wh, complex)
        w2 = wh[..., 1] / math.sqrt(self.L)
        w1 = (wh[..., 0] + self.q * w2 ** 2) / self.c
        z = self.X + np.stack([w1, w2], -1) @ np.conj(self.U)
        if self.pre is not None:
            z = self.pre._apply_inverse(z)
        return z

    def unitary_check(self) -> float:
        """Residual of the frame conditions: U unitary, d rho along the tangent zero."""
        gamma, _, _ = _jets(self.domain, self.X)
        t = np.conj(self.U[1])
        return float(max(np.max(np.abs(self.U @ self.U.conj().T - np.eye(2))), abs(np.vdot(gamma, t))))


@dataclass(frozen=True)
class DilationStep:
    anchor: np.ndarray
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise UsageError("delta must be positive")


@dataclass(frozen=True)
class DilationMap:
    """psi(z) = (X'_1 + (z_1 - X'_1)/delta, X'_2 + (z_2 - X'_2)/sqrt(delta))."""

    anchor: np.ndarray
    delta: float

    def apply(self, z):
        z = np.asarray(z, complex)
        a = np.asarray(self.anchor, complex)
        return np.stack([a[0] + (z[..., 0] - a[0]) / self.delta,
                         a[1] + (z[..., 1] - a[1]) / math.sqrt(self.delta)], -1)

    def inverse(self, w):
        w = np.asarray(w, complex)
        a = np.asarray(self.anchor, complex)
        return np.stack([a[0] + (w[..., 0] - a[0]) * self.delta,
                         a[1] + (w[..., 1] - a[1]) * math.sqrt(self.delta)], -1)

    @property
    def jacobian(self) -> float:
        return self.delta ** -1.5

    __call__ = apply


def dilation_map(step: DilationStep) -> DilationMap:
    if not step.delta > 0:
        raise UsageError("delta must be positive")
    return DilationMap(np.asarray(step.anchor, complex), float(step.delta))


class ScaleStep(NamedTuple):
    delta: float
    defect: float
    window: str
    samples: int
    orbit_deviation: float | None = None


class ScaleReport(NamedTuple):
    steps: list
    decreasing: bool
    final_defect: float
    window_policy: dict

    def to_json(self):
        return {"steps": [s._asdict() for s in self.steps], "decreasing": self.decreasing,
                "final_defect": self.final_defect, "window_policy": self.window_policy,
                "verdict": "converging" if self.decreasing else "not_converging"}

    def to_csv(self):
        rows = [[s.delta, s.defect, s.window, s.samples] for s in self.steps]
        return csv_text(["delta", "defect", "window", "samples"], rows)


def _window_samples(rng, n):
    W2 = np.sqrt(rng.random(n)) * WINDOW["abs_w2"] * np.exp(2j * np.pi * rng.random(n))
    im = rng.uniform(-WINDOW["abs_im_w1"], WINDOW["abs_im_w1"], n)
    return W2, im


def _boundary_defects(frame: BoundaryFrame, psi: DilationMap, W2, im, iters=200):
    """For each (W2, Im W1), find Re W1 with the preimage on the boundary by
    bisection and return |Re W1 - |W2|^2|."""
    d = frame.domain
    origin = psi.apply(np.zeros(2, complex))

    def rho_at(x):
        W = np.stack([x + 1j * im, W2], -1) + origin
        return d.rho(frame.from_frame(psi.inverse(W)))

    base = np.abs(W2) ** 2
    span = 1.0
    lo, hi = base - span, base + span
    for _ in range(60):
        bad = ~((rho_at(lo) > 0) & (rho_at(hi) < 0))
        if not bad.any():
            break
        span *= 2
        lo = np.where(bad, base - span, lo)
        hi = np.where(bad, base + span, hi)
    ok = (rho_at(lo) > 0) & (rho_at(hi) < 0)
    for _ in range(iters):
        mid = (lo + hi) / 2
        inside = rho_at(mid) < 0
        hi = np.where(inside, mid, hi)
        lo = np.where(inside, lo, mid)
        if np.max(hi - lo) < 1e-15 * max(1.0, float(np.max(np.abs(hi)))):
            break
    x = (lo + hi) / 2
    return np.where(ok, np.abs(x - base), np.inf)


def _ball_orbit_deviation(delta, n=200, seed=0):
    """sup over a compact ball sample of |psi o phi_delta - G|, phi_delta the
    ball automorphism sending 0 to (1 - delta, 0) and G the limit map
    2 * cayley composed with the Siegel dilation (w1, w2) -> (2 w1, -sqrt(2) w2)."""
    B = Ball()
    frame = BoundaryFrame.at(B, [1.0, 0.0])
    phi = BallAutomorphism(np.array([1 - delta, 0.0])).inverse()
    z = B.sample(np.random.default_rng(seed), n, boundary_bias=0.0) * 0.5
    psi = DilationMap(frame.to_frame(np.array([1 - delta, 0.0])), delta)
    W = psi.apply(frame.to_frame(phi.apply(z))) - psi.apply(np.zeros(2, complex))
    w = cayley(z)
    G = np.stack([2 * w[..., 0], -math.sqrt(2) * w[..., 1]], -1)
    return float(np.max(np.abs(W - G)))


def scale_sequence(d: ModelDomain, X, deltas: Sequence[float], n_samples: int = N_BOUNDARY_SAMPLES,
                   seed: int = 0) -> ScaleReport:
    """Graph defect of the rescaled boundary against Re W1 = |W2|^2 per delta.

    Window: |W2| <= 1, |Im W1| <= 1 after rescaling (that is, O(sqrt(delta))
    tangentially and O(delta) normally before it).  On the ball each step
    also records how far the rescaled orbit map is from its Cayley limit.
    """
    deltas = [float(x) for x in deltas]
    if not deltas or any(x <= 0 for x in deltas):
        raise UsageError("deltas must be positive")
    frame = BoundaryFrame.at(d, X)
    rng = np.random.default_rng(seed)
    W2, im = _window_samples(rng, n_samples)
    steps = []
    for delta in deltas:
        anchor_hat = np.array([frame.c * delta, 0.0], complex)  # X moved inward by delta
        psi = dilation_map(DilationStep(anchor_hat, delta))
        defects = _boundary_defects(frame, psi, W2, im)
        orbit_dev = _ball_orbit_deviation(delta) if isinstance(d, Ball) else None
        window = f"|W2|<={WINDOW['abs_w2']:g},|ImW1|<={WINDOW['abs_im_w1']:g}"
        steps.append(ScaleStep(delta, float(np.max(defects)), window, n_samples, orbit_dev))
    defs = [s.defect for s in steps]
    decreasing = bool(all(b < a for a, b in zip(defs, defs[1:])))
    policy = {"tangential": "sqrt(delta)", "normal": "delta", **WINDOW}
    return ScaleReport(steps, decreasing, defs[-1], policy)


def cayley(z):
    """Ball -> Siegel domain."""
    z = np.asarray(z, complex)
    if not np.all(Ball().contains(z)):
        raise DomainError("Cayley map needs interior ball points")
    den = 1 + z[..., 0]
    return np.stack([(1 - z[..., 0]) / den, z[..., 1] / den], -1)


def cayley_inverse(w):
    """Siegel domain -> ball."""
    w = np.asarray(w, complex)
    if not np.all(Siegel().contains(w)):
        raise DomainError("inverse Cayley map needs interior Siegel points")
    den = 1 + w[..., 0]
    return np.stack([(1 - w[..., 0]) / den, 2 * w[..., 1] / den], -1)
