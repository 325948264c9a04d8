"""Truncated Laurent series in one variable and Taylor series in two.

Every arithmetic result carries ``bound``: the l1 mass of the coefficients that
were dropped by truncation (plus what was inherited from the operands).  This
bounds the pointwise error on the unit circle, and is what "equal up to the
truncation bound" means throughout the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, UnsupportedCompositionError, UsageError

DEFAULT_ORDER = 64
DEFAULT_DEGREE = 16
DEFAULT_TAIL_WINDOW = 16
UNDERFLOW = 1e-300


def _clean(c: np.ndarray) -> np.ndarray:
    c = np.array(c, dtype=complex)
    c[np.abs(c) < UNDERFLOW] = 0.0
    return c


class TruncatedLaurent:
    """sum_{j=-M}^{N} a_j (z - center)^j.

    ``orders = (M, N)`` is the truncation window; products are cut back to
    it.  By default N = max(highest stored index, DEFAULT_ORDER) and M is 0
    for Taylor series, max(-lowest index, DEFAULT_ORDER) otherwise.
    ``region`` is an optional open annulus ``(r_inner, r_outer)`` about the
    center on which the series is declared to represent its function.
    """

    def __init__(self, coeffs, low: int = 0, center: complex = 0.0, bound: float = 0.0,
                 region: tuple[float, float] | None = None, orders: tuple[int, int] | None = None):
        if isinstance(coeffs, dict):
            if not coeffs:
                coeffs, low = [0.0], 0
            else:
                lo, hi = min(coeffs), max(coeffs)
                arr = np.zeros(hi - lo + 1, dtype=complex)
                for j, a in coeffs.items():
                    arr[j - lo] = a
                coeffs, low = arr, lo
        self.coeffs = _clean(np.atleast_1d(coeffs))
        self.low = int(low)
        self.center = complex(center)
        self.bound = float(bound)
        if region is not None:
            region = (float(region[0]), float(region[1]))
            if not 0.0 <= region[0] < region[1]:
                raise UsageError(f"invalid region {region}")
        self.region = region
        if orders is None:
            orders = (max(-self.low, DEFAULT_ORDER) if self.low < 0 else 0, max(self.high, DEFAULT_ORDER))
        M, N = int(orders[0]), int(orders[1])
        if M < 0 or N < 0:
            raise UsageError("truncation orders must be nonnegative")
        nz = np.flatnonzero(self.coeffs) + self.low
        if len(nz) and (nz[0] < -M or nz[-1] > N):
            raise UsageError(f"stored indices [{nz[0]}, {nz[-1]}] exceed the window [-{M}, {N}]")
        self.orders = (M, N)

    # -- basic accessors -------------------------------------------------
    @property
    def high(self) -> int:
        return self.low + len(self.coeffs) - 1

    @property
    def M(self) -> int:
        return self.orders[0]

    @property
    def N(self) -> int:
        return self.orders[1]

    def indices(self) -> np.ndarray:
        return np.arange(self.low, self.high + 1)

    def coefficient(self, j: int) -> complex:
        if self.low <= j <= self.high:
            return complex(self.coeffs[j - self.low])
        return 0.0j

    def as_dict(self) -> dict[int, complex]:
        return {int(j): complex(a) for j, a in zip(self.indices(), self.coeffs) if a != 0}

    def l1(self) -> float:
        return float(np.abs(self.coeffs).sum())

    @classmethod
    def monomial(cls, j: int, a: complex = 1.0, **kw) -> TruncatedLaurent:
        return cls([a], low=j, **kw)

    @classmethod
    def constant(cls, a: complex = 1.0, **kw) -> TruncatedLaurent:
        return cls([a], low=0, **kw)

    def _monomial_form(self):
        """Return (alpha, j) if the series is alpha z^j with j = +-1, else None."""
        nz = np.flatnonzero(self.coeffs)
        if len(nz) != 1 or self.center != 0:
            return None
        j = int(nz[0]) + self.low
        if j not in (1, -1):
            return None
        return complex(self.coeffs[nz[0]]), j

    # -- evaluation --------------------------------------------------------
    def __call__(self, z):
        return eval_series(self, z)

    def __mul__(self, other):
        if isinstance(other, TruncatedLaurent):
            return multiply(self, other)
        return TruncatedLaurent(self.coeffs * other, self.low, self.center,
                                self.bound * abs(other), self.region, self.orders)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, TruncatedLaurent):
            other = TruncatedLaurent.constant(other, center=self.center)
        if other.center != self.center:
            raise UsageError("mismatched centers")
        lo, hi = min(self.low, other.low), max(self.high, other.high)
        arr = np.zeros(hi - lo + 1, dtype=complex)
        arr[self.low - lo:self.high - lo + 1] += self.coeffs
        arr[other.low - lo:other.high - lo + 1] += other.coeffs
        orders = (max(self.M, other.M), max(self.N, other.N))
        return TruncatedLaurent(arr, lo, self.center, self.bound + other.bound,
                                _intersect(self.region, other.region), orders)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __repr__(self):
        return (f"TruncatedLaurent(low={self.low}, high={self.high}, "
                f"center={self.center}, bound={self.bound:.3g})")

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "center": [self.center.real, self.center.imag],
            "entries": [[int(j), float(a.real), float(a.imag)]
                        for j, a in zip(self.indices(), self.coeffs) if a != 0],
            "bound": self.bound,
            "orders": list(self.orders),
        }
        if self.region is not None:
            out["region"] = list(self.region)
        return out

    @classmethod
    def from_json(cls, data: dict) -> TruncatedLaurent:
        center = data.get("center", 0.0)
        if isinstance(center, (list, tuple)):
            center = complex(center[0], center[1])
        entries = data.get("entries", [])
        coeffs = {int(e[0]): complex(e[1], e[2]) for e in entries}
        orders = data.get("orders")
        return cls(coeffs, center=center, bound=data.get("bound", 0.0),
                   region=data.get("region"), orders=None if orders is None else tuple(orders))


def _intersect(a, b):
    if a is None:
        return b
    if b is None:
        return a
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    if lo >= hi:
        raise DomainError(f"regions {a} and {b} do not overlap")
    return (lo, hi)


def eval_series(s, z):
    """Evaluate a truncated series at z (scalar or array)."""
    if isinstance(s, TruncatedTaylor2):
        return s(z)
    z = np.asarray(z, dtype=complex)
    w = z - s.center
    r = np.abs(w)
    if s.region is not None:
        if np.any((r <= s.region[0]) | (r >= s.region[1])):
            raise DomainError(f"point outside evaluation region {s.region}")
    elif s.low < 0 and np.any(r == 0):
        raise DomainError("series with negative powers evaluated at its center")
    # Horner over the nonnegative part, then over 1/w for the principal part.
    out = np.zeros_like(w)
    for j in range(s.high, -1, -1):
        out = out * w + s.coefficient(j)
    if s.low < 0:
        inv = 1.0 / np.where(r == 0, 1.0, w)
        neg = np.zeros_like(w)
        for j in range(s.low, 0):
            neg = (neg + s.coefficient(j)) * inv
        out = out + neg
    return out if out.ndim else complex(out)


def _truncated_product(s: TruncatedLaurent, t: TruncatedLaurent, low: int, high: int):
    full = np.convolve(s.coeffs, t.coeffs)
    full_low = s.low + t.low
    idx = np.arange(full_low, full_low + len(full))
    keep = (idx >= low) & (idx <= high)
    discarded = float(np.abs(full[~keep]).sum())
    arr = np.zeros(high - low + 1, dtype=complex)
    arr[idx[keep] - low] = full[keep]
    bound = (discarded + s.bound * t.l1() + t.bound * s.l1() + s.bound * t.bound)
    return arr, bound


def multiply(s: TruncatedLaurent, t: TruncatedLaurent) -> TruncatedLaurent:
    """Cauchy product truncated to the union of the operands' windows."""
    if s.center != t.center:
        raise UsageError(f"mismatched centers {s.center} and {t.center}")
    M, N = max(s.M, t.M), max(s.N, t.N)
    low = max(-M, s.low + t.low)
    high = max(min(N, s.high + t.high), low)
    arr, bound = _truncated_product(s, t, low, high)
    return TruncatedLaurent(arr, low, s.center, bound, _intersect(s.region, t.region), (M, N))


def _image_region(region, alpha: complex, j: int):
    if region is None:
        return None
    a = abs(alpha)
    if j == 1:
        return (region[0] * a, region[1] * a)
    lo = a / region[1]
    hi = np.inf if region[0] == 0 else a / region[0]
    return (lo, hi)


def _check_region_maps(f: TruncatedLaurent, g: TruncatedLaurent):
    """Sampled check that g maps its region into f's region."""
    if f.region is None or g.region is None:
        return
    lo, hi = g.region
    hi_eff = hi if np.isfinite(hi) else lo + 10.0
    radii = lo + (hi_eff - lo) * np.array([0.02, 0.5, 0.98])
    theta = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    pts = g.center + (radii[:, None] * np.exp(1j * theta)[None, :]).ravel()
    img = np.abs(eval_series(g, pts) - f.center)
    if np.any((img <= f.region[0]) | (img >= f.region[1])):
        raise DomainError("g does not map its evaluation region into that of f")


def compose(f: TruncatedLaurent, g: TruncatedLaurent, order: int | None = None) -> TruncatedLaurent:
    """Coefficients of f o g.

    For g = alpha z or g = alpha / z the substitution is exact; otherwise f
    must be a Taylor series (no negative powers) and the result is built by
    Horner's rule, truncated to ``order`` (default: enough for the exact
    product, capped at 64).
    """
    mono = g._monomial_form()
    if mono is not None and f.center == 0:
        alpha, j = mono
        if f.region is not None:
            # image of g's declared (or implied) region must sit inside f's region
            src = g.region
            if src is not None:
                img = _image_region(src, alpha, j)
                if img[0] < f.region[0] - 1e-15 or img[1] > f.region[1] + 1e-15:
                    raise DomainError("g does not map its evaluation region into that of f")
        idx = f.indices()
        new = f.coeffs * alpha ** idx.astype(float)
        region = None
        if f.region is not None:
            # z in region' iff alpha z^j in f.region
            if j == 1:
                region = (f.region[0] / abs(alpha), f.region[1] / abs(alpha))
            else:
                hi = np.inf if f.region[0] == 0 else abs(alpha) / f.region[0]
                region = (abs(alpha) / f.region[1], hi)
        if g.region is not None:
            region = _intersect(region, g.region)
        if j == 1:
            return TruncatedLaurent(new, f.low, 0.0, f.bound, region, f.orders)
        return TruncatedLaurent(new[::-1], -f.high, 0.0, f.bound, region, f.orders[::-1])

    if f.low < 0 and np.any(f.coeffs[: -f.low] != 0):
        raise UnsupportedCompositionError(
            "f has negative powers; only g = alpha z or alpha/z substitutions are supported")
    if f.center != 0 and f.center != g.center:
        # f is expanded about f.center: substitute g - f.center
        g = g + (-f.center)
    _check_region_maps(f, g)
    n_f = f.high
    if order is None:
        order = min(max(n_f * max(g.high, 1), f.high, g.high), max(DEFAULT_ORDER, f.high, g.high))
    low = 0
    if g.low < 0:
        low = -min(max(-g.low * n_f, 0), max(DEFAULT_ORDER, -g.low))
    acc = TruncatedLaurent.constant(f.coefficient(n_f), center=g.center)
    bound = f.bound
    for j in range(n_f - 1, -1, -1):
        arr, b = _truncated_product(acc, g, low, order)
        acc = TruncatedLaurent(arr, low, g.center, b) + f.coefficient(j)
    acc.bound += bound
    acc.region = g.region
    return acc


class RadiiEstimate(NamedTuple):
    r_inner: float
    r_outer: float
    window: int
    flags: tuple


def hadamard_radii(s: TruncatedLaurent, tail_window: int = DEFAULT_TAIL_WINDOW) -> RadiiEstimate:
    """Root-test estimate of the annulus of convergence.

    The limsup is replaced by a max of ``|a_j|^{1/|j|}`` over the last
    ``tail_window`` stored indices on each side, so the result is always
    truncation-limited.
    """
    if tail_window < 2:
        raise UsageError("tail_window must be at least 2")
    flags = ["truncation-limited"]
    pos = [j for j in range(1, s.high + 1)]
    neg = [j for j in range(1, max(0, -s.low) + 1)]

    def limsup(js, sign):
        window = js[-tail_window:]
        vals = [abs(s.coefficient(sign * j)) ** (1.0 / j) for j in window]
        return max(vals) if vals else 0.0

    if not pos:
        r_outer = np.inf
        flags.append("no positive indices")
    else:
        if tail_window > len(pos):
            raise UsageError(f"tail_window {tail_window} exceeds {len(pos)} stored positive indices")
        ls = limsup(pos, 1)
        r_outer = np.inf if ls == 0 else 1.0 / ls
    if not neg:
        r_inner = 0.0
        flags.append("no negative indices")
    else:
        if tail_window > len(neg):
            raise UsageError(f"tail_window {tail_window} exceeds {len(neg)} stored negative indices")
        r_inner = limsup(neg, -1)
    return RadiiEstimate(float(r_inner), float(r_outer), tail_window, tuple(flags))


@dataclass
class TruncatedTaylor2:
    """sum_{j+k<=D} a_{jk} z1^j z2^k, stored as a (D+1, D+1) array."""

    coeffs: np.ndarray
    bound: float = 0.0

    def __post_init__(self):
        c = _clean(np.atleast_2d(self.coeffs))
        D = c.shape[0] - 1
        if c.shape != (D + 1, D + 1):
            raise UsageError("coefficient array must be square")
        j, k = np.indices(c.shape)
        if np.any(c[j + k > D] != 0):
            raise UsageError("entries with j + k > D are not allowed")
        self.coeffs = c

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @classmethod
    def from_dict(cls, entries: dict, degree: int = DEFAULT_DEGREE) -> TruncatedTaylor2:
        c = np.zeros((degree + 1, degree + 1), dtype=complex)
        for (j, k), a in entries.items():
            if j + k > degree:
                raise UsageError(f"index {(j, k)} exceeds degree {degree}")
            c[j, k] = a
        return cls(c)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != 2:
            raise DomainError("bivariate series expects points with last axis of length 2")
        z1, z2 = z[..., 0], z[..., 1]
        out = np.zeros(z1.shape, dtype=complex)
        for j in range(self.degree, -1, -1):
            inner = np.zeros_like(out)
            for k in range(self.degree - j, -1, -1):
                inner = inner * z2 + self.coeffs[j, k]
            out = out * z1 + inner
        return out if out.ndim else complex(out)

    def __mul__(self, other: TruncatedTaylor2) -> TruncatedTaylor2:
        D = max(self.degree, other.degree)
        a = np.zeros((D + 1, D + 1), complex)
        b = np.zeros((D + 1, D + 1), complex)
        a[: self.degree + 1, : self.degree + 1] = self.coeffs
        b[: other.degree + 1, : other.degree + 1] = other.coeffs
        from scipy.signal import convolve2d

        full = convolve2d(a, b)
        j, k = np.indices(full.shape)
        keep = (j + k) <= D
        discarded = float(np.abs(full[~keep]).sum())
        out = np.where(keep, full, 0)[: D + 1, : D + 1]
        l1a, l1b = np.abs(a).sum(), np.abs(b).sum()
        bound = discarded + self.bound * l1b + other.bound * l1a + self.bound * other.bound
        return TruncatedTaylor2(out, bound)

    def to_json(self) -> dict:
        D = self.degree
        return {
            "degree": D,
            "entries": [[int(j), int(k), float(self.coeffs[j, k].real), float(self.coeffs[j, k].imag)]
                        for j in range(D + 1) for k in range(D + 1 - j) if self.coeffs[j, k] != 0],
            "bound": self.bound,
        }

    @classmethod
    def from_json(cls, data: dict) -> TruncatedTaylor2:
        entries = {(int(e[0]), int(e[1])): complex(e[2], e[3]) for e in data["entries"]}
        out = cls.from_dict(entries, int(data.get("degree", DEFAULT_DEGREE)))
        out.bound = float(data.get("bound", 0.0))
        return out


def series_from_json(data: dict):
    if "degree" in data and data.get("entries") and len(data["entries"][0]) == 4:
        return TruncatedTaylor2.from_json(data)
    return TruncatedLaurent.from_json(data)
