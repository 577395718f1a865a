"""Foundational numeric types: 2D vectors, Gaussians, interval sets, low-degree polynomials.

Everything here is an immutable value; all operations are pure functions and
safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf

# Relative residual accepted when certifying a polished root.
_ROOT_RESIDUAL_RTOL = 1e-9
# Roots closer than this (relative) collapse to a single entry.
_ROOT_MERGE_RTOL = 1e-8
# Covariance eigenvalues below this are a hard error; in [floor, 0) they clamp to 0.
_PSD_EIGENVALUE_FLOOR = -1e-12


@dataclass(frozen=True)
class Vec2:
    """A finite 2D vector (position, velocity, or direction depending on context)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite vector component: ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm_sq(self) -> float:
        return self.x * self.x + self.y * self.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def perp_ccw(self) -> "Vec2":
        """Rotate by +90 degrees (counterclockwise)."""
        return Vec2(-self.y, self.x)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @staticmethod
    def from_array(a) -> "Vec2":
        return Vec2(float(a[0]), float(a[1]))


def psd_matrix(m) -> np.ndarray:
    """Validate and clean a 2x2 covariance: symmetrize, clamp round-off negatives to 0.

    Eigenvalues below -1e-12 are rejected rather than clamped.
    """
    c = np.asarray(m, dtype=float)
    if c.shape != (2, 2):
        raise ValueError(f"covariance must be 2x2, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("covariance has non-finite entries")
    c = 0.5 * (c + c.T)
    w, v = np.linalg.eigh(c)
    if w[0] < _PSD_EIGENVALUE_FLOOR * max(1.0, abs(w[1])):
        raise ValueError(f"covariance is not positive semidefinite (eigenvalues {w})")
    if w[0] < 0.0:
        w = np.maximum(w, 0.0)
        c = (v * w) @ v.T
        c = 0.5 * (c + c.T)
    c.setflags(write=False)
    return c


@dataclass(frozen=True, eq=False)
class Gaussian2:
    """A 2D Gaussian random vector: mean plus 2x2 symmetric PSD covariance."""

    mean: Vec2
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cov", psd_matrix(self.cov))

    @staticmethod
    def point(mean: Vec2) -> "Gaussian2":
        """Degenerate Gaussian: all mass at the mean."""
        return Gaussian2(mean, np.zeros((2, 2)))

    @staticmethod
    def isotropic(mean: Vec2, variance: float) -> "Gaussian2":
        return Gaussian2(mean, variance * np.eye(2))

    def cov_sqrt(self) -> np.ndarray:
        """Symmetric square root of the covariance (works for singular matrices)."""
        w, v = np.linalg.eigh(self.cov)
        return (v * np.sqrt(np.maximum(w, 0.0))) @ v.T


@dataclass(frozen=True)
class Interval:
    """A closed interval [lo, hi]; hi may be +inf."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval bound is NaN")
        if math.isinf(self.lo):
            raise ValueError("interval lo must be finite")
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def is_unbounded(self) -> bool:
        return math.isinf(self.hi)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def __str__(self) -> str:
        hi = "inf)" if self.is_unbounded else f"{self.hi:g}]"
        return f"[{self.lo:g}, {hi}"


_EMPTY_TUPLE: tuple[Interval, ...] = ()


@dataclass(frozen=True)
class IntervalSet:
    """A canonical finite union of disjoint, non-touching closed intervals.

    Construct via IntervalSet.of(...) which sorts and merges; the raw
    constructor requires already-canonical input.
    """

    intervals: tuple[Interval, ...] = _EMPTY_TUPLE

    def __post_init__(self):
        ivs = tuple(self.intervals)
        for a, b in zip(ivs, ivs[1:]):
            if not a.hi < b.lo:
                raise ValueError(f"interval set not canonical: {a} then {b}")
        object.__setattr__(self, "intervals", ivs)

    @staticmethod
    def of(*intervals: Interval) -> "IntervalSet":
        """Canonicalize an arbitrary collection: sort, merge overlapping or touching."""
        ivs = sorted(intervals, key=lambda iv: (iv.lo, iv.hi))
        merged: list[Interval] = []
        for iv in ivs:
            if merged and iv.lo <= merged[-1].hi:
                if iv.hi > merged[-1].hi:
                    merged[-1] = Interval(merged[-1].lo, iv.hi)
            else:
                merged.append(iv)
        return IntervalSet(tuple(merged))

    @staticmethod
    def empty() -> "IntervalSet":
        return IntervalSet(_EMPTY_TUPLE)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def total_width(self) -> float:
        return sum(iv.width for iv in self.intervals)

    def contains_point(self, x: float, tol: float = 0.0) -> bool:
        return any(iv.contains(x, tol) for iv in self.intervals)

    def widest(self) -> Interval:
        """The widest member (unbounded beats everything); ties go to the leftmost."""
        if self.is_empty:
            raise ValueError("widest() of empty interval set")
        return max(self.intervals, key=lambda iv: iv.width)

    def nearest_point(self, x: float) -> float:
        """The point of the set closest to x (leftmost on ties)."""
        if self.is_empty:
            raise ValueError("nearest_point() of empty interval set")
        best, best_d = None, INF
        for iv in self.intervals:
            if iv.contains(x):
                return x
            for c in (iv.lo,) if iv.is_unbounded else (iv.lo, iv.hi):
                d = abs(x - c)
                if d < best_d:
                    best, best_d = c, d
        return best

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out: list[Interval] = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i].lo, b[j].lo)
            hi = min(a[i].hi, b[j].hi)
            if lo <= hi:
                out.append(Interval(lo, hi))
            if a[i].hi <= b[j].hi:
                i += 1
            else:
                j += 1
        return IntervalSet(tuple(out))

    def contains_set(self, other: "IntervalSet", tol: float = 0.0) -> bool:
        """True if every interval of `other` lies inside some interval of self (with slack tol)."""
        for iv in other.intervals:
            if not any(
                s.lo - tol <= iv.lo and iv.hi <= s.hi + tol for s in self.intervals
            ):
                return False
        return True

    def endpoints(self) -> list[float]:
        out: list[float] = []
        for iv in self.intervals:
            out.append(iv.lo)
            out.append(iv.hi)
        return out

    def __str__(self) -> str:
        if self.is_empty:
            return "{}"
        return " u ".join(str(iv) for iv in self.intervals)


def interval_intersect(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    """Exact set intersection of two canonical interval sets."""
    return a.intersect(b)


@dataclass(frozen=True)
class Poly:
    """A real polynomial of degree <= 4, coefficients lowest degree first.

    Trailing zero coefficients are trimmed on construction; the zero polynomial
    is represented as (0.0,).
    """

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = [float(v) for v in self.coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            c = [0.0]
        if len(c) > 5:
            raise ValueError(f"degree {len(c) - 1} exceeds the supported maximum 4")
        if not all(math.isfinite(v) for v in c):
            raise ValueError("non-finite polynomial coefficient")
        object.__setattr__(self, "coeffs", tuple(c))

    @staticmethod
    def of(coeffs) -> "Poly":
        return Poly(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def coeff(self, i: int) -> float:
        return self.coeffs[i] if i < len(self.coeffs) else 0.0

    def __call__(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly((0.0,))
        return Poly(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self.coeff(i) + other.coeff(i) for i in range(n)))

    def __sub__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self.coeff(i) - other.coeff(i) for i in range(n)))

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, float)):
            return Poly(tuple(c * other for c in self.coeffs))
        out = [0.0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(tuple(out))

    __rmul__ = __mul__

    def max_abs_coeff(self) -> float:
        return max(abs(c) for c in self.coeffs)


def _quadratic_real_roots(c0: float, c1: float, c2: float) -> list[float]:
    """Real roots of c2*x^2 + c1*x + c0 via the numerically stable formula."""
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        return []
    if disc == 0.0:
        return [-c1 / (2.0 * c2)]
    q = -0.5 * (c1 + math.copysign(math.sqrt(disc), c1 if c1 != 0.0 else 1.0))
    r1 = q / c2
    r2 = c0 / q  # q != 0 here: c1 == 0 implies q = -sqrt(disc)/2 < 0
    return sorted((r1, r2))


def _eval_scale(coeffs: tuple[float, ...], x: float) -> float:
    """Magnitude of the largest term at x, used as a backward-error scale."""
    ax = max(1.0, abs(x))
    s, p = 0.0, 1.0
    for c in coeffs:
        s = max(s, abs(c) * p)
        p *= ax
    return s


def poly_real_roots(p: Poly) -> list[float]:
    """All real roots of p in ascending order, multiplicities collapsed.

    Roots come from the companion-matrix eigenvalues with a Newton polish and a
    residual check; simple roots resolve to ~1e-9 relative accuracy, repeated
    roots to the limit coefficient conditioning allows.

    Raises ValueError for the identically-zero polynomial; a nonzero constant
    has no roots and returns [].
    """
    if p.is_zero:
        raise ValueError("degenerate polynomial")
    coeffs = list(p.coeffs)
    # Drop leading coefficients that are negligible against the rest: they
    # produce spurious huge companion eigenvalues.
    scale = max(abs(c) for c in coeffs)
    while len(coeffs) > 1 and abs(coeffs[-1]) <= 1e-14 * scale:
        coeffs.pop()
    deg = len(coeffs) - 1
    if deg == 0:
        return []
    if deg == 1:
        return [-coeffs[0] / coeffs[1]]
    if deg == 2:
        roots = _quadratic_real_roots(*coeffs)
    else:
        eigs = np.roots(coeffs[::-1])
        dp = tuple(i * c for i, c in enumerate(coeffs) if i > 0)
        roots = []
        for z in eigs:
            if abs(z.imag) > 1e-3 * (1.0 + abs(z.real)):
                continue
            r = z.real
            for _ in range(6):
                fr = _horner(coeffs, r)
                dfr = _horner(dp, r)
                if dfr == 0.0:
                    break
                step = fr / dfr
                if not math.isfinite(step):
                    break
                r -= step
                if abs(step) <= 1e-15 * (1.0 + abs(r)):
                    break
            if abs(_horner(coeffs, r)) <= _ROOT_RESIDUAL_RTOL * (
                1.0 + _eval_scale(tuple(coeffs), r)
            ):
                roots.append(r)
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if merged and r - merged[-1] <= _ROOT_MERGE_RTOL * (1.0 + abs(r)):
            continue
        merged.append(r)
    return merged


def _horner(coeffs, x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_nonneg_set(p: Poly, domain: Interval) -> IntervalSet:
    """The exact closed set {x in domain : p(x) >= 0}, canonical.

    The identically-zero polynomial satisfies the inequality everywhere.
    """
    if p.is_zero:
        return IntervalSet((domain,))
    if p.degree == 0:
        return IntervalSet((domain,)) if p.coeffs[0] >= 0.0 else IntervalSet.empty()
    roots = [r for r in poly_real_roots(p) if domain.lo <= r <= domain.hi]
    inner = [r for r in roots if domain.lo < r < domain.hi]
    breaks = [domain.lo, *inner]
    pieces: list[Interval] = []
    for i, lo in enumerate(breaks):
        hi = breaks[i + 1] if i + 1 < len(breaks) else domain.hi
        mid = lo + 1.0 if math.isinf(hi) else 0.5 * (lo + hi)
        if p(mid) > 0.0:
            pieces.append(Interval(lo, hi))
    # Roots themselves always satisfy p = 0 >= 0; isolated ones become singletons.
    pieces.extend(Interval(r, r) for r in roots)
    return IntervalSet.of(*pieces)


def quadratic_geq_zero(a2: float, a1: float, a0: float, domain: Interval) -> IntervalSet:
    """Closed-form solution set of a2*s^2 + a1*s + a0 >= 0 over a domain interval.

    Degenerate leading coefficients reduce to the linear or constant case.
    """
    return poly_nonneg_set(Poly((a0, a1, a2)), domain)
