"""Points of the unit sphere, the stereographic chart and sphere quadrature.

The chart is centred at the north pole: a point with cylindrical
coordinates ``(h, theta)`` has chart coordinate
``z = sqrt((1 - h) / (1 + h)) * exp(i theta)`` and the south pole is the
point at infinity.  The round metric is normalised to total area ``4 pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import DomainError, EvaluationError

TWO_PI = 2.0 * math.pi

# Two scale factors for the norm of dz in use for gradients of sections.
# The first reproduces the chordal product formula for the gradient at a zero,
# the second is the unit-covector norm of the metric 2i dz dz*/(1+|z|^2)^2.
DZ_NORM_CHORDAL = 1.0 / (2.0 * math.sqrt(2.0))
DZ_NORM_METRIC = 1.0 / math.sqrt(2.0)


class _PointAtInfinity:
    """Chart image of the south pole."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_PointAtInfinity, ())


INFINITY = _PointAtInfinity()

ExtendedComplex = Union[complex, _PointAtInfinity]


def is_infinite(z) -> bool:
    return z is INFINITY


def _reduce_angle(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    if t >= TWO_PI:
        t = 0.0
    return t


@dataclass(frozen=True)
class UnitSpherePoint:
    """A point of S^2 in cylindrical coordinates with its cached 3-vector."""

    h: float
    theta: float
    vec: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r = math.sqrt(max(0.0, (1.0 - self.h) * (1.0 + self.h)))
        object.__setattr__(
            self, "vec", (r * math.cos(self.theta), r * math.sin(self.theta), self.h)
        )

    @property
    def xyz(self) -> np.ndarray:
        return np.array(self.vec)


NORTH_POLE = UnitSpherePoint(1.0, 0.0)
SOUTH_POLE = UnitSpherePoint(-1.0, 0.0)


def from_cylindrical(h: float, theta: float) -> UnitSpherePoint:
    if not (math.isfinite(h) and -1.0 <= h <= 1.0):
        raise DomainError(f"height h={h!r} outside [-1, 1]")
    if not math.isfinite(theta):
        raise DomainError(f"azimuth theta={theta!r} is not finite")
    return UnitSpherePoint(float(h), _reduce_angle(float(theta)))


def to_chart(p: UnitSpherePoint) -> ExtendedComplex:
    if p.h == -1.0:
        return INFINITY
    if p.h == 1.0:
        return 0j
    r = math.sqrt((1.0 - p.h) / (1.0 + p.h))
    return complex(r * math.cos(p.theta), r * math.sin(p.theta))


def from_chart(z: ExtendedComplex) -> UnitSpherePoint:
    if z is INFINITY:
        return SOUTH_POLE
    z = complex(z)
    if z == 0:
        return NORTH_POLE
    a2 = abs(z) ** 2
    if a2 > 1.0:
        # (1 - |z|^2)/(1 + |z|^2) written in 1/|z|^2 to keep relative accuracy
        b2 = 1.0 / a2
        h = (b2 - 1.0) / (b2 + 1.0)
    else:
        h = (1.0 - a2) / (1.0 + a2)
    return UnitSpherePoint(h, _reduce_angle(math.atan2(z.imag, z.real)))


def chordal_distance_sq(x: UnitSpherePoint, y: UnitSpherePoint) -> float:
    """Squared chordal distance, 2 - 2<x, y>, evaluated as |x - y|^2."""
    return math.fsum((a - b) ** 2 for a, b in zip(x.vec, y.vec))


def chordal_distance(x: UnitSpherePoint, y: UnitSpherePoint) -> float:
    return math.sqrt(chordal_distance_sq(x, y))


def log_chordal_distance(x: UnitSpherePoint, y: UnitSpherePoint) -> float:
    d2 = chordal_distance_sq(x, y)
    return -math.inf if d2 == 0.0 else 0.5 * math.log(d2)


def chart_chordal_distance(z: ExtendedComplex, w: ExtendedComplex) -> float:
    """Chordal distance computed from chart coordinates."""
    if z is INFINITY and w is INFINITY:
        return 0.0
    if z is INFINITY or w is INFINITY:
        u = w if z is INFINITY else z
        return 2.0 / math.sqrt(1.0 + abs(u) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


# ---------------------------------------------------------------------------
# Vectorised point sets


def cylindrical_to_xyz(h, theta) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    theta = np.asarray(theta, dtype=float)
    r = np.sqrt(np.maximum(0.0, (1.0 - h) * (1.0 + h)))
    return np.stack([r * np.cos(theta), r * np.sin(theta), h], axis=-1)


def cylindrical_to_chart(h, theta) -> np.ndarray:
    """Chart coordinates of an array of points; the south pole maps to inf."""
    h = np.asarray(h, dtype=float)
    theta = np.asarray(theta, dtype=float)
    south = h == -1.0
    with np.errstate(divide="ignore"):
        r = np.sqrt((1.0 - h) / (1.0 + np.where(south, 0.0, h)))
    return np.where(south, complex(np.inf, 0.0), np.where(south, 1.0, r) * np.exp(1j * theta))


def chart_to_cylindrical(z):
    z = np.asarray(z, dtype=complex)
    a2 = np.abs(z) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        b2 = 1.0 / a2
        h = np.where(a2 > 1.0, (b2 - 1.0) / (b2 + 1.0), (1.0 - a2) / (1.0 + a2))
    h = np.where(np.isinf(a2), -1.0, h)
    theta = np.mod(np.angle(z), TWO_PI)
    return h, theta


def chart_to_xyz(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    a2 = np.abs(z) ** 2
    big = a2 > 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(big, 1.0 / np.where(big, z, 1.0), z)
        b2 = np.abs(w) ** 2
        h = np.where(big, (b2 - 1.0) / (b2 + 1.0), (1.0 - a2) / (1.0 + a2))
        # 2z/(1+|z|^2) == 2 conj(w)/(1+|w|^2) with w = 1/z
        planar = np.where(big, 2.0 * np.conj(w) / (1.0 + b2), 2.0 * z / (1.0 + a2))
    out = np.stack([planar.real, planar.imag, h], axis=-1)
    inf = np.isinf(a2)
    if np.any(inf):
        out[inf] = (0.0, 0.0, -1.0)
    return out


@dataclass(frozen=True)
class SpherePoints:
    """An ordered batch of sphere points stored as arrays."""

    h: np.ndarray
    theta: np.ndarray
    xyz: np.ndarray = field(repr=False)

    @classmethod
    def from_cylindrical(cls, h, theta) -> "SpherePoints":
        h = np.asarray(h, dtype=float).ravel()
        theta = np.mod(np.asarray(theta, dtype=float).ravel(), TWO_PI)
        if np.any((h < -1.0) | (h > 1.0)) or not np.all(np.isfinite(theta)):
            raise DomainError("cylindrical coordinates out of range")
        return cls(h, theta, cylindrical_to_xyz(h, theta))

    @classmethod
    def from_chart(cls, z) -> "SpherePoints":
        z = np.asarray(z, dtype=complex).ravel()
        h, theta = chart_to_cylindrical(z)
        return cls(h, theta, chart_to_xyz(z))

    @classmethod
    def from_points(cls, points) -> "SpherePoints":
        points = list(points)
        return cls(
            np.array([p.h for p in points], dtype=float),
            np.array([p.theta for p in points], dtype=float),
            np.array([p.vec for p in points], dtype=float).reshape(-1, 3),
        )

    def __len__(self):
        return len(self.h)

    def __getitem__(self, i) -> UnitSpherePoint:
        return UnitSpherePoint(float(self.h[i]), float(self.theta[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def chart(self) -> np.ndarray:
        return cylindrical_to_chart(self.h, self.theta)


def random_points(n: int, rng: np.random.Generator) -> SpherePoints:
    """Uniformly distributed points (Archimedes: h is uniform on [-1, 1])."""
    return SpherePoints.from_cylindrical(rng.uniform(-1.0, 1.0, n), rng.uniform(0.0, TWO_PI, n))


def pairwise_distance_sq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of squared chordal distances between rows of a and rows of b.

    The bulk uses 2 - 2<x, y>; entries small enough to lose relative accuracy
    that way are recomputed from the coordinate differences.
    """
    d2 = 2.0 - 2.0 * (a @ b.T)
    small = d2 < 1e-3
    if np.any(small):
        i, j = np.nonzero(small)
        diff = a[i] - b[j]
        d2[i, j] = np.einsum("ij,ij->i", diff, diff)
    return np.maximum(d2, 0.0)


# ---------------------------------------------------------------------------
# Quadrature


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Legendre nodes in h tensored with uniform, half-offset azimuths."""

    points: SpherePoints
    weights: np.ndarray
    n_h: int
    n_theta: int

    @property
    def nodes(self) -> list:
        return list(self.points)

    def __len__(self):
        return len(self.weights)

    def jittered(self, dtheta: float) -> "QuadratureGrid":
        pts = SpherePoints.from_cylindrical(self.points.h, self.points.theta + dtheta)
        return QuadratureGrid(pts, self.weights, self.n_h, self.n_theta)


def quadrature_grid(n_h: int, n_theta: int) -> QuadratureGrid:
    if n_h < 2 or n_theta < 2:
        raise DomainError(f"grid sizes must be >= 2, got n_h={n_h}, n_theta={n_theta}")
    x, w = np.polynomial.legendre.leggauss(n_h)
    theta = (np.arange(n_theta) + 0.5) * (TWO_PI / n_theta)
    hh = np.repeat(x, n_theta)
    tt = np.tile(theta, n_h)
    weights = np.repeat(w, n_theta) * (TWO_PI / n_theta)
    return QuadratureGrid(SpherePoints.from_cylindrical(hh, tt), weights, n_h, n_theta)


def integrate(f: Callable[[SpherePoints], np.ndarray], grid: QuadratureGrid) -> float:
    """Quadrature of f over the sphere; f maps a SpherePoints batch to values."""
    values = np.asarray(f(grid.points), dtype=float)
    if values.shape == ():
        values = np.full(len(grid), float(values))
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise EvaluationError(
            f"non-finite integrand at node {i} "
            f"(h={grid.points.h[i]!r}, theta={grid.points.theta[i]!r}): {values[i]!r}"
        )
    return float(np.sum(grid.weights * values))


def fs_laplacian(f: Callable[[np.ndarray], np.ndarray], z, step: float) -> np.ndarray:
    """Round-sphere Laplacian (1+|z|^2)^2 d/dz d/dzbar by a 5-point chart stencil.

    ``f`` takes an array of chart coordinates.  With this normalisation
    spherical harmonics of degree l are eigenfunctions with eigenvalue
    -l(l+1).
    """
    z = np.asarray(z, dtype=complex)
    centre = f(z)
    ring = f(z + step) + f(z - step) + f(z + 1j * step) + f(z - 1j * step)
    flat = (ring - 4.0 * centre) / step**2
    return 0.25 * (1.0 + np.abs(z) ** 2) ** 2 * flat
