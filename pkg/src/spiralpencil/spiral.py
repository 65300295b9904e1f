"""Generalized spiral zero sets and logarithmic energy of point sets."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .sphere import (
    TWO_PI,
    SpherePoints,
    UnitSpherePoint,
    cylindrical_to_chart,
    cylindrical_to_xyz,
    pairwise_distance_sq,
)

DEFAULT_SPACING = 3.6
TRIPLE_OFFSETS = (math.pi / 3.0, 2.0 * math.pi / 3.0)
CUBE_ROOT_OFFSETS = (2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)


@dataclass(frozen=True)
class SpiralConfig:
    k: int
    variant: str = "standard"
    spacing: float = DEFAULT_SPACING

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")
        if self.variant not in ("standard", "triple"):
            raise DomainError(f"unknown spiral variant {self.variant!r}")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise DomainError(f"spacing must be positive, got {self.spacing!r}")


@dataclass(frozen=True)
class PointConfiguration:
    """Ordered points of S^2 together with their chart images."""

    h: np.ndarray
    theta: np.ndarray
    xyz: np.ndarray = field(repr=False)
    chart_zeros: np.ndarray = field(repr=False)

    @classmethod
    def from_cylindrical(cls, h, theta) -> "PointConfiguration":
        h = np.asarray(h, dtype=float).ravel()
        theta = np.asarray(theta, dtype=float).ravel()
        if np.any((h < -1.0) | (h > 1.0)):
            raise DomainError("heights must lie in [-1, 1]")
        return cls(h, theta, cylindrical_to_xyz(h, theta), cylindrical_to_chart(h, theta))

    @classmethod
    def from_xyz(cls, xyz) -> "PointConfiguration":
        xyz = np.asarray(xyz, dtype=float).reshape(-1, 3)
        xyz = xyz / np.linalg.norm(xyz, axis=1, keepdims=True)
        h = np.clip(xyz[:, 2], -1.0, 1.0)
        theta = np.mod(np.arctan2(xyz[:, 1], xyz[:, 0]), TWO_PI)
        return cls(h, theta, xyz, cylindrical_to_chart(h, theta))

    def __len__(self):
        return len(self.h)

    @property
    def points(self) -> list:
        return [UnitSpherePoint(float(a), float(b)) for a, b in zip(self.h, self.theta)]

    @property
    def sphere_points(self) -> SpherePoints:
        return SpherePoints(self.h, self.theta, self.xyz)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "h", "theta", "re_z", "im_z"])
        for i, (h, t, z) in enumerate(zip(self.h, self.theta, self.chart_zeros)):
            writer.writerow([i + 1, f"{h:.17g}", f"{t:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PointConfiguration":
        rows = [r for r in csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))]
        return cls.from_cylindrical([float(r["h"]) for r in rows], [float(r["theta"]) for r in rows])


def spiral_heights(k: int) -> np.ndarray:
    # integer numerators keep h_{k+1-i} == -h_i exactly
    return np.array([(2 * i - 1 - k) / k for i in range(1, k + 1)], dtype=float)


def _spiral_step(h: float, k: int, spacing: float) -> float:
    return spacing / (math.sqrt(k) * math.sqrt(1.0 - h * h))


def generate_spiral(config: SpiralConfig) -> PointConfiguration:
    if config.variant == "triple":
        return generate_triple_spiral(config.k, spacing=config.spacing)
    k = int(config.k)
    h = spiral_heights(k)
    theta = np.empty(k)
    t = 0.0
    for i in range(k):
        t = (t + _spiral_step(h[i], k, config.spacing)) % TWO_PI
        theta[i] = t
    return PointConfiguration.from_cylindrical(h, theta)


def generate_triple_spiral(
    k: int, spacing: float = DEFAULT_SPACING, offsets: tuple = TRIPLE_OFFSETS
) -> PointConfiguration:
    """Three points per latitude, the second and third rotated by ``offsets``.

    The default offsets are pi/3 and 2pi/3; ``CUBE_ROOT_OFFSETS`` gives the
    variant whose chart zeros differ by cube roots of unity.
    """
    SpiralConfig(k, "triple", spacing)
    k = int(k)
    base_h = spiral_heights(k)
    h = np.repeat(base_h, 3)
    theta = np.empty(3 * k)
    t = 0.0
    for i in range(k):
        t = (t + _spiral_step(base_h[i], k, spacing)) % TWO_PI
        theta[3 * i] = t
        theta[3 * i + 1] = (t + offsets[0]) % TWO_PI
        theta[3 * i + 2] = (t + offsets[1]) % TWO_PI
    return PointConfiguration.from_cylindrical(h, theta)


def negate_configuration(c: PointConfiguration) -> PointConfiguration:
    """Rotate by pi about the polar axis, i.e. z -> -z in the chart."""
    xyz = c.xyz * np.array([-1.0, -1.0, 1.0])
    theta = np.mod(c.theta + math.pi, TWO_PI)
    return PointConfiguration(c.h.copy(), theta, xyz, -c.chart_zeros)


def _upper_log_distances(xyz: np.ndarray) -> np.ndarray:
    d2 = pairwise_distance_sq(xyz, xyz)
    iu = np.triu_indices(len(xyz), 1)
    with np.errstate(divide="ignore"):
        return 0.5 * np.log(d2[iu])


def log_energy(c: PointConfiguration) -> float:
    """Sum over pairs of log(1/d); +inf when two points coincide."""
    if len(c) < 2:
        return 0.0
    return float(-np.sum(_upper_log_distances(c.xyz)))


def scaled_chord_product_log(c: PointConfiguration) -> float:
    """log of the product over pairs of (e/4) d^2."""
    k = len(c)
    pairs = k * (k - 1) // 2
    return pairs * (1.0 - math.log(4.0)) - 2.0 * log_energy(c)


def _energy_and_gradient(xyz: np.ndarray):
    diff = xyz[:, None, :] - xyz[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d2, 1.0)
    iu = np.triu_indices(len(xyz), 1)
    energy = -0.5 * float(np.sum(np.log(d2[iu])))
    grad = -np.sum(diff / d2[:, :, None], axis=1)
    # project onto tangent planes
    grad -= np.sum(grad * xyz, axis=1, keepdims=True) * xyz
    return energy, grad


def local_optimize_energy(
    c: PointConfiguration, max_steps: int = 1000, step: float = 0.1
) -> PointConfiguration:
    """Projected gradient descent on the log energy with backtracking.

    Each accepted step strictly lowers the energy; the step length doubles
    after an accepted step and halves on rejection.
    """
    xyz = c.xyz.copy()
    if len(xyz) < 2:
        return c
    energy, grad = _energy_and_gradient(xyz)
    t = float(step)
    changed = False
    for _ in range(max_steps):
        gnorm = float(np.sqrt(np.sum(grad * grad)))
        if gnorm < 1e-10:
            break
        while True:
            trial = xyz - t * grad
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            e_trial, g_trial = _energy_and_gradient(trial)
            if e_trial < energy:
                xyz, energy, grad = trial, e_trial, g_trial
                changed = True
                t *= 2.0
                break
            t *= 0.5
            if t < 1e-300:
                break
        if t < 1e-300:
            break
    if not changed:
        return c
    return PointConfiguration.from_xyz(xyz)
