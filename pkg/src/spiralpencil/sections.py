"""Sections of O(k) over the sphere given by their zeros, evaluated in log space.

A section of degree k is stored as its finite chart zeros plus a real
log-prefactor; zeros at the south pole are implicit (``degree`` minus the
number of finite zeros).  In the chart the section is the polynomial
``exp(log_prefactor) * prod(z - z_i)`` and its pointwise norm squared is
``|p(z)|^2 / (1 + |z|^2)^k``.  With the canonical prefactor
``k/2 - sum(log(1 + |z_i|^2))/2`` this norm squared equals the product of
``(e/4) d^2(x, x_i)`` over the zeros, whose logarithm integrates to zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegeneratePairError,
    DegenerateZeroError,
    DomainError,
    PoleError,
    UnsupportedConfigurationError,
)
from .logspace import LogComplex, complex_log_sum
from .sphere import (
    DZ_NORM_CHORDAL,
    QuadratureGrid,
    SpherePoints,
    UnitSpherePoint,
    chart_to_xyz,
    cylindrical_to_chart,
    fs_laplacian,
    pairwise_distance_sq,
    to_chart,
)
from .spiral import (
    DEFAULT_SPACING,
    PointConfiguration,
    SpiralConfig,
    generate_spiral,
    negate_configuration,
)

LOG_E_OVER_4 = 1.0 - math.log(4.0)
_CHUNK = 2_000_000


def canonical_log_prefactor(degree: int, zeros) -> float:
    zeros = np.asarray(zeros, dtype=complex)
    return 0.5 * degree - 0.5 * math.fsum(np.log1p(np.abs(zeros) ** 2))


@dataclass(frozen=True, eq=False)
class Section:
    degree: int
    zeros: np.ndarray
    log_prefactor: float
    prefactor_arg: float = 0.0
    points_xyz: np.ndarray | None = field(default=None, repr=False)
    _zero_xyz: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        zeros = np.asarray(self.zeros, dtype=complex).ravel()
        if self.degree < 1:
            raise DomainError(f"degree must be positive, got {self.degree}")
        if len(zeros) > self.degree:
            raise DomainError(f"{len(zeros)} zeros exceed degree {self.degree}")
        if not np.all(np.isfinite(zeros)):
            raise DomainError("zeros must be finite chart coordinates")
        object.__setattr__(self, "zeros", zeros)
        if self.points_xyz is not None:
            # exact unit vectors of the finite zeros, when the caller has them
            xyz = np.asarray(self.points_xyz, dtype=float).reshape(-1, 3)
            if len(xyz) != len(zeros):
                raise DomainError("points_xyz must match the finite zeros")
        else:
            xyz = chart_to_xyz(zeros).reshape(-1, 3)
        south = np.tile([0.0, 0.0, -1.0], (self.n_infinite, 1))
        object.__setattr__(self, "_zero_xyz", np.vstack([xyz, south]))

    @property
    def n_infinite(self) -> int:
        return self.degree - len(self.zeros)

    @property
    def zero_xyz(self) -> np.ndarray:
        """Unit vectors of all zeros, the ones at the south pole last."""
        return self._zero_xyz

    @property
    def normalization_offset(self) -> float:
        """log of the ratio of norm squared to the canonical norm squared."""
        return 2.0 * (self.log_prefactor - canonical_log_prefactor(self.degree, self.zeros))

    def canonical(self) -> "Section":
        return Section(
            self.degree, self.zeros, canonical_log_prefactor(self.degree, self.zeros), 0.0, self.points_xyz
        )

    def reflected(self) -> "Section":
        """The section pulled back by z -> 1/z (rotation by pi about the x axis).

        Its chart polynomial is ``w^k p(1/w)``; norms are preserved pointwise.
        """
        nz = self.zeros[self.zeros != 0]
        n_origin = len(self.zeros) - len(nz)
        new_zeros = np.concatenate([np.zeros(self.n_infinite, dtype=complex), 1.0 / nz])
        log_pref = self.log_prefactor + math.fsum(np.log(np.abs(nz)))
        arg = self.prefactor_arg + float(np.sum(np.angle(-nz)))
        out = Section(self.degree, new_zeros, log_pref, arg)
        assert out.n_infinite == n_origin
        return out

    def to_json(self) -> str:
        d = {
            "degree": int(self.degree),
            "zeros": [[float(z.real), float(z.imag)] for z in self.zeros],
            "log_prefactor": float(self.log_prefactor),
        }
        if self.prefactor_arg:
            d["prefactor_arg"] = float(self.prefactor_arg)
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "Section":
        d = json.loads(text)
        zeros = np.array([complex(a, b) for a, b in d["zeros"]], dtype=complex)
        return cls(int(d["degree"]), zeros, float(d["log_prefactor"]), float(d.get("prefactor_arg", 0.0)))


@dataclass(frozen=True, eq=False)
class SectionPair:
    p: Section
    q: Section
    global_scale_log: float = 0.0

    def __post_init__(self):
        if self.p.degree != self.q.degree:
            raise DomainError(f"degree mismatch: {self.p.degree} != {self.q.degree}")

    @property
    def degree(self) -> int:
        return self.p.degree

    def reflected(self) -> "SectionPair":
        return SectionPair(self.p.reflected(), self.q.reflected(), self.global_scale_log)

    def swapped(self) -> "SectionPair":
        return SectionPair(self.q, self.p, self.global_scale_log)

    def rescaled(self, log_scale: float) -> "SectionPair":
        return SectionPair(self.p, self.q, self.global_scale_log + log_scale)


def make_section(c: PointConfiguration) -> Section:
    zeros = np.asarray(c.chart_zeros, dtype=complex)
    if not np.all(np.isfinite(zeros)):
        raise UnsupportedConfigurationError("configuration has a point at the south pole")
    return Section(len(zeros), zeros, canonical_log_prefactor(len(zeros), zeros), 0.0, c.xyz)


def spiral_pair(k: int, spacing: float = DEFAULT_SPACING, variant: str = "standard") -> SectionPair:
    """The pair (p, q) whose zeros are the spiral points and their negatives."""
    c = generate_spiral(SpiralConfig(k, variant, spacing))
    return SectionPair(make_section(c), make_section(negate_configuration(c)))


def monomial_pair(k: int) -> SectionPair:
    """p = z^k and q = 1 with unit prefactors."""
    return SectionPair(Section(k, np.zeros(k, dtype=complex), 0.0), Section(k, np.array([], dtype=complex), 0.0))


# ---------------------------------------------------------------------------
# Norms


def _chunks(n: int, k: int):
    step = max(1, _CHUNK // max(k, 1))
    for start in range(0, n, step):
        yield slice(start, min(n, start + step))


def log_norm_sq_xyz(s: Section, xyz) -> np.ndarray:
    """log ||s||^2 at an (N, 3) array of unit vectors (chordal product form)."""
    xyz = np.asarray(xyz, dtype=float).reshape(-1, 3)
    out = np.empty(len(xyz))
    zx = s.zero_xyz
    for sl in _chunks(len(xyz), s.degree):
        d2 = pairwise_distance_sq(xyz[sl], zx)
        with np.errstate(divide="ignore"):
            out[sl] = np.sum(np.log(d2), axis=1)
    return out + s.degree * LOG_E_OVER_4 + s.normalization_offset


def log_norm_sq(s: Section, x: UnitSpherePoint) -> float:
    return float(log_norm_sq_xyz(s, np.array(x.vec))[0])


def log_eval_chart_many(s: Section, z) -> np.ndarray:
    """Complex log of the chart polynomial at an array of finite points."""
    z = np.asarray(z, dtype=complex).ravel()
    out = np.empty(len(z), dtype=complex)
    for sl in _chunks(len(z), len(s.zeros)):
        out[sl] = complex_log_sum(z[sl, None] - s.zeros[None, :], axis=1)
    return out + complex(s.log_prefactor, s.prefactor_arg)


def log_norm_sq_chart(s: Section, z) -> np.ndarray:
    """log ||s||^2 from the chart value, |p(z)|^2 / (1+|z|^2)^k."""
    z = np.asarray(z, dtype=complex).ravel()
    return 2.0 * log_eval_chart_many(s, z).real - s.degree * np.log1p(np.abs(z) ** 2)


def eval_chart(s: Section, z: complex) -> LogComplex:
    z = complex(z)
    if np.any(s.zeros == z):
        return LogComplex.zero()
    return LogComplex.from_log(log_eval_chart_many(s, [z])[0])


def log_derivative_sum(s: Section, z: complex) -> complex:
    """p'(z)/p(z) = sum of 1/(z - z_i)."""
    z = complex(z)
    if np.any(s.zeros == z):
        raise PoleError(f"log-derivative evaluated at a zero z={z!r}")
    return complex(np.sum(1.0 / (z - s.zeros)))


def norm_at_origin_closed_form(k: int) -> float:
    """log of prod (e/2)(1 + h_i) over the spiral heights, via log-gamma."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    return math.log(2.0) + k + math.lgamma(2 * k) - k * math.log(4.0) - k * math.log(k) - math.lgamma(k)


# ---------------------------------------------------------------------------
# Pairs


def pair_log_density_xyz(pair: SectionPair, xyz) -> np.ndarray:
    lp = log_norm_sq_xyz(pair.p, xyz)
    lq = log_norm_sq_xyz(pair.q, xyz)
    both = np.isneginf(lp) & np.isneginf(lq)
    if np.any(both):
        raise DegeneratePairError("p and q vanish at a common point")
    return pair.global_scale_log + np.logaddexp(lp, lq)


def pair_log_density(pair: SectionPair, x: UnitSpherePoint) -> float:
    return float(pair_log_density_xyz(pair, np.array(x.vec))[0])


def pair_log_density_chart(pair: SectionPair, z) -> np.ndarray:
    """log rho at chart points, switching to the reflected chart for |z| > 1."""
    z = np.asarray(z, dtype=complex).ravel()
    out = np.empty(len(z))
    far = np.abs(z) > 1.0
    for mask, pr, zz in ((~far, pair, z[~far]), (far, pair.reflected(), 1.0 / z[far])):
        if len(zz):
            lp = log_norm_sq_chart(pr.p, zz)
            lq = log_norm_sq_chart(pr.q, zz)
            out[mask] = pair.global_scale_log + np.logaddexp(lp, lq)
    return out


def grad_log_norms_at_zeros(s: Section) -> np.ndarray:
    """log ||grad s|| at every finite zero (chordal product form)."""
    n = len(s.zeros)
    zx = s.zero_xyz
    d2 = pairwise_distance_sq(zx[:n], zx)
    d2[np.arange(n), np.arange(n)] = 1.0
    if np.any(d2 == 0.0):
        i = int(np.nonzero(np.any(d2 == 0.0, axis=1))[0][0])
        raise DegenerateZeroError(f"zero {i} is repeated")
    k = s.degree
    return (
        -0.5 * math.log(2.0)
        + 0.5 * k * LOG_E_OVER_4
        + 0.5 * np.sum(np.log(d2), axis=1)
        + 0.5 * s.normalization_offset
    )


def grad_norm_at_zero(s: Section, i: int) -> float:
    """log of (1/sqrt 2)(e/4)^{k/2} prod_{j != i} d(x_i, x_j)."""
    if not 0 <= i < len(s.zeros):
        raise IndexError(f"zero index {i} out of range")
    return float(grad_log_norms_at_zeros(s)[i])


def grad_norm_at_zero_derivative(s: Section, i: int, dz_norm: float = DZ_NORM_CHORDAL) -> float:
    """log of |p'(z_i)| (1+|z_i|^2)^{1-k/2} times the dz scale factor."""
    zi = s.zeros[i]
    others = np.delete(s.zeros, i)
    if np.any(others == zi):
        raise DegenerateZeroError(f"zero {i} is repeated")
    log_dp = s.log_prefactor + float(np.sum(np.log(np.abs(zi - others))))
    return log_dp + (1.0 - 0.5 * s.degree) * math.log1p(abs(zi) ** 2) + math.log(dz_norm)


def _log_abs_wronskian_near(pair: SectionPair, z: np.ndarray):
    """log|p|, log|q| and log|p'q - pq'| at chart points (chart polynomials)."""
    p, q = pair.p, pair.q
    n = len(z)
    lp = np.empty(n)
    lq = np.empty(n)
    lw = np.empty(n)
    k = max(len(p.zeros), len(q.zeros), 1)
    for sl in _chunks(n, k):
        zz = z[sl]
        a = zz[:, None] - p.zeros[None, :]
        b = zz[:, None] - q.zeros[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            lp[sl] = p.log_prefactor + np.sum(np.log(np.abs(a)), axis=1)
            lq[sl] = q.log_prefactor + np.sum(np.log(np.abs(b)), axis=1)
            sp = np.sum(1.0 / a, axis=1)
            sq = np.sum(1.0 / b, axis=1)
            lw[sl] = lp[sl] + lq[sl] + np.log(np.abs(sp - sq))
        hit = np.nonzero(np.any(a == 0, axis=1) | np.any(b == 0, axis=1))[0]
        for j in hit:
            lw[sl.start + j] = _log_abs_wronskian_at_zero(pair, zz[j])
    return lp, lq, lw


def _log_abs_wronskian_at_zero(pair: SectionPair, z: complex) -> float:
    p, q = pair.p, pair.q
    mp = int(np.sum(p.zeros == z))
    mq = int(np.sum(q.zeros == z))
    if mp and mq:
        raise DegeneratePairError(f"p and q share the zero z={z!r}")
    if mp >= 2 or mq >= 2:
        return -math.inf
    # W = p'q at a simple zero of p (and -p q' at one of q)
    vanishing, other = (p, q) if mp else (q, p)
    rest = vanishing.zeros[vanishing.zeros != z]
    log_d = vanishing.log_prefactor + float(np.sum(np.log(np.abs(z - rest))))
    log_o = other.log_prefactor + float(np.sum(np.log(np.abs(z - other.zeros))))
    return log_d + log_o


def _chart_split(points: SpherePoints):
    """Chart coordinates with |z| <= 1 and their reflected counterparts."""
    far = points.h < 0.0
    near_z = cylindrical_to_chart(points.h[~far], points.theta[~far])
    far_w = cylindrical_to_chart(-points.h[far], -points.theta[far])
    return far, near_z, far_w


def _pullback_from_logs(lp, lq, lw, z):
    return 2.0 * lw + 2.0 * np.log1p(np.abs(z) ** 2) - 2.0 * np.logaddexp(2.0 * lp, 2.0 * lq)


def _wronskian_from_logs(lw, z, k):
    return 2.0 * lw - math.log(2.0) - (2 * k - 2) * np.log1p(np.abs(z) ** 2)


def _check_common(lp, lq):
    if np.any(np.isneginf(lp) & np.isneginf(lq)):
        raise DegeneratePairError("p and q vanish at a common point")


def _pair_many(pair: SectionPair, points: SpherePoints, which: str) -> np.ndarray:
    far, near_z, far_w = _chart_split(points)
    out = np.empty(len(points))
    for mask, pr, zz in ((~far, pair, near_z), (far, pair.reflected(), far_w)):
        if len(zz) == 0:
            continue
        lp, lq, lw = _log_abs_wronskian_near(pr, zz)
        _check_common(lp, lq)
        if which == "pullback":
            out[mask] = _pullback_from_logs(lp, lq, lw, zz)
        else:
            out[mask] = _wronskian_from_logs(lw, zz, pair.degree)
    return out


def pullback_log_density_many(pair: SectionPair, points: SpherePoints) -> np.ndarray:
    return _pair_many(pair, points, "pullback")


def wronskian_log_norm_many(pair: SectionPair, points: SpherePoints) -> np.ndarray:
    return _pair_many(pair, points, "wronskian")


def pullback_log_density(pair: SectionPair, x: UnitSpherePoint) -> float:
    """log of |p'q - pq'|^2 (1+|z|^2)^2 / (|p|^2 + |q|^2)^2; -inf at branch points."""
    return float(pullback_log_density_many(pair, SpherePoints.from_points([x]))[0])


def wronskian_log_norm(pair: SectionPair, x: UnitSpherePoint) -> float:
    """log of |p'q - pq'|^2 / (2 (1+|z|^2)^{2k-2}), a section norm of O(2k-2)."""
    return float(wronskian_log_norm_many(pair, SpherePoints.from_points([x]))[0])


def pullback_log_density_chart(pair: SectionPair, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex).ravel()
    return pullback_log_density_many(pair, SpherePoints.from_chart(z))


def energy_functional(pair: SectionPair, grid: QuadratureGrid, exponent: int = 2) -> float:
    """Integral of (F*w/w)^exponent; exponent 2 and 4 give E1 and E2."""
    if exponent not in (2, 4):
        raise DomainError(f"exponent must be 2 or 4, got {exponent}")
    values = np.exp(exponent * pullback_log_density_many(pair, grid.points))
    return float(np.sum(grid.weights * values))


# ---------------------------------------------------------------------------
# Curvature identity: Laplacian of log rho equals F*w/w - k


def density_identity_residuals(pair: SectionPair, points: SpherePoints, step: float | None = None):
    """Finite-difference Laplacian of log rho against F*w/w - k at each point.

    Returns ``(laplacian, pullback, relative_residual)`` where the residual
    is ``|laplacian - (pullback - k)| / k``.  Points in the southern
    hemisphere are handled in the reflected chart.
    """
    k = pair.degree
    if step is None:
        step = 1e-4 / math.sqrt(k)
    far, near_z, far_w = _chart_split(points)
    lap = np.empty(len(points))
    for mask, pr, zz in ((~far, pair, near_z), (far, pair.reflected(), far_w)):
        if len(zz):
            lap[mask] = fs_laplacian(lambda w, pr=pr: _pair_log_density_plain(pr, w), zz, step)
    dens = np.exp(pullback_log_density_many(pair, points))
    return lap, dens, np.abs(lap - (dens - k)) / k


def _pair_log_density_plain(pair: SectionPair, z) -> np.ndarray:
    lp = log_norm_sq_chart(pair.p, z)
    lq = log_norm_sq_chart(pair.q, z)
    return np.logaddexp(lp, lq)


__all__ = [
    "Section",
    "SectionPair",
    "canonical_log_prefactor",
    "make_section",
    "spiral_pair",
    "monomial_pair",
    "log_norm_sq",
    "log_norm_sq_xyz",
    "log_norm_sq_chart",
    "eval_chart",
    "log_derivative_sum",
    "norm_at_origin_closed_form",
    "pair_log_density",
    "pair_log_density_xyz",
    "pair_log_density_chart",
    "grad_norm_at_zero",
    "grad_log_norms_at_zeros",
    "grad_norm_at_zero_derivative",
    "pullback_log_density",
    "pullback_log_density_many",
    "pullback_log_density_chart",
    "wronskian_log_norm",
    "wronskian_log_norm_many",
    "energy_functional",
    "density_identity_residuals",
    "to_chart",
]
