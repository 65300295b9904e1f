"""Fibers and branch points of the rational map p/q, and uniform-distribution
statistics of the resulting point sets."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import eval_legendre, lpmv

from .errors import DomainError, EvaluationError, RootFailureError
from .sections import (
    Section,
    SectionPair,
    log_norm_sq_xyz,
    wronskian_log_norm_many,
)
from .sphere import INFINITY, QuadratureGrid, SpherePoints, UnitSpherePoint, is_infinite

MAX_DEGREE = 400
MAX_SWEEPS = 500
CANCEL_TOL = 1e-13
RESIDUAL_TOL = 1e-8
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
JITTER = 1e-7
_EPS = np.finfo(float).eps
_LN2 = math.log(2.0)
_NO_EXP = -(10**9)


# ---------------------------------------------------------------------------
# Extended-exponent coefficients (ascending powers)


@dataclass(frozen=True)
class ExtCoeffs:
    """Coefficients stored as mantissa * 2**exponent, ascending in degree."""

    mant: np.ndarray
    expo: np.ndarray

    @classmethod
    def from_log(cls, log_mag: np.ndarray, phase: np.ndarray) -> "ExtCoeffs":
        log_mag = np.asarray(log_mag, dtype=float)
        finite = np.isfinite(log_mag)
        e = np.where(finite, np.floor(np.where(finite, log_mag, 0.0) / _LN2), 0).astype(np.int64)
        m = np.where(finite, np.exp(np.where(finite, log_mag, 0.0) - e * _LN2) * np.exp(1j * phase), 0.0)
        return _normalize(m, np.where(finite, e, _NO_EXP))

    @property
    def log_abs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mant)) + self.expo * _LN2

    @property
    def degree(self) -> int:
        return len(self.mant) - 1

    def scaled(self):
        """Doubles divided by 2**E with E the largest exponent, and E."""
        E = int(np.max(self.expo))
        return self.mant * np.exp2((self.expo - E).astype(float)), E


def _normalize(m: np.ndarray, e: np.ndarray) -> ExtCoeffs:
    _, e2 = np.frexp(np.abs(m))
    zero = m == 0
    m = m * np.exp2(-e2.astype(float))
    e = np.where(zero, _NO_EXP, e + e2)
    return ExtCoeffs(np.where(zero, 0.0, m).astype(complex), e.astype(np.int64))


def _ext_add(am, ae, bm, be):
    E = np.maximum(ae, be)
    s = am * np.exp2((ae - E).astype(float)) + bm * np.exp2((be - E).astype(float))
    return _normalize(s, E)


def expand_zeros(zeros) -> ExtCoeffs:
    """Coefficients of prod (z - z_i) built one linear factor at a time."""
    zeros = np.asarray(zeros, dtype=complex)
    c = ExtCoeffs(np.array([1.0 + 0j]), np.array([0], dtype=np.int64))
    for r in zeros:
        shifted_m = np.concatenate([[0.0], c.mant])
        shifted_e = np.concatenate([[_NO_EXP], c.expo])
        prod = _normalize(np.concatenate([-r * c.mant, [0.0]]), np.concatenate([c.expo, [_NO_EXP]]))
        c = _ext_add(shifted_m, shifted_e, prod.mant, prod.expo)
    return c


def _section_coeffs(s: Section) -> tuple:
    """log|coefficients| and their phases for the chart polynomial of s."""
    c = expand_zeros(s.zeros)
    return c.log_abs + s.log_prefactor, np.angle(c.mant) + s.prefactor_arg


def _combine_logs(la, pa, lb, pb):
    """a - b coefficientwise in log form, plus log(|a| + |b|) for cancellation tests."""
    n = max(len(la), len(lb))
    la = np.pad(la, (0, n - len(la)), constant_values=-np.inf)
    lb = np.pad(lb, (0, n - len(lb)), constant_values=-np.inf)
    pa = np.pad(pa, (0, n - len(pa)))
    pb = np.pad(pb, (0, n - len(pb)))
    top = np.maximum(la, lb)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(invalid="ignore"):
        diff = np.exp(la - safe + 1j * pa) - np.exp(lb - safe + 1j * pb)
        diff = np.where(np.isfinite(top), diff, 0.0)
        with np.errstate(divide="ignore"):
            log_c = np.log(np.abs(diff)) + safe
            log_scale = np.logaddexp(la, lb)
    return log_c, np.angle(diff), log_scale


def _trim(log_c: np.ndarray, log_scale: np.ndarray) -> int:
    """Polynomial degree after dropping cancelled leading coefficients."""
    d = len(log_c) - 1
    while d >= 0 and not (log_c[d] > math.log(CANCEL_TOL) + log_scale[d]):
        d -= 1
    return d


def _trim_low(log_c: np.ndarray, log_scale: np.ndarray, d: int) -> int:
    """Number of cancelled trailing coefficients, i.e. exact roots at z = 0."""
    j = 0
    while j < d and not (log_c[j] > math.log(CANCEL_TOL) + log_scale[j]):
        j += 1
    return j


def _deflate_origin(ratio: Callable, m0: int) -> Callable:
    """Newton data for f / z^m0 from that of f."""
    if m0 == 0:
        return ratio

    def inner(z):
        N, log_f, log_bound = ratio(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            N = 1.0 / (1.0 / N - m0 / z)
            lz = m0 * np.log(np.abs(z))
        return N, log_f - lz, log_bound - lz

    return inner


def _solve(ratio: Callable, log_c: np.ndarray, log_scale: np.ndarray, d: int, max_sweeps: int):
    """Finite roots and their backward errors for a polynomial of degree d."""
    m0 = _trim_low(log_c, log_scale, d)
    inner = _deflate_origin(ratio, m0)
    lc = log_c[m0 : d + 1]
    roots, sweeps = _aberth(inner, lc, d - m0, max_sweeps)
    be = _backward_errors(inner(roots)[1], roots, lc)
    _certify(be)
    return np.concatenate([np.zeros(m0, dtype=complex), roots]), np.concatenate([np.zeros(m0), be]), sweeps


# ---------------------------------------------------------------------------
# Aberth-Ehrlich iteration


def _cauchy_radius(log_c: np.ndarray, d: int) -> float:
    """Positive root of |c_d| x^d = sum_{j<d} |c_j| x^j, by bisection in log x."""
    lower = log_c[:d]
    if not np.any(np.isfinite(lower)):
        return 0.0
    j = np.arange(d)

    def phi(t):
        return log_c[d] + d * t - np.logaddexp.reduce(lower + j * t)

    lo, hi = -50.0, 50.0
    while phi(lo) > 0:
        lo -= 50.0
    while phi(hi) < 0:
        hi += 50.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if phi(mid) < 0:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


def _initial_guesses(log_c: np.ndarray, d: int) -> np.ndarray:
    """Starting points on circles read off the Newton polygon of log|c_j|.

    Each edge of the upper convex hull of (j, log|c_j|) contributes as many
    points as its horizontal length, on the circle whose radius is the
    edge's slope; no radius exceeds the Cauchy bound.  Phases follow the
    golden angle.
    """
    cap = _cauchy_radius(log_c, d)
    pts = [(j, float(v)) for j, v in enumerate(log_c[: d + 1]) if np.isfinite(v)]
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) <= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    radii = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        radii += [min(math.exp((y1 - y2) / (x2 - x1)), cap)] * (x2 - x1)
    # roots at the origin were deflated, so the hull starts at j = 0
    radii = np.array(radii[:d] + [cap] * (d - len(radii)))
    return radii * np.exp(1j * (GOLDEN_ANGLE * np.arange(d) + 0.5))


def _backward_errors(log_f: np.ndarray, roots: np.ndarray, log_c: np.ndarray) -> np.ndarray:
    """|f(r)| / sum |c_j| |r|^j computed in log space."""
    j = np.arange(len(log_c))
    with np.errstate(divide="ignore"):
        lr = np.log(np.abs(roots))
    fin = np.isfinite(log_c)
    terms = log_c[None, fin] + j[None, fin] * lr[:, None]
    terms = np.where(np.isnan(terms), -np.inf, terms)
    denom = np.logaddexp.reduce(terms, axis=1)
    with np.errstate(invalid="ignore"):
        return np.where(np.isneginf(log_f), 0.0, np.exp(log_f - denom))


def _aberth(ratio: Callable, log_c: np.ndarray, d: int, max_sweeps: int):
    """Simultaneous Aberth iteration for the d finite roots.

    ``ratio(z)`` returns the Newton correction f/f', log|f| and a log rounding
    bound for the product-form evaluation at each point of z.
    """
    if d == 0:
        return np.zeros(0, dtype=complex), 0
    z = _initial_guesses(log_c, d)
    active = np.ones(d, dtype=bool)
    be_tol = 10.0 * max(d, 1) * _EPS
    for sweep in range(max_sweeps):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            return z, sweep
        zi = z[idx]
        N, log_f, log_bound = ratio(zi)
        be = _backward_errors(log_f, zi, log_c)
        diff = zi[:, None] - z[None, :]
        diff[np.arange(len(idx)), idx] = np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            R = np.sum(1.0 / diff, axis=1)
            w = N / (1.0 - N * R)
        small = (log_f <= log_bound) | (be <= be_tol)
        bad = ~np.isfinite(w)
        w = np.where(small | bad, 0.0, w)
        # a step landing exactly on a pole or a neighbour is nudged
        if np.any(bad & ~small):
            w = np.where(bad & ~small, 1e-8 * (1.0 + np.abs(zi)) * np.exp(1j * (sweep + 1.0)), w)
        z[idx] = zi - w
        tiny = np.abs(w) <= 4.0 * _EPS * np.abs(zi)
        active[idx[small | (tiny & ~bad)]] = False
    idx = np.nonzero(active)[0]
    if len(idx) == 0:
        return z, max_sweeps
    raise RootFailureError(
        f"{len(idx)} of {d} roots unconverged after {max_sweeps} sweeps", unconverged=tuple(int(i) for i in idx)
    )


def _product_logs(zeros: np.ndarray, z: np.ndarray):
    A = z[:, None] - zeros[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sum(np.log(A), axis=1), np.sum(1.0 / A, axis=1), np.sum(1.0 / A**2, axis=1), np.sum(1.0 / np.abs(A), axis=1)


def _fiber_ratio(p: Section, q: Section, lam: complex):
    log_a = complex(p.log_prefactor, p.prefactor_arg)
    log_b = complex(q.log_prefactor, q.prefactor_arg) + np.log(complex(lam))
    n = max(len(p.zeros), len(q.zeros), 1)

    def ratio(z):
        la, sa, _, _ = _product_logs(p.zeros, z)
        lb, sb, _, _ = _product_logs(q.zeros, z)
        la = la + log_a
        lb = lb + log_b
        m = np.maximum(la.real, lb.real)
        pa = np.exp(la - m)
        pb = np.exp(lb - m)
        f = pa - pb
        with np.errstate(divide="ignore", invalid="ignore"):
            N = f / (pa * sa - pb * sb)
            log_f = np.log(np.abs(f)) + m
        log_bound = math.log(10.0 * n * _EPS) + np.log(np.abs(pa) + np.abs(pb)) + m
        return N, log_f, log_bound

    return ratio


def _wronskian_ratio(p: Section, q: Section):
    n = len(p.zeros) + len(q.zeros)

    def ratio(z):
        la, sp, s2p, ap = _product_logs(p.zeros, z)
        lb, sq, s2q, aq = _product_logs(q.zeros, z)
        g = sp - sq
        dg = -s2p + s2q
        with np.errstate(divide="ignore", invalid="ignore"):
            N = g / (g * (sp + sq) + dg)
            base = la.real + lb.real + p.log_prefactor + q.log_prefactor
            log_f = base + np.log(np.abs(g))
            log_bound = base + math.log(10.0 * max(n, 1) * _EPS) + np.log(ap + aq)
        # g has a pole at a multiple zero of p or q; fall back on the correction size there
        log_bound = np.where(np.isfinite(log_bound), log_bound, -np.inf)
        return N, log_f, log_bound

    return ratio


# ---------------------------------------------------------------------------
# Fiber sets


@dataclass(frozen=True, eq=False)
class FiberSet:
    """Roots of p - lambda q (or of the Wronskian), roots at infinity last."""

    lam: object
    roots: np.ndarray
    residuals: np.ndarray
    degree: int
    sweeps: int = 0
    kind: str = "fiber"
    xyz: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_infinite(self) -> int:
        return int(np.sum(np.isinf(self.roots)))

    @property
    def finite_roots(self) -> np.ndarray:
        return self.roots[np.isfinite(self.roots)]

    def sphere_points(self) -> SpherePoints:
        if self.xyz is not None:
            h = self.xyz[:, 2]
            theta = np.mod(np.arctan2(self.xyz[:, 1], self.xyz[:, 0]), 2.0 * math.pi)
            return SpherePoints(h, theta, self.xyz)
        return SpherePoints.from_chart(self.roots)

    def _lam_text(self) -> str:
        if self.lam is None:
            return "wronskian"
        if is_infinite(self.lam):
            return "inf"
        lam = complex(self.lam)
        return f"{lam.real:.17g}{lam.imag:+.17g}j"

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(["lambda", "index", "re", "im", "residual"])
        lam = self._lam_text()
        for i, (r, e) in enumerate(zip(self.roots, self.residuals)):
            re_ = "inf" if np.isinf(r) else f"{r.real:.17g}"
            im_ = "0" if np.isinf(r) else f"{r.imag:.17g}"
            w.writerow([lam, i, re_, im_, f"{e:.17g}"])
        return buf.getvalue()


def _check_degree(k: int):
    if k > MAX_DEGREE:
        raise DomainError(f"degree {k} exceeds the root-finding cap {MAX_DEGREE}")


def _with_infinity(finite: np.ndarray, n_inf: int) -> np.ndarray:
    return np.concatenate([finite.astype(complex), np.full(n_inf, complex(np.inf, 0.0))])


def fiber_roots(pair: SectionPair, lam, max_sweeps: int = MAX_SWEEPS) -> FiberSet:
    """All k roots of p - lam q in the chart; lam may be INFINITY."""
    p, q = pair.p, pair.q
    k = pair.degree
    _check_degree(k)
    if is_infinite(lam) or complex(lam) == 0:
        s = q if is_infinite(lam) else p
        roots = _with_infinity(s.zeros, s.n_infinite)
        return FiberSet(lam, roots, np.zeros(k), k, xyz=s.zero_xyz)
    lam = complex(lam)
    la, pa = _section_coeffs(p)
    lb, pb = _section_coeffs(q)
    lb = lb + math.log(abs(lam))
    pb = pb + np.angle(lam)
    log_c, _, log_scale = _combine_logs(la, pa, lb, pb)
    d = _trim(log_c, log_scale)
    if d < 0:
        raise DomainError(f"p - lambda q vanishes identically for lambda={lam!r}")
    if d == 0:
        return FiberSet(lam, _with_infinity(np.array([], dtype=complex), k), np.zeros(k), k)
    roots, be, sweeps = _solve(_fiber_ratio(p, q, lam), log_c, log_scale, d, max_sweeps)
    return FiberSet(lam, _with_infinity(roots, k - d), np.concatenate([be, np.zeros(k - d)]), k, sweeps)


def _wronskian_coeffs(p: Section, q: Section):
    P, EP = expand_zeros(p.zeros).scaled()
    Q, EQ = expand_zeros(q.zeros).scaled()
    dP = P[1:] * np.arange(1, len(P))
    dQ = Q[1:] * np.arange(1, len(Q))
    # ascending convolution: W = P'Q - PQ'
    t1 = np.convolve(dP, Q) if len(dP) else np.zeros(1)
    t2 = np.convolve(P, dQ) if len(dQ) else np.zeros(1)
    n = max(len(t1), len(t2))
    t1 = np.pad(t1, (0, n - len(t1)))
    t2 = np.pad(t2, (0, n - len(t2)))
    a1 = np.convolve(np.abs(dP), np.abs(Q)) if len(dP) else np.zeros(1)
    a2 = np.convolve(np.abs(P), np.abs(dQ)) if len(dQ) else np.zeros(1)
    scale = np.pad(a1, (0, n - len(a1))) + np.pad(a2, (0, n - len(a2)))
    offset = p.log_prefactor + q.log_prefactor + (EP + EQ) * _LN2
    with np.errstate(divide="ignore"):
        return np.log(np.abs(t1 - t2)) + offset, np.log(scale) + offset


def branch_points(pair: SectionPair, max_sweeps: int = MAX_SWEEPS) -> FiberSet:
    """The 2k - 2 zeros of the Wronskian p'q - pq', with multiplicity."""
    p, q = pair.p, pair.q
    k = pair.degree
    _check_degree(k)
    formal = 2 * k - 2
    if formal == 0:
        return FiberSet(None, np.array([], dtype=complex), np.zeros(0), 0, kind="branch")
    log_c, log_scale = _wronskian_coeffs(p, q)
    d = _trim(log_c, log_scale)
    if d < 0:
        raise DomainError("the Wronskian vanishes identically (p and q are proportional)")
    d = min(d, formal)
    if d == 0:
        return FiberSet(None, _with_infinity(np.array([], dtype=complex), formal), np.zeros(formal), formal, kind="branch")
    roots, be, sweeps = _solve(_wronskian_ratio(p, q), log_c, log_scale, d, max_sweeps)
    return FiberSet(
        None, _with_infinity(roots, formal - d), np.concatenate([be, np.zeros(formal - d)]), formal, sweeps, "branch"
    )


def _certify(be: np.ndarray):
    bad = np.nonzero(~(be <= RESIDUAL_TOL))[0]
    if len(bad):
        raise RootFailureError(
            f"{len(bad)} roots exceed backward error {RESIDUAL_TOL:g} (worst {np.nanmax(be):.3g})",
            unconverged=tuple(int(i) for i in bad),
        )


# ---------------------------------------------------------------------------
# Test functions and statistics


@dataclass(frozen=True)
class TestFunction:
    """A real spherical harmonic with unit L2 norm over the sphere of area 4 pi."""

    l: int
    m: int
    values: Callable[[SpherePoints], np.ndarray] = field(repr=False)
    laplacian_sup: float
    mean: float

    __test__ = False  # not a pytest class

    def __call__(self, points) -> np.ndarray:
        return self.values(_as_points(points))

    def chart_values(self, z) -> np.ndarray:
        return self.values(SpherePoints.from_chart(z))


def _harmonic_norm(l: int, m: int) -> float:
    return math.sqrt((2 * l + 1) / (4.0 * math.pi) * math.exp(math.lgamma(l - m + 1) - math.lgamma(l + m + 1)))


def spherical_harmonic(l: int, m: int = 0) -> TestFunction:
    """Real harmonic Y_l^m; m > 0 uses cos(m theta), m < 0 uses sin(|m| theta).

    l = 0 is the constant function 1 with mean 1.
    """
    if l < 0 or abs(m) > l:
        raise DomainError(f"invalid harmonic indices (l={l}, m={m})")
    if l == 0:
        return TestFunction(0, 0, lambda pts: np.ones(len(pts)), 0.0, 1.0)
    am = abs(m)
    c = _harmonic_norm(l, am) * (1.0 if m == 0 else math.sqrt(2.0))

    if m == 0:
        # Legendre polynomial in h directly: odd l stays exactly odd in h

        def values(pts):
            return c * eval_legendre(l, pts.h)

        sup = c
    else:
        trig = np.cos if m > 0 else np.sin

        def values(pts):
            return c * lpmv(am, l, pts.h) * trig(am * pts.theta)

        hs = np.cos(np.linspace(0.0, math.pi, 200001))
        sup = c * float(np.max(np.abs(lpmv(am, l, hs))))
    return TestFunction(l, m, values, l * (l + 1) * sup, 0.0)


def _as_points(points) -> SpherePoints:
    if isinstance(points, SpherePoints):
        return points
    if isinstance(points, FiberSet):
        return points.sphere_points()
    points = list(points)
    if points and isinstance(points[0], UnitSpherePoint):
        return SpherePoints.from_points(points)
    return SpherePoints.from_chart(np.array([complex(np.inf) if is_infinite(z) else complex(z) for z in points]))


def uniform_stat(points, f: TestFunction) -> float:
    """|mean of f over the points - mean of f over the sphere|; multiplicities count."""
    pts = _as_points(points)
    if len(pts) == 0:
        raise DomainError("uniform_stat needs at least one point")
    vals = f(pts)
    return abs(math.fsum(vals) / len(pts) - f.mean)


@dataclass(frozen=True)
class DecayFit:
    ks: list
    stats: list
    slope: float
    intercept: float
    residual: float
    n_excluded: int = 0

    def predicted(self, k: float) -> float:
        return math.exp(self.intercept) * k**self.slope

    def to_json(self, metadata: dict | None = None) -> str:
        d = {
            "ks": [int(k) for k in self.ks],
            "stats": [float(s) for s in self.stats],
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "n_excluded": self.n_excluded,
        }
        return json.dumps({"metadata": metadata or {}, "fit": d}, indent=2)


def decay_fit(pairs_by_k: Sequence[tuple]) -> DecayFit:
    """Least-squares line through (log k, log stat); several stats per k allowed."""
    rows = [(int(k), float(s)) for k, s in pairs_by_k]
    usable = [(k, s) for k, s in rows if s > 0 and k > 0]
    if len({k for k, _ in usable}) < 3:
        raise DomainError("decay_fit needs at least 3 distinct k with positive stats")
    x = np.log([k for k, _ in usable])
    y = np.log([s for _, s in usable])
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - y) ** 2)))
    return DecayFit(
        [k for k, _ in usable], [s for _, s in usable], float(slope), float(intercept), res, len(rows) - len(usable)
    )


def envelope_constant(pairs_by_k: Sequence[tuple], laplacian_sup: float) -> float:
    """Smallest C with stat <= C * laplacian_sup / k over the given rows."""
    if laplacian_sup <= 0:
        raise DomainError("laplacian_sup must be positive")
    return max(float(s) * int(k) / laplacian_sup for k, s in pairs_by_k)


# ---------------------------------------------------------------------------
# Log integrals


def _singular(values: np.ndarray) -> np.ndarray:
    # log d^2 below this means a node within about 1e-12 of a zero
    return ~np.isfinite(values) | (values < 2.0 * math.log(1e-12))


def abs_log_integral(
    log_norm: Callable[[SpherePoints], np.ndarray], grid: QuadratureGrid, signed: bool = False
) -> float:
    """Quadrature of |log_norm| (or of log_norm itself when ``signed``).

    A node falling on a zero triggers one retry on the grid rotated by
    1e-7 in theta; a second failure raises.
    """
    values = np.asarray(log_norm(grid.points), dtype=float)
    if np.any(_singular(values)):
        grid = grid.jittered(JITTER)
        values = np.asarray(log_norm(grid.points), dtype=float)
        bad = _singular(values)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise EvaluationError(
                f"singular node {i} persists after jitter (h={grid.points.h[i]!r}, theta={grid.points.theta[i]!r})"
            )
    integrand = values if signed else np.abs(values)
    return float(np.sum(grid.weights * integrand))


def section_abs_log_integral(s: Section, grid: QuadratureGrid, signed: bool = False) -> float:
    return abs_log_integral(lambda pts: log_norm_sq_xyz(s, pts.xyz), grid, signed)


def wronskian_abs_log_integral(pair: SectionPair, grid: QuadratureGrid) -> float:
    """Quadrature of |wronskian_log_norm - log k|."""
    k = pair.degree
    return abs_log_integral(lambda pts: wronskian_log_norm_many(pair, pts) - math.log(k), grid)


__all__ = [
    "ExtCoeffs",
    "expand_zeros",
    "FiberSet",
    "fiber_roots",
    "branch_points",
    "TestFunction",
    "spherical_harmonic",
    "uniform_stat",
    "DecayFit",
    "decay_fit",
    "envelope_constant",
    "abs_log_integral",
    "section_abs_log_integral",
    "wronskian_abs_log_integral",
    "INFINITY",
]
