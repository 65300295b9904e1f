import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spiralpencil.distribution import (
    MAX_DEGREE,
    abs_log_integral,
    branch_points,
    decay_fit,
    envelope_constant,
    expand_zeros,
    fiber_roots,
    section_abs_log_integral,
    spherical_harmonic,
    uniform_stat,
    wronskian_abs_log_integral,
)
from spiralpencil.errors import DomainError, EvaluationError, RootFailureError
from spiralpencil.sections import (
    Section,
    SectionPair,
    log_norm_sq_xyz,
    make_section,
    monomial_pair,
    pair_log_density_xyz,
    pullback_log_density_many,
    spiral_pair,
)
from spiralpencil.sphere import INFINITY, SpherePoints, fs_laplacian, integrate, quadrature_grid, random_points
from spiralpencil.spiral import PointConfiguration, SpiralConfig, generate_spiral


def as_multiset(roots):
    return sorted((complex(r) for r in roots), key=lambda z: (round(z.real, 6), round(z.imag, 6)))


def multiset_distance(a, b) -> float:
    """Greedy matching distance in the chordal metric (handles roots at infinity)."""
    pa = SpherePoints.from_chart(np.asarray(a, dtype=complex)).xyz
    pb = SpherePoints.from_chart(np.asarray(b, dtype=complex)).xyz
    used = np.zeros(len(pb), dtype=bool)
    worst = 0.0
    for x in pa:
        d = np.linalg.norm(pb - x, axis=1)
        d[used] = np.inf
        j = int(np.argmin(d))
        used[j] = True
        worst = max(worst, float(d[j]))
    return worst


def mp_fiber_roots(pair, lam):
    mp.mp.dps = 50

    def coeffs(s, c):
        P = [c]
        for z in s.zeros:
            P = [a - mp.mpc(z) * b for a, b in zip(P + [0], [0] + P)]
        return [mp.mpc(0)] * (s.degree - len(s.zeros)) + P

    cp = coeffs(pair.p, mp.exp(pair.p.log_prefactor))
    cq = coeffs(pair.q, mp.exp(pair.q.log_prefactor) * mp.mpc(lam))
    c = [a - b for a, b in zip(cp, cq)]
    return [complex(r) for r in mp.polyroots(c, maxsteps=400, extraprec=300)]


def test_expand_zeros_matches_numpy(rng):
    z = rng.normal(size=12) + 1j * rng.normal(size=12)
    mant, expo = expand_zeros(z).scaled()
    coeffs = mant * 2.0**expo
    # ascending powers
    assert np.allclose(coeffs[::-1], np.poly(z), rtol=1e-12, atol=1e-12)


def test_expand_zeros_survives_large_degree():
    s = spiral_pair(400).p
    c = expand_zeros(s.zeros)
    assert np.all(np.isfinite(c.log_abs))


def test_square_fibers():
    pair = monomial_pair(2)
    assert multiset_distance(fiber_roots(pair, 1.0).roots, [1, -1]) <= 1e-14
    assert multiset_distance(fiber_roots(pair, -1.0).roots, [1j, -1j]) <= 1e-14


def test_fiber_at_zero_and_infinity():
    pair = spiral_pair(7)
    f0 = fiber_roots(pair, 0.0)
    finf = fiber_roots(pair, INFINITY)
    assert np.array_equal(f0.roots, pair.p.zeros)
    assert np.array_equal(finf.roots, pair.q.zeros)
    sq = monomial_pair(3)
    assert fiber_roots(sq, INFINITY).n_infinite == 3


@pytest.mark.parametrize("lam", [1.0, 1j, 2.5 - 0.5j])
def test_spiral_fiber_k50(lam):
    pair = spiral_pair(50)
    fs = fiber_roots(pair, lam)
    assert len(fs.roots) == 50
    assert np.max(fs.residuals) <= 1e-8
    finite = fs.finite_roots
    pts = SpherePoints.from_chart(finite)
    rho = pair_log_density_xyz(pair, pts.xyz)
    lq = log_norm_sq_xyz(pair.q, pts.xyz)
    # at a root p = lam q, so rho = (1 + |lam|^2) ||q||^2
    assert np.max(np.abs(rho - (math.log1p(abs(lam) ** 2) + lq))) <= 1e-8


def test_even_degree_root_at_infinity_is_counted():
    # for even k the leading coefficients of p and q agree, so p - q drops degree
    fs = fiber_roots(spiral_pair(50), 1.0)
    assert fs.n_infinite == 1
    assert np.all(np.isinf(fs.roots[-1:]))


def test_fiber_matches_high_precision_roots(rng):
    pair = spiral_pair(25)
    fs = fiber_roots(pair, 0.7 + 0.2j)
    assert multiset_distance(fs.roots, mp_fiber_roots(pair, 0.7 + 0.2j)) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(
    st.integers(2, 3),
    st.lists(st.floats(-3, 3), min_size=12, max_size=12),
    st.floats(-1, 1),
    st.floats(-1, 1),
)
def test_low_degree_against_closed_form(d, vals, lp, lq):
    z = [complex(vals[2 * i], vals[2 * i + 1]) for i in range(6)]
    pair = SectionPair(Section(d, np.array(z[:d]), lp), Section(d, np.array(z[3 : 3 + d]), lq))
    lam = complex(vals[10], vals[11])
    if lam == 0 or np.allclose(pair.p.zeros, pair.q.zeros):
        return
    try:
        fs = fiber_roots(pair, lam)
    except DomainError:
        return  # p - lam q identically zero
    oracle = mp_fiber_roots(pair, lam)
    if len(oracle) < d:
        oracle = oracle + [complex(np.inf)] * (d - len(oracle))
    assert np.max(fs.residuals) <= 1e-8
    assert multiset_distance(fs.roots, oracle) <= 1e-9


def test_swap_invariance(rng):
    pair = spiral_pair(40)
    for lam in (0.5 + 0.5j, 3.0, -1j):
        a = fiber_roots(pair, lam).roots
        b = fiber_roots(pair.swapped(), 1.0 / lam).roots
        assert multiset_distance(a, b) <= 1e-8


def test_degenerate_lambda():
    s = spiral_pair(5).p
    with pytest.raises(DomainError):
        fiber_roots(SectionPair(s, s), 1.0)


def test_degree_cap():
    k = MAX_DEGREE + 1
    big = SectionPair(Section(k, np.zeros(k, dtype=complex), 0.0), Section(k, np.array([], dtype=complex), 0.0))
    with pytest.raises(DomainError):
        fiber_roots(big, 1.0)


def test_root_failure_lists_indices():
    with pytest.raises(RootFailureError) as err:
        fiber_roots(spiral_pair(60), 1j, max_sweeps=1)
    assert len(err.value.unconverged) > 0


def test_branch_examples():
    bp = branch_points(monomial_pair(2))
    assert bp.degree == 2 and bp.n_infinite == 1
    assert abs(bp.finite_roots[0]) <= 1e-14
    pair = SectionPair(Section(2, np.array([1j, -1j]), 0.0), Section(2, np.array([0j]), 0.0))
    assert multiset_distance(branch_points(pair).roots, [1, -1]) <= 1e-13


@pytest.mark.parametrize("k", [5, 20, 50])
def test_spiral_branch_points(k):
    pair = spiral_pair(k)
    bp = branch_points(pair)
    assert len(bp.roots) == 2 * k - 2
    assert np.max(bp.residuals) <= 1e-8
    pb = pullback_log_density_many(pair, bp.sphere_points())
    assert np.all(pb < -30)


def test_branch_points_proportional_pair():
    s = spiral_pair(4).p
    with pytest.raises(DomainError):
        branch_points(SectionPair(s, s))


def test_fiber_csv():
    fs = fiber_roots(monomial_pair(2), 1.0)
    lines = fs.to_csv().splitlines()
    assert lines[0] == "lambda,index,re,im,residual"
    assert len(lines) == 3 and lines[1].startswith("1+0j,0,")


@pytest.mark.parametrize("l,m", [(1, 0), (2, 0), (2, 1), (3, -2), (4, 3)])
def test_harmonic_is_laplace_eigenfunction(l, m, rng):
    f = spherical_harmonic(l, m)
    pts = random_points(100, rng)
    z = pts.chart[pts.h > -0.5]
    lap = fs_laplacian(f.chart_values, z, 1e-4)
    assert np.max(np.abs(lap + l * (l + 1) * f.chart_values(z))) <= 1e-5


@pytest.mark.parametrize("l,m", [(1, 0), (2, 0), (2, 2), (3, -1)])
def test_harmonic_normalization(l, m):
    f = spherical_harmonic(l, m)
    g = quadrature_grid(32, 32)
    assert integrate(lambda p: f(p) ** 2, g) == pytest.approx(1.0, abs=1e-12)
    assert abs(integrate(f, g)) <= 1e-12
    assert f.mean == 0.0
    dense = f(random_points(20000, np.random.default_rng(0)))
    assert np.max(np.abs(dense)) * l * (l + 1) <= f.laplacian_sup * (1 + 1e-9)


def test_harmonic_rejects_bad_indices():
    with pytest.raises(DomainError):
        spherical_harmonic(2, 3)


def test_uniform_stat_examples():
    c = generate_spiral(SpiralConfig(33))
    assert uniform_stat(c.sphere_points, spherical_harmonic(0, 0)) == 0.0
    assert uniform_stat(c.sphere_points, spherical_harmonic(1, 0)) == 0.0
    assert uniform_stat(fiber_roots(spiral_pair(33), 0.0), spherical_harmonic(1, 0)) == 0.0
    with pytest.raises(DomainError):
        uniform_stat(SpherePoints.from_chart(np.array([], dtype=complex)), spherical_harmonic(1, 0))


def test_uniform_stat_accepts_point_lists():
    pts = [0.0, INFINITY]
    assert uniform_stat(pts, spherical_harmonic(1, 0)) == pytest.approx(0.0, abs=1e-15)


def test_spiral_zeros_equidistribute():
    f = spherical_harmonic(2, 0)
    ks = [25, 50, 100, 200, 400]
    rows = [(k, uniform_stat(generate_spiral(SpiralConfig(k)).sphere_points, f)) for k in ks]
    assert decay_fit(rows).slope <= -0.9


def test_decay_fit_synthetic():
    ks = [10, 20, 40, 80, 160]
    assert decay_fit([(k, 1.0 / k) for k in ks]).slope == pytest.approx(-1.0, abs=1e-12)
    assert decay_fit([(k, 1.0 / math.sqrt(k)) for k in ks]).slope == pytest.approx(-0.5, abs=1e-12)
    fit = decay_fit([(k, 3.0 / k) for k in ks] + [(5, 0.0)])
    assert fit.n_excluded == 1 and fit.predicted(10) == pytest.approx(0.3, rel=1e-12)
    assert json.loads(fit.to_json())["fit"]["slope"] == pytest.approx(-1.0)
    with pytest.raises(DomainError):
        decay_fit([(10, 0.1), (20, 0.05), (40, 0.0)])


def test_envelope_constant():
    rows = [(10, 0.2), (20, 0.05)]
    assert envelope_constant(rows, 2.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        envelope_constant(rows, 0.0)


def test_fiber_stats_decay():
    # a single fiber is noisy at these degrees, so both fibers are pooled
    f = spherical_harmonic(2, 0)
    rows = [(k, uniform_stat(fiber_roots(spiral_pair(k), lam), f)) for lam in (1.0, 1j) for k in (25, 50, 100, 200)]
    C = envelope_constant([r for r in rows if r[0] <= 50], f.laplacian_sup)
    assert all(s <= C * f.laplacian_sup / k for k, s in rows)
    assert decay_fit(rows).slope <= -0.9


def test_abs_log_integral_radial_oracle():
    s = make_section(PointConfiguration.from_cylindrical([1.0], [0.0]))
    mp.mp.dps = 30
    h0 = 1 - 2 / mp.e  # where (e/4)(2 - 2h) = 1

    def integrand(h):
        return abs(1 - mp.log(4) + mp.log(2 - 2 * h))

    oracle = 2 * mp.pi * mp.quad(integrand, [-1, h0, 1])
    assert float(oracle) == pytest.approx(8 * math.pi / math.e, rel=1e-15)
    value = section_abs_log_integral(s, quadrature_grid(512, 512))
    assert abs(value - float(oracle)) <= 1e-4


def test_abs_log_integral_jitter_and_failure():
    g = quadrature_grid(8, 8)
    node = g.points[0]
    s = make_section(PointConfiguration.from_cylindrical([node.h], [node.theta]))
    # the grid hits the zero exactly; the one-shot jitter moves off it
    assert math.isfinite(section_abs_log_integral(s, g))
    with pytest.raises(EvaluationError):
        abs_log_integral(lambda pts: np.full(len(pts), -np.inf), g)


def test_log_integrals_stay_bounded():
    g = quadrature_grid(256, 256)
    sec = [section_abs_log_integral(spiral_pair(k).p, g) for k in (10, 20, 40, 80)]
    wr = [wronskian_abs_log_integral(spiral_pair(k), g) for k in (10, 20, 40, 80)]
    assert max(sec) / min(sec) <= 2.0 and max(wr) / min(wr) <= 2.0
