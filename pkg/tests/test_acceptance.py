"""The thirteen acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line that is printed in the terminal summary
(see conftest.py).  Run directly with ``python tests/test_acceptance.py``.
"""

import itertools
import math
import sys
import time

import mpmath as mp
import numpy as np
import pytest

from conftest import record_acceptance
from spiralpencil.distribution import (
    branch_points,
    decay_fit,
    envelope_constant,
    fiber_roots,
    spherical_harmonic,
    uniform_stat,
)
from spiralpencil.plambda import LambdaSequence, periodicity_residual, shift_residual
from spiralpencil.sections import (
    Section,
    SectionPair,
    density_identity_residuals,
    log_norm_sq,
    monomial_pair,
    norm_at_origin_closed_form,
    spiral_pair,
)
from spiralpencil.sphere import NORTH_POLE, SpherePoints, integrate, quadrature_grid, random_points
from spiralpencil.spiral import (
    PointConfiguration,
    SpiralConfig,
    generate_spiral,
    local_optimize_energy,
    log_energy,
    scaled_chord_product_log,
)
from spiralpencil.transversality import (
    CALIBRATED_NORMALIZATION,
    CALIBRATED_SCALE,
    calibrate_min_grad,
    delta_lambda_bound,
    explicit_eta_log_bound,
    find_extrema,
    min_grad_normalized,
    rsz_constants,
    rsz_energy_upper,
    rsz_eta_upper,
)

TABLE_KS = [50, 100, 150, 170, 180, 190, 200]
TABLE_MAX = dict(zip(TABLE_KS, [4.7828, 4.8272, 4.8368, 4.8432, 4.8373, 4.8364, 4.8460]))
TABLE_MIN = dict(zip(TABLE_KS, [0.7194, 0.7093, 0.7085, 0.7085, 0.7125, 0.7089, 0.7085]))
GRAD_KS = [100, 200, 500, 700, 900, 1000]
TABLE_GRAD = dict(zip(GRAD_KS, [1.6963, 1.6998, 1.7020, 1.7024, 1.7026, 1.7027]))


@pytest.fixture(scope="module")
def table_extrema():
    t0 = time.perf_counter()
    reports = {k: find_extrema(spiral_pair(k)) for k in TABLE_KS}
    return reports, time.perf_counter() - t0


def _worst(pairs):
    return max(pairs, key=lambda kv: kv[1])


def test_c01_table_max(table_extrema):
    reports, elapsed = table_extrema
    errs = [(k, abs(reports[k].max_rho - TABLE_MAX[k])) for k in TABLE_KS]
    k, worst = _worst(errs)
    ok = worst <= 0.02 and elapsed <= 600.0
    record_acceptance(1, "table max rho", ok, f"worst |err|={worst:.4f} at k={k}, runtime {elapsed:.1f}s")
    assert ok


def test_c02_table_min(table_extrema):
    reports, _ = table_extrema
    errs = [(k, abs(reports[k].min_rho - TABLE_MIN[k])) for k in TABLE_KS]
    k, worst = _worst(errs)
    ok = worst <= 0.02
    record_acceptance(2, "table min rho", ok, f"worst |err|={worst:.4f} at k={k}")
    assert ok


def test_c03_table_min_grad():
    name, scale, _ = calibrate_min_grad()
    frozen = name == CALIBRATED_NORMALIZATION and math.isclose(scale, CALIBRATED_SCALE, rel_tol=1e-12)
    values = {k: min_grad_normalized(spiral_pair(k).p) for k in GRAD_KS}
    errs = [(k, abs(values[k] - TABLE_GRAD[k])) for k in GRAD_KS[1:]]
    k, worst = _worst(errs)
    ok = frozen and abs(values[100] - TABLE_GRAD[100]) < 1e-9 and worst <= 0.01
    row = ", ".join(f"{k}:{values[k]:.4f}" for k in GRAD_KS)
    record_acceptance(3, "table min grad", ok, f"worst |err|={worst:.4f} at k={k} ({row})")
    assert ok


def test_c04_eta(table_extrema):
    reports, _ = table_extrema
    eta = reports[200].eta
    ok = 0.14 <= eta <= 0.16
    record_acceptance(4, "eta estimate k=200", ok, f"eta={eta:.4f}")
    assert ok


def test_c05_annulus():
    errs = []
    for k in (3, 10, 20):
        r = find_extrema(monomial_pair(k))
        errs.append((k, abs(r.min_rho / 2.0 ** (1 - k) - 1.0)))
    k, worst = _worst(errs)
    ok = worst <= 1e-12
    record_acceptance(5, "annulus inner radius", ok, f"worst rel err={worst:.2e} at k={k}")
    assert ok


def test_c06_origin_closed_form():
    worst = 0.0
    for k in range(1, 1001):
        s = spiral_pair(k).p
        worst = max(worst, abs(norm_at_origin_closed_form(k) - log_norm_sq(s, NORTH_POLE)))
    limit_err = abs(norm_at_origin_closed_form(1000) - math.log(math.sqrt(2.0)))
    ok = worst <= 1e-9 and limit_err <= 1e-3
    record_acceptance(6, "origin closed form", ok, f"max |closed-direct|={worst:.2e}, |v(1000)-log sqrt2|={limit_err:.2e}")
    assert ok


def test_c07_mean_log_identity():
    grid = quadrature_grid(512, 512)
    value = integrate(lambda pts: 0.5 * np.log(2.0 - 2.0 * pts.h), grid) / (4.0 * math.pi)
    exact = float(0.5 * mp.log(4 / mp.e))
    err = abs(value - exact)
    ok = err <= 1e-6
    record_acceptance(7, "mean log distance 512x512", ok, f"|err|={err:.3e}")
    assert ok


def test_c08_density_identity():
    rng = np.random.default_rng(8)
    worst = []
    for k in (20, 50):
        pts = random_points(200, rng)
        _, _, res = density_identity_residuals(spiral_pair(k), pts)
        worst.append((k, float(np.max(res))))
    k, w = _worst(worst)
    ok = w <= 1e-2
    record_acceptance(8, "density identity", ok, f"max rel residual={w:.2e} at k={k}")
    assert ok


DIST_KS = [25, 50, 100, 200]
DIST_LAMBDAS = [1.0, 1j]


@pytest.fixture(scope="module")
def fibers():
    return {(k, lam): fiber_roots(spiral_pair(k), lam) for k in DIST_KS for lam in DIST_LAMBDAS}


def test_c09_uniform_distribution(fibers):
    f = spherical_harmonic(2, 0)
    rows = [(k, uniform_stat(fibers[k, lam], f)) for lam in DIST_LAMBDAS for k in DIST_KS]
    fit = decay_fit(rows)
    # envelope constant fitted on the smaller degrees, then checked on all
    C = envelope_constant([r for r in rows if r[0] <= 50], f.laplacian_sup)
    held = all(s <= C * f.laplacian_sup / k for k, s in rows)
    ok = -1.3 <= fit.slope <= -0.7 and held
    record_acceptance(9, "uniform distribution rate", ok, f"slope={fit.slope:.3f}, C={C:.4f}, envelope holds={held}")
    assert ok


def _match_error(a, b) -> float:
    a = [complex(x) for x in a]
    b = [complex(x) for x in b]
    return min(max(abs(x - y) / max(1.0, abs(y)) for x, y in zip(a, perm)) for perm in itertools.permutations(b))


def _oracle_roots(pair: SectionPair, lam: complex):
    mp.mp.dps = 50
    cp = mp.exp(pair.p.log_prefactor) * mp.mpc(1)
    cq = mp.exp(pair.q.log_prefactor) * mp.mpc(lam)
    P = [cp]
    for z in pair.p.zeros:
        P = [a - mp.mpc(z) * b for a, b in zip(P + [0], [0] + P)]
    Q = [cq]
    for z in pair.q.zeros:
        Q = [a - mp.mpc(z) * b for a, b in zip(Q + [0], [0] + Q)]
    c = [a - b for a, b in zip(P, Q)]  # descending powers
    if len(c) == 3:
        a, b, cc = c
        disc = mp.sqrt(b * b - 4 * a * cc)
        return [(-b + disc) / (2 * a), (-b - disc) / (2 * a)]
    return mp.polyroots(c, maxsteps=200, extraprec=200)


def test_c10_root_certification(fibers):
    worst_be = 0.0
    full = True
    for fs in fibers.values():
        full &= len(fs.roots) == fs.degree
        worst_be = max(worst_be, float(np.max(fs.residuals)))
    for k in DIST_KS:
        bp = branch_points(spiral_pair(k))
        full &= len(bp.roots) == 2 * k - 2
        worst_be = max(worst_be, float(np.max(bp.residuals)))
    rng = np.random.default_rng(10)
    worst_match = 0.0
    for trial in range(200):
        d = 2 + trial % 2
        zp = rng.normal(size=d) + 1j * rng.normal(size=d)
        zq = rng.normal(size=d) + 1j * rng.normal(size=d)
        pair = SectionPair(Section(d, zp, float(rng.normal())), Section(d, zq, float(rng.normal())))
        lam = complex(rng.normal(), rng.normal())
        fs = fiber_roots(pair, lam)
        worst_match = max(worst_match, _match_error(fs.roots, _oracle_roots(pair, lam)))
    ok = full and worst_be <= 1e-8 and worst_match <= 1e-10
    record_acceptance(
        10, "root certification", ok, f"full counts={full}, max backward err={worst_be:.2e}, closed-form mismatch={worst_match:.2e}"
    )
    assert ok


def test_c11_plambda_relations():
    rng = np.random.default_rng(11)
    seqs = {"zero": LambdaSequence.constant(0.0), "random": LambdaSequence.random(rng)}
    # the relation needs lambda_0 = 0, so the shifted input is renormalized
    seqs["shifted"] = seqs["random"].renormalized_shift()
    z = rng.uniform(-3.0, 3.0, 100) + 1j * rng.uniform(-2.0, 2.0, 100)
    per = max(periodicity_residual(s, zz) for s in seqs.values() for zz in z)
    shf = max(shift_residual(s, zz) for s in seqs.values() for zz in z)
    ok = per <= 1e-10 and shf <= 1e-8
    record_acceptance(11, "P_lambda relations", ok, f"periodicity={per:.2e}, shift={shf:.2e}")
    assert ok


def test_c12_bound_calculators():
    mp.mp.dps = 60
    s, t = mp.sqrt(2 * mp.pi), mp.sqrt(2 * mp.pi + mp.sqrt(27))
    a_o = 2 * s / mp.sqrt(27) * (s + t)
    b_o = (t - s) / (t + s)
    eta_o = mp.sqrt(mp.pi / mp.e) * (1 - mp.exp(-a_o)) ** (b_o / 2)
    log10_o = -(9 * mp.log(74708) + mp.mpf(28) + mp.mpf(15) / 16) / mp.log(10)
    c = rsz_constants()
    e = explicit_eta_log_bound()
    errs = {
        "a": abs(c.a - float(a_o)),
        "b": abs(c.b - float(b_o)),
        "eta": abs(rsz_eta_upper(1.0) - float(eta_o)),
        "log10": abs(e.log10_L - float(log10_o)),
    }
    rng = np.random.default_rng(12)
    exact = True
    for _ in range(1000):
        d, M, cc = rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0.01, 10)
        expected = max(7.0 * M ** (2.0 / 3.0) * d ** (1.0 / 3.0), 1025.0 * d / (cc * cc))
        exact &= delta_lambda_bound(d, M, cc) == expected
    ok = (
        errs["a"] <= 1e-12
        and errs["b"] <= 1e-12
        and errs["eta"] <= 1e-6
        and rsz_eta_upper(1.0) > 1.0
        and errs["log10"] <= 1e-6
        and e.claimed_log10_order == -36.0
        and exact
    )
    detail = ", ".join(f"{k} err={v:.1e}" for k, v in errs.items())
    record_acceptance(
        12, "bound calculators", ok, f"{detail}, eta_upper(1)={rsz_eta_upper(1.0):.7f}>1, log10 L={e.log10_L:.4f}, delta exact={exact}"
    )
    assert ok


def test_c13_energy_dominance():
    dom = {k: rsz_energy_upper(k) - scaled_chord_product_log(generate_spiral(SpiralConfig(k))) for k in (50, 100, 200)}
    rng = np.random.default_rng(13)
    start = PointConfiguration.from_xyz(rng.normal(size=(4, 3)))
    energy = log_energy(local_optimize_energy(start, max_steps=5000))
    tetra = float(-6 * mp.log(mp.sqrt(mp.mpf(8) / 3)))
    err = abs(energy - tetra)
    ok = all(v >= 0 for v in dom.values()) and err <= 1e-6
    margins = ", ".join(f"{k}:{v:.1f}" for k, v in dom.items())
    record_acceptance(13, "energy dominance", ok, f"bound margins {margins}; tetrahedron |err|={err:.1e} (E={energy:.9f})")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
