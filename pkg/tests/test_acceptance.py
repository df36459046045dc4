"""Acceptance criteria 1-10, one test each, with a PASS/FAIL summary line."""

import math
import time

import numpy as np
import pytest

from optspline.constants import c_p_plus, cp_closed, optimize_shape
from optspline.experiments import DEFAULT_NS, appendix_check, convergence_study
from optspline.fields import paraboloid, quadratic
from optspline.geometry import signed_areas
from optspline.norms import QuadratureSpec, affine_transport_check, cell_error, pth_powers
from optspline.quadform import AffineMap, QuadraticForm, optimal_triangle

QBAR = QuadraticForm(1, 1, 0)


def random_spd(rng):
    A, B = rng.uniform(0.2, 5, 2)
    C = rng.uniform(-0.9, 0.9) * math.sqrt(A * B)
    return QuadraticForm(A, B, C)


def random_triangles(rng, n, min_area=1e-3, unit=False):
    out = []
    while len(out) < n:
        V = rng.uniform(-1, 1, (3, 2))
        a = abs(signed_areas(V[None])[0])
        if a < min_area:
            continue
        if unit:
            V = V.mean(axis=0) + (V - V.mean(axis=0)) / math.sqrt(a)
        out.append(V)
    return np.array(out)


@pytest.fixture(scope="module")
def study8():
    t0 = time.perf_counter()
    rep = convergence_study(paraboloid(), None, 2.0, DEFAULT_NS, 0.2, baseline=False)
    return rep, time.perf_counter() - t0


@pytest.fixture(scope="module")
def study9():
    return convergence_study(quadratic(9, 1, 0), None, 1.0, DEFAULT_NS, 0.2)


def test_criterion_01_constant_consistency(criterion):
    t0 = time.perf_counter()
    c_p_plus.cache_clear()
    cp_closed.cache_clear()
    worst_closed = worst_quad = 0.0
    for p in (0.25, 0.5, 1, 2, 3, 5):
        c = c_p_plus(p)
        worst_closed = max(worst_closed, abs(c.value_arccos_form - c.value_beta_form) / c.value)
        worst_quad = max(worst_quad, abs(c.value_quadrature - c.value_beta_form) / c.value)
    dt = time.perf_counter() - t0
    ok = worst_closed <= 1e-8 and worst_quad <= 1e-6 and dt < 10
    criterion(1, ok, f"closed forms {worst_closed:.1e}, quadrature {worst_quad:.1e}, {dt:.1f}s")
    assert ok


def test_criterion_02_equilateral_optimal(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst_dist, worst_margin = 0.0, math.inf
    rtol = QuadratureSpec().rtol
    for p in (0.5, 1, 2, 3):
        r = optimize_shape(p)
        worst_dist = max(worst_dist, abs(r.A - math.pi / 3), abs(r.B - math.pi / 3))
        P = random_triangles(rng, 50, min_area=0.02, unit=True)
        d = pth_powers(QBAR, P, p)[0] ** (1 / p)
        C = cp_closed(p)
        worst_margin = min(worst_margin, float(((d - C) / C).min()))
    dt = time.perf_counter() - t0
    # d carries a relative error of about rtol / p, largest at p = 0.5
    ok = worst_dist <= 2e-3 and worst_margin > 10 * rtol / 0.5 and dt < 120
    criterion(2, ok, f"argmin off by {worst_dist:.1e} rad, min relative margin "
                     f"{worst_margin:.1e}, {dt:.1f}s")
    assert ok


def test_criterion_03_exact_cell_value(criterion):
    v = cell_error(QBAR, [(0, 0), (1, 0), (0, 1)], 1).value
    ok = abs(v - 1 / 6) <= 1e-9
    criterion(3, ok, f"|d - 1/6| = {abs(v - 1 / 6):.1e}")
    assert ok


def test_criterion_04_optimal_value_and_bound(criterion):
    rng = np.random.default_rng(4)
    worst_eq, worst_low = 0.0, math.inf
    for p in (1, 2):
        C = cp_closed(p)
        for _ in range(10):
            Q = random_spd(rng)
            target = C * math.sqrt(Q.det)
            T = optimal_triangle(Q, 1.0, rng.uniform(0, 2 * math.pi))
            worst_eq = max(worst_eq, abs(cell_error(Q, T.vertices, p).value - target) / target)
            P = random_triangles(rng, 500, min_area=1e-3, unit=True)
            d = pth_powers(Q, P, p)[0] ** (1 / p)
            worst_low = min(worst_low, float((d / target).min()))
    ok = worst_eq <= 1e-4 and worst_low >= 1 - 1e-6
    criterion(4, ok, f"optimal triangle rel. error {worst_eq:.1e}, min ratio to bound "
                     f"{worst_low:.6f}")
    assert ok


def test_criterion_05_shape_lower_bound(criterion):
    rng = np.random.default_rng(5)
    P = random_triangles(rng, 1000)
    a = np.abs(signed_areas(P))
    e = np.linalg.norm(P - np.roll(P, -1, axis=1), axis=2)
    diam = e.max(axis=1)
    h = 2 * a / diam
    violations = 0
    for p in (0.5, 1, 2):
        # a loose tolerance is enough for an inequality with this much slack
        v, _ = pth_powers(QBAR, P, p, spec=QuadratureSpec(rtol=1e-7))
        bound = diam ** p * a ** (p + 1) / (2 ** (5 * p + 1) * h ** p)
        violations += int(np.sum(v < bound))
    ok = violations == 0
    criterion(5, ok, f"{violations} violations over 3000 checks")
    assert ok


def test_criterion_06_affine_transport(criterion):
    rng = np.random.default_rng(6)
    worst = 0.0
    for k in range(100):
        Q = random_spd(rng)
        T = random_triangles(rng, 1, min_area=0.05)[0]
        M = rng.normal(size=(2, 2))
        while abs(np.linalg.det(M)) < 0.1:
            M = rng.normal(size=(2, 2))
        F = AffineMap(M, rng.normal(size=2))
        p = (1.0, 1.5, 2.0)[k % 3]
        lhs, rhs = affine_transport_check(Q, T, F, p)
        worst = max(worst, abs(lhs - rhs) / rhs)
    ok = worst <= 1e-7
    criterion(6, ok, f"max relative difference {worst:.1e}")
    assert ok


def test_criterion_07_appendix(criterion):
    bad = []
    for p in np.round(np.arange(1, 10) / 10, 1):
        r = appendix_check(float(p))
        for key in ("prop1_ok", "prop2_ok", "L_nonincreasing", "S_tilde_nonincreasing",
                    "S_argmin_near_pi_3"):
            if not r[key]:
                bad.append(f"p={p}:{key}")
    ok = not bad
    criterion(7, ok, "sign scans and profiles hold" if ok else ", ".join(bad))
    assert ok


def test_criterion_08_paraboloid_trend(criterion, study8):
    rep, dt = study8
    ratios = rep.column("ratio")
    failed = [r.failure for r in rep.rows if r.failure]
    monotone = all(b <= a for a, b in zip(ratios, ratios[1:])) if not failed else False
    final_ok = not failed and ratios[-1] <= 1.2
    ok = monotone and final_ok and dt < 300
    shown = ", ".join(f"{r:.4f}" for r in ratios if r is not None)
    criterion(8, ok, f"ratios [{shown}], monotone={monotone}, final<=1.2={final_ok}, {dt:.0f}s")
    assert ok


def test_criterion_09_adaptive_beats_uniform(criterion, study9):
    pairs = [(r.N_times_error, r.uniform_N_times_error) for r in study9.rows]
    ok = all(a is not None and b is not None and a < b for a, b in pairs)
    shown = ", ".join(f"{a:.4f}<{b:.4f}" for a, b in pairs if a is not None and b is not None)
    criterion(9, ok, shown)
    assert ok


def test_criterion_10_meshes_valid(criterion, study8, study9):
    rows = study8[0].rows + study9.rows
    flags = [r.valid_mesh for r in rows]
    ok = all(flags) and len(flags) == 2 * len(DEFAULT_NS)
    criterion(10, ok, f"{sum(bool(f) for f in flags)}/{len(flags)} meshes conforming")
    assert ok
