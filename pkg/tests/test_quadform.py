import math

import numpy as np
import pytest

from optspline.constants import cp_closed
from optspline.errors import InvalidArgument, NotPositiveDefinite
from optspline.geometry import triangle_metrics
from optspline.norms import cell_error
from optspline.quadform import (
    PARABOLOID, AffineMap, QuadraticForm, aspect_ratio_bound_check, canonical_map,
    eigen_decompose, lambda_min_floor, lower_bound, optimal_triangle,
)

EQ_DIAM = 2 / 3 ** 0.25


def random_spd(rng):
    A, B = rng.uniform(0.2, 5, 2)
    C = rng.uniform(-0.95, 0.95) * math.sqrt(A * B)
    return QuadraticForm(A, B, C)


def is_equilateral(V, tol=1e-10):
    V = np.asarray(V)
    s = [np.linalg.norm(V[i] - V[(i + 1) % 3]) for i in range(3)]
    return max(s) - min(s) <= tol * max(s)


def test_eigen_repeated():
    e = eigen_decompose(PARABOLOID)
    assert (e.lam_min, e.lam_max, e.xi) == (1.0, 1.0, (1.0, 0.0))


def test_eigen_diagonal():
    e = eigen_decompose(QuadraticForm(4, 1, 0))
    assert (e.lam_max, e.lam_min) == pytest.approx((4, 1))
    assert e.xi == pytest.approx((1, 0))


def test_eigen_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        Q = random_spd(rng)
        e = eigen_decompose(Q)
        assert 0 < e.lam_min <= e.lam_max
        assert e.lam_min * e.lam_max == pytest.approx(Q.det, rel=1e-12)
        assert math.hypot(*e.xi) == pytest.approx(1, abs=1e-14)
        assert Q(*e.xi) == pytest.approx(e.lam_max, rel=1e-12)
        assert Q(*e.xi_min) == pytest.approx(e.lam_min, rel=1e-10)


@pytest.mark.parametrize("abc", [(1, 1, 1), (-1, 1, 0), (1, 1, 2), (0, 0, 0), (math.nan, 1, 0)])
def test_eigen_rejects_non_pd(abc):
    with pytest.raises(NotPositiveDefinite):
        eigen_decompose(QuadraticForm(*abc))


def test_canonical_map_examples():
    F = canonical_map(PARABOLOID)
    assert np.allclose(F.matrix, np.eye(2)) and np.allclose(F.shift, 0)
    F = canonical_map(QuadraticForm(4, 1, 0))
    assert np.allclose(F.matrix, np.diag([0.5, 1.0]))


def test_canonical_map_round_trip():
    rng = np.random.default_rng(1)
    g = np.linspace(-2, 2, 10)
    U, V = [a.ravel() for a in np.meshgrid(g, g)]
    for _ in range(50):
        Q = random_spd(rng)
        F = canonical_map(Q)
        X = F(np.column_stack([U, V]))
        assert np.max(np.abs(Q(X[:, 0], X[:, 1]) - (U * U + V * V))) <= 1e-10
        e = eigen_decompose(Q)
        assert F.det == pytest.approx(1 / math.sqrt(e.lam_min * e.lam_max), rel=1e-12)


def test_affine_map_algebra():
    rng = np.random.default_rng(2)
    maps = [AffineMap(rng.normal(size=(2, 2)) + 2 * np.eye(2), rng.normal(size=2)) for _ in range(3)]
    a, b, c = maps
    pts = rng.normal(size=(5, 2))
    assert np.allclose(a.compose(b).compose(c)(pts), a.compose(b.compose(c))(pts))
    assert np.allclose(a.inverse()(a(pts)), pts)
    with pytest.raises(InvalidArgument):
        AffineMap(np.zeros((2, 2)), np.zeros(2))


def test_optimal_triangle_paraboloid():
    T = optimal_triangle(PARABOLOID, 1.0)
    assert T.area == pytest.approx(1.0, rel=1e-12)
    assert is_equilateral(T.vertices)


def test_optimal_triangle_stretched():
    Q = QuadraticForm(4, 1, 0)
    T = optimal_triangle(Q, 1.0)
    # undoing the x scaling by 1/2 gives back an equilateral triangle
    assert is_equilateral(T.vertices * [2.0, 1.0])
    assert T.area == pytest.approx(1.0, rel=1e-12)


def test_optimal_triangle_area_and_errors():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.uniform(0.01, 10)
        assert optimal_triangle(random_spd(rng), a, rng.uniform(0, 6)).area == pytest.approx(a, rel=1e-12)
    with pytest.raises(InvalidArgument):
        optimal_triangle(PARABOLOID, -1.0)
    with pytest.raises(NotPositiveDefinite):
        optimal_triangle(QuadraticForm(1, -1, 0))


@pytest.mark.parametrize("p", [1, 2])
def test_optimal_triangle_attains_constant(p):
    rng = np.random.default_rng(4)
    for _ in range(10):
        Q = random_spd(rng)
        a = rng.uniform(0.1, 2)
        T = optimal_triangle(Q, a, rng.uniform(0, 2 * math.pi))
        val = cell_error(Q, T.vertices, p).value / a ** (1 + 1 / p)
        assert val == pytest.approx(cp_closed(p) * math.sqrt(Q.det), rel=1e-5)


def test_optimal_triangle_orientation_scan():
    Q, p = QuadraticForm(2, 1, 0.5), 1
    vals = [cell_error(Q, optimal_triangle(Q, 1, th).vertices, p).value
            for th in np.linspace(0, 2 * math.pi / 3, 7)]
    assert min(vals) == pytest.approx(cp_closed(p) * math.sqrt(Q.det), rel=1e-5)


def test_lower_bound_equality_and_random():
    Q = QuadraticForm(3, 1, -0.4)
    b, act = lower_bound(Q, optimal_triangle(Q, 0.3).vertices, 1)
    assert act == pytest.approx(b, rel=1e-5)
    rng = np.random.default_rng(5)
    for _ in range(50):
        V = rng.uniform(-1, 1, (3, 2))
        if triangle_metrics(V).area < 1e-3:
            continue
        b, act = lower_bound(PARABOLOID, V, 1)
        assert act >= b * (1 - 1e-6)


def test_lower_bound_needle():
    V = [(0, 0), (10, 0), (5, 0.1)]
    b, act = lower_bound(PARABOLOID, V, 1)
    assert act / b > 5


def test_lambda_floor_examples():
    assert lambda_min_floor(1, 1, 1) == pytest.approx(1.0)
    assert lambda_min_floor(2, 2, 1) == pytest.approx(2 - math.sqrt(3), rel=1e-14)
    with pytest.raises(InvalidArgument):
        lambda_min_floor(1, 1, 2)


def test_lambda_floor_holds_in_box():
    Ap, Bp, Cp = 3.0, 2.0, 0.5
    floor = lambda_min_floor(Ap, Bp, Cp)
    rng = np.random.default_rng(6)
    n = 0
    while n < 100:
        A, B = rng.uniform(0, Ap), rng.uniform(0, Bp)
        C = rng.uniform(-1, 1) * math.sqrt(A * B)
        if A * B - C * C < Cp:
            continue
        assert eigen_decompose(QuadraticForm(A, B, C)).lam_min >= floor * (1 - 1e-12)
        n += 1


def test_aspect_ratio():
    r, bound = aspect_ratio_bound_check(PARABOLOID)
    assert r == pytest.approx(EQ_DIAM, rel=1e-12)
    r, bound = aspect_ratio_bound_check(QuadraticForm(4, 1, 0))
    assert r <= 2 * EQ_DIAM and bound == pytest.approx(2 * EQ_DIAM)
    Q = QuadraticForm(2, 1, 0.7)
    assert aspect_ratio_bound_check(Q.scaled(9))[0] == pytest.approx(aspect_ratio_bound_check(Q)[0],
                                                                     rel=1e-12)
    rng = np.random.default_rng(7)
    for _ in range(50):
        r, bound = aspect_ratio_bound_check(random_spd(rng))
        assert r <= bound * (1 + 1e-12)
