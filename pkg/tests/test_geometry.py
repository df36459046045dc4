import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optspline.errors import CoverageError, DegenerateTriangle, InvalidArgument
from optspline.geometry import (
    UNIT_SQUARE, Polygon, Square, Triangle, Triangulation, clip_to_cell, make_equilateral,
    merge_points, tile_region, triangle_metrics, triangulate_polygon, validate_triangulation,
)

coord = st.floats(-3, 3, allow_nan=False)


def random_triangle(rng, scale=1.0):
    while True:
        V = rng.uniform(-1, 1, (3, 2)) * scale
        T = Triangle.from_array(V)
        if T.area > 1e-3 * scale * scale:
            return T


def test_metrics_right_isosceles():
    m = triangle_metrics(Triangle.from_array([(0, 0), (1, 0), (0, 1)]))
    assert m.area == pytest.approx(0.5)
    assert m.diameter == pytest.approx(math.sqrt(2))
    assert m.min_height == pytest.approx(1 / math.sqrt(2))
    assert m.circumcenter == pytest.approx((0.5, 0.5))
    assert m.circumradius == pytest.approx(math.sqrt(2) / 2)


def test_metrics_equilateral():
    m = triangle_metrics(Triangle.from_array([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)]))
    assert m.circumradius == pytest.approx(1 / math.sqrt(3), rel=1e-14)
    assert m.min_height == pytest.approx(math.sqrt(3) / 2, rel=1e-14)


def test_metrics_rotation_invariant():
    rng = np.random.default_rng(1)
    for _ in range(50):
        T = random_triangle(rng)
        th = rng.uniform(0, 2 * math.pi)
        R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        m1 = triangle_metrics(T)
        m2 = triangle_metrics(Triangle.from_array(T.vertices @ R.T))
        for k in ("area", "diameter", "min_height", "circumradius"):
            assert getattr(m2, k) == pytest.approx(getattr(m1, k), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(coord, min_size=6, max_size=6))
def test_metrics_consistency(xs):
    V = np.array(xs).reshape(3, 2)
    T = Triangle.from_array(V)
    if T.area < 1e-6:
        return
    m = triangle_metrics(T)
    assert m.min_height * m.diameter == pytest.approx(2 * m.area, rel=1e-9)
    d = np.linalg.norm(V - np.array(m.circumcenter), axis=1)
    assert np.allclose(d, m.circumradius, rtol=1e-8)


def test_degenerate_triangle_rejected():
    with pytest.raises(DegenerateTriangle):
        triangle_metrics(Triangle.from_array([(0, 0), (1, 1), (2, 2)]))


def test_make_equilateral_unit_area():
    T = make_equilateral((0, 0), 1.0)
    s = 2 / 3 ** 0.25
    m = triangle_metrics(T)
    assert m.diameter == pytest.approx(s, rel=1e-14)
    assert m.circumradius == pytest.approx(s / math.sqrt(3), rel=1e-14)
    assert m.area == pytest.approx(1.0, rel=1e-12)
    assert m.circumcenter == pytest.approx((0, 0), abs=1e-14)


def test_make_equilateral_threefold_symmetry():
    a = make_equilateral((0.2, -0.1), 1.0, 0.0).vertices
    b = make_equilateral((0.2, -0.1), 1.0, 2 * math.pi / 3).vertices
    key = lambda V: sorted(map(tuple, np.round(V, 12)))
    assert key(a) == key(b)


def test_make_equilateral_bad_area():
    with pytest.raises(InvalidArgument):
        make_equilateral((0, 0), 0.0)


def test_tile_region_aligned_half_cell():
    T = Triangle.from_array([(0, 0), (1, 0), (0, 1)])
    tiles = tile_region(T, UNIT_SQUARE)
    inside = [t for t in tiles if np.all((t.vertices >= -1e-12) & (t.vertices <= 1 + 1e-12))]
    assert len(inside) == 2


@pytest.mark.parametrize("seed", range(5))
def test_tile_region_covers_cell(seed):
    rng = np.random.default_rng(seed)
    T = random_triangle(rng, 0.2)
    cell = Square(0.1, 0.2, 0.6, 0.7)
    tiles = tile_region(T, cell)
    assert sum(t.area for t in tiles) >= cell.area
    P = np.array([t.vertices for t in tiles])
    g = np.linspace(0.1, 0.6, 100)
    X, Y = np.meshgrid(g, g + 0.1)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    covered = np.zeros(len(pts), dtype=bool)
    for a, b, c in P:
        M = np.column_stack([b - a, c - a])
        lam = np.linalg.solve(M, (pts - a).T).T
        covered |= (lam[:, 0] >= -1e-9) & (lam[:, 1] >= -1e-9) & (lam.sum(1) <= 1 + 1e-9)
    assert covered.all()


def test_clip_inside_passthrough():
    cell = Square(0.0, 0.0, 1.0, 1.0)
    tiles = tile_region(Triangle.from_array([(0, 0), (0.5, 0), (0, 0.5)]), cell)
    res = clip_to_cell(tiles, cell)
    assert len(res.boundary) == 0
    inside = [t for t in tiles if np.all((t.vertices >= 0) & (t.vertices <= 1))]
    key = lambda ts: sorted(tuple(np.round(t.ccw().vertices.ravel(), 12)) for t in ts)
    assert key(res.interior) == key(inside)


def test_clip_crossing_one_edge():
    # one big triangle poking over the right edge of the cell
    cell = Square(0, 0, 1, 1)
    tiles = tile_region(Triangle.from_array([(0, 0), (0.7, 0), (0, 0.7)]), cell)
    res = clip_to_cell(tiles, cell)
    assert res.boundary
    total = sum(t.area for t in res.interior + res.boundary)
    assert total == pytest.approx(1.0, abs=1e-10)
    for t in res.interior + res.boundary:
        V = t.vertices
        assert np.all(V >= -1e-12) and np.all(V <= 1 + 1e-12)
    for p in res.boundary_vertices:
        assert min(p.x, 1 - p.x, p.y, 1 - p.y) <= 1e-12


def test_clip_polygon_vertex_bound():
    from optspline.geometry import clip_triangle
    rng = np.random.default_rng(3)
    for _ in range(200):
        T = random_triangle(rng, 1.5)
        poly = clip_triangle(T.vertices, Square(-0.5, -0.5, 0.5, 0.5))
        if poly is not None:
            assert 3 <= len(poly) <= 7
            assert len(triangulate_polygon(poly)) <= 5


def test_clip_coverage_error():
    tiles = [Triangle.from_array([(0, 0), (1, 0), (0, 1)])]
    with pytest.raises(CoverageError):
        clip_to_cell(tiles, UNIT_SQUARE)


@pytest.mark.parametrize("seed", range(4))
def test_clip_partition_random_lattice(seed):
    rng = np.random.default_rng(seed + 10)
    T = random_triangle(rng, 0.08)
    cell = Square(0.25, 0.5, 0.5, 0.75)
    res = clip_to_cell(tile_region(T, cell), cell)
    tris = res.interior + res.boundary
    assert sum(t.area for t in tris) == pytest.approx(cell.area, rel=1e-10)
    mesh = Triangulation.from_triangles(tris, cell)
    rep = validate_triangulation(mesh)
    assert not rep.overlaps and not rep.hanging_vertices


def test_triangulate_polygon_cases():
    tri = Polygon(np.array([(0, 0), (1, 0), (0, 1)], float))
    assert len(triangulate_polygon(tri)) == 1
    sq = Polygon(np.array([(0, 0), (1, 0), (1, 1), (0, 1)], float))
    out = triangulate_polygon(sq)
    assert [t.area for t in out] == pytest.approx([0.5, 0.5])
    ang = np.arange(6) * math.pi / 3
    hexagon = Polygon(np.column_stack([np.cos(ang), np.sin(ang)]))
    out = triangulate_polygon(hexagon)
    assert len(out) == 4
    assert sum(t.area for t in out) == pytest.approx(1.5 * math.sqrt(3), rel=1e-12)
    verts = {tuple(np.round(v, 14)) for v in hexagon.vertices}
    assert all(tuple(np.round(v, 14)) in verts for t in out for v in t.vertices)


def test_triangulate_nonconvex_rejected():
    P = Polygon(np.array([(0, 0), (2, 0), (1, 0.2), (1, 2)], float))
    with pytest.raises(InvalidArgument):
        triangulate_polygon(P)


def test_validate_shared_edge_ok():
    mesh = Triangulation([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1, 2), (0, 2, 3)])
    rep = validate_triangulation(mesh)
    assert rep.n_violations == 0 and rep.valid


def test_validate_overlap_flagged():
    mesh = Triangulation([(0, 0), (1, 0), (0, 1), (0.2, 0.2), (1.2, 0.2), (0.2, 1.2)],
                         [(0, 1, 2), (3, 4, 5)], Square(0, 0, 1.2, 1.2))
    assert validate_triangulation(mesh).overlaps


def test_validate_hanging_vertex_flagged():
    V = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]
    F = [(0, 1, 2), (0, 4, 3), (4, 2, 3)]
    rep = validate_triangulation(Triangulation(V, F))
    assert rep.hanging_vertices
    assert rep.n_violations > 0


def test_merge_points_first_seen_order():
    pts = np.array([(0, 0), (1, 0), (1e-14, 0), (1, 1e-13)], float)
    u, inv = merge_points(pts)
    assert len(u) == 2
    assert inv.tolist() == [0, 1, 0, 1]


def test_json_and_off_roundtrip():
    mesh = Triangulation([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1, 2), (0, 2, 3)])
    back = Triangulation.from_json(mesh.to_json())
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.triangles, mesh.triangles)
    off = mesh.to_off()
    assert off.splitlines()[0] == "OFF"
    back = Triangulation.from_off(off)
    assert np.array_equal(back.triangles, mesh.triangles)


def test_reflected_triangle_forms_parallelogram():
    T = Triangle.from_array([(0, 0), (1, 0), (0.3, 0.8)])
    R = T.reflected()
    assert R.area == pytest.approx(T.area)
    centre = 0.5 * (np.array(T.b) + np.array(T.c))
    assert np.allclose(np.array(T.a) + np.array(R.a), 2 * centre)
