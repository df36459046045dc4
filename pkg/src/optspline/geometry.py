"""Planar primitives: triangles, tilings, clipping and triangulation checks.

Everything here works on the unit-scale domain ``[0, 1]^2`` so a fixed
absolute tolerance is used for merging points and for on-edge tests.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import CoverageError, DegenerateTriangle, InvalidArgument

MERGE_TOL = 1e-12
EDGE_TOL = 1e-12
MIN_AREA = 1e-14


class Point2(NamedTuple):
    x: float
    y: float


class Square(NamedTuple):
    """Axis-aligned box ``[x0, x1] x [y0, y1]``."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def center(self) -> Point2:
        return Point2(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def corners(self) -> np.ndarray:
        return np.array([[self.x0, self.y0], [self.x1, self.y0],
                         [self.x1, self.y1], [self.x0, self.y1]])


UNIT_SQUARE = Square(0.0, 0.0, 1.0, 1.0)


def _signed_area(a, b, c) -> float:
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))


@dataclass(frozen=True)
class Triangle:
    a: Point2
    b: Point2
    c: Point2

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not isinstance(v, Point2):
                object.__setattr__(self, name, Point2(float(v[0]), float(v[1])))

    @classmethod
    def from_array(cls, arr) -> "Triangle":
        arr = np.asarray(arr, dtype=float)
        return cls(Point2(*arr[0]), Point2(*arr[1]), Point2(*arr[2]))

    @property
    def vertices(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=float)

    @property
    def signed_area(self) -> float:
        return _signed_area(self.a, self.b, self.c)

    @property
    def area(self) -> float:
        return abs(self.signed_area)

    def translated(self, dx: float, dy: float) -> "Triangle":
        return Triangle.from_array(self.vertices + [dx, dy])

    def ccw(self) -> "Triangle":
        return self if self.signed_area >= 0 else Triangle(self.a, self.c, self.b)

    def reflected(self, side: int = 0) -> "Triangle":
        """Point reflection through the midpoint of a side.

        ``side`` indexes the side opposite vertex ``side``; for the default
        the side ``bc`` is used and the result is ``(b + c - a, c, b)``.
        """
        v = np.roll(self.vertices, -side, axis=0)
        a, b, c = v
        return Triangle.from_array([b + c - a, c, b])


@dataclass(frozen=True)
class TriangleMetrics:
    area: float
    diameter: float
    min_height: float
    circumcenter: Point2
    circumradius: float


def circumcircle(a, b, c) -> tuple[Point2, float]:
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 2 * MIN_AREA:
        raise DegenerateTriangle("collinear vertices have no circumcircle")
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return Point2(ux, uy), math.hypot(ax - ux, ay - uy)


def triangle_metrics(T) -> TriangleMetrics:
    if not isinstance(T, Triangle):
        T = Triangle.from_array(T)
    area = T.area
    if area < MIN_AREA:
        raise DegenerateTriangle(f"triangle area {area:.3e} below tolerance")
    v = T.vertices
    sides = [float(np.hypot(*(v[(i + 1) % 3] - v[i]))) for i in range(3)]
    diam = max(sides)
    center, radius = circumcircle(T.a, T.b, T.c)
    return TriangleMetrics(area, diam, 2.0 * area / diam, center, radius)


def make_equilateral(center, area: float, orientation: float = 0.0) -> Triangle:
    """Equilateral triangle of the given area centred at ``center``.

    At ``orientation=0`` the vertices are listed counter-clockwise starting
    from the lower-left one, so the first side is horizontal.
    """
    if not area > 0:
        raise InvalidArgument("area must be positive")
    side = math.sqrt(4.0 * area / math.sqrt(3.0))
    radius = side / math.sqrt(3.0)
    angles = orientation + np.array([7.0, 11.0, 3.0]) * math.pi / 6.0
    pts = np.column_stack([center[0] + radius * np.cos(angles),
                           center[1] + radius * np.sin(angles)])
    return Triangle.from_array(pts)


# ---------------------------------------------------------------------------
# tiling and clipping


def _lattice(T: Triangle, cell: Square):
    """Lattice vertices and index triples of ``G(T)`` near ``cell``.

    Vertex ``(i, j)`` sits at ``a + i (b - a) + j (c - a)`` and is computed
    exactly once, so neighbouring tiles share bit-identical coordinates.
    """
    T = T.ccw()
    if T.area < MIN_AREA:
        raise DegenerateTriangle("cannot tile with a degenerate triangle")
    a = np.array(T.a)
    basis = np.column_stack([np.subtract(T.b, a), np.subtract(T.c, a)])
    inv = np.linalg.inv(basis)
    lam = (cell.corners() - a) @ inv.T
    i0, j0 = np.floor(lam.min(axis=0)).astype(int) - 1
    i1, j1 = np.ceil(lam.max(axis=0)).astype(int) + 1
    ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1), indexing="ij")
    ni, nj = ii.shape
    verts = a + ii.reshape(-1, 1) * basis[:, 0] + jj.reshape(-1, 1) * basis[:, 1]
    idx = np.arange(ni * nj).reshape(ni, nj)
    p00, p10 = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    p01, p11 = idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
    tris = np.concatenate([np.column_stack([p00, p10, p01]),
                           np.column_stack([p11, p01, p10])])
    # keep tiles whose bounding box meets the closed cell
    tv = verts[tris]
    lo, hi = tv.min(axis=1), tv.max(axis=1)
    keep = ((hi[:, 0] >= cell.x0 - EDGE_TOL) & (lo[:, 0] <= cell.x1 + EDGE_TOL)
            & (hi[:, 1] >= cell.y0 - EDGE_TOL) & (lo[:, 1] <= cell.y1 + EDGE_TOL))
    tris = tris[keep]
    tris = tris[_tiles_meet_box(verts[tris], cell)]
    return verts, tris


def _tiles_meet_box(P: np.ndarray, cell: Square) -> np.ndarray:
    # separating axis test along the tile edge normals (box axes done by caller)
    box = cell.corners()
    meets = np.ones(len(P), dtype=bool)
    for k in range(3):
        e = P[:, (k + 1) % 3] - P[:, k]
        n = np.stack([-e[:, 1], e[:, 0]], axis=1)
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        pt = np.einsum("nkd,nd->nk", P, n)
        pb = box @ n.T
        meets &= ~((pt.max(1) < pb.min(0) - EDGE_TOL) | (pb.max(0) < pt.min(1) - EDGE_TOL))
    return meets


def tile_region(T: Triangle, cell: Square) -> list[Triangle]:
    """All tiles of the plane triangulation generated by ``T`` that touch ``cell``.

    The plane is tiled by translates of the parallelogram ``T`` plus its
    reflection through the midpoint of side ``bc``.
    """
    verts, tris = _lattice(T, cell)
    return [Triangle.from_array(verts[t]) for t in tris]


@dataclass(frozen=True)
class Polygon:
    vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices",
                           tuple(Point2(float(x), float(y)) for x, y in self.vertices))

    def __len__(self):
        return len(self.vertices)

    @property
    def signed_area(self) -> float:
        v = np.asarray(self.vertices)
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    @property
    def area(self) -> float:
        return abs(self.signed_area)

    def is_convex(self, tol: float = EDGE_TOL) -> bool:
        v = np.asarray(self.vertices)
        if len(v) < 3:
            return False
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
        return bool(np.all(cross >= -tol) or np.all(cross <= tol))


def triangulate_polygon(P: Polygon) -> list[Triangle]:
    """Fan triangulation of a convex polygon without new vertices.

    The fan is anchored at the lexicographically smallest vertex; the
    output triangles are counter-clockwise.
    """
    if len(P) < 3:
        raise InvalidArgument("polygon needs at least 3 vertices")
    if not P.is_convex():
        raise InvalidArgument("fan triangulation needs a convex polygon")
    v = list(P.vertices)
    if P.signed_area < 0:
        v.reverse()
    k = min(range(len(v)), key=lambda i: (v[i].x, v[i].y))
    v = v[k:] + v[:k]
    return [Triangle(v[0], v[i], v[i + 1]) for i in range(1, len(v) - 1)]


def _on_boundary(p, cell: Square) -> bool:
    return (abs(p[0] - cell.x0) <= EDGE_TOL or abs(p[0] - cell.x1) <= EDGE_TOL
            or abs(p[1] - cell.y0) <= EDGE_TOL or abs(p[1] - cell.y1) <= EDGE_TOL)


def _snap(p, cell: Square):
    x, y = float(p[0]), float(p[1])
    for edge in (cell.x0, cell.x1):
        if abs(x - edge) <= EDGE_TOL:
            x = edge
    for edge in (cell.y0, cell.y1):
        if abs(y - edge) <= EDGE_TOL:
            y = edge
    return x, y


def _edge_box_points(p, q, cell: Square) -> list:
    # intersection of segment pq with the four box sides; endpoints are put in
    # canonical order so both tiles sharing the edge get identical floats
    if (q[0], q[1]) < (p[0], p[1]):
        p, q = q, p
    out = []
    dx, dy = q[0] - p[0], q[1] - p[1]
    for xv in (cell.x0, cell.x1):
        if dx != 0.0:
            t = (xv - p[0]) / dx
            if -EDGE_TOL <= t <= 1 + EDGE_TOL:
                y = p[1] + t * dy
                if cell.y0 - EDGE_TOL <= y <= cell.y1 + EDGE_TOL:
                    out.append((xv, min(max(y, cell.y0), cell.y1)))
    for yv in (cell.y0, cell.y1):
        if dy != 0.0:
            t = (yv - p[1]) / dy
            if -EDGE_TOL <= t <= 1 + EDGE_TOL:
                x = p[0] + t * dx
                if cell.x0 - EDGE_TOL <= x <= cell.x1 + EDGE_TOL:
                    out.append((min(max(x, cell.x0), cell.x1), yv))
    return out


def _inside_box(p, cell: Square) -> bool:
    return (cell.x0 - EDGE_TOL <= p[0] <= cell.x1 + EDGE_TOL
            and cell.y0 - EDGE_TOL <= p[1] <= cell.y1 + EDGE_TOL)


def _inside_triangle(p, tri) -> bool:
    s = _signed_area(*tri)
    sign = 1.0 if s > 0 else -1.0
    scale = max(1.0, abs(s))
    for k in range(3):
        if sign * _signed_area(tri[k], tri[(k + 1) % 3], p) < -EDGE_TOL * scale:
            return False
    return True


def clip_triangle(tri, cell: Square) -> Polygon | None:
    """Intersection of a triangle with a box as a convex polygon.

    Equivalent to clipping against the four half-planes in turn, but each
    crossing point is computed from the original tile edge so that tiles
    sharing an edge produce the same point.  Returns ``None`` when the
    intersection has no area.
    """
    tri = [tuple(map(float, v)) for v in tri]
    pts = [_snap(v, cell) for v in tri if _inside_box(v, cell)]
    pts += [tuple(c) for c in cell.corners() if _inside_triangle(c, tri)]
    for k in range(3):
        pts += _edge_box_points(tri[k], tri[(k + 1) % 3], cell)
    uniq: list = []
    for p in pts:
        if all(abs(p[0] - u[0]) > MERGE_TOL or abs(p[1] - u[1]) > MERGE_TOL for u in uniq):
            uniq.append(p)
    if len(uniq) < 3:
        return None
    arr = np.array(uniq)
    ctr = arr.mean(axis=0)
    order = np.argsort(np.arctan2(arr[:, 1] - ctr[1], arr[:, 0] - ctr[0]))
    poly = Polygon(arr[order])
    if poly.area < MIN_AREA:
        return None
    return poly


@dataclass
class ClipResult:
    interior: list
    boundary: list
    boundary_vertices: list


def clip_tiles(P: np.ndarray, cell: Square):
    """Array version of :func:`clip_to_cell`.

    ``P`` has shape ``(n, 3, 2)``.  Returns ``(interior, boundary)`` arrays of
    counter-clockwise triangles.
    """
    P = np.asarray(P, dtype=float).reshape(-1, 3, 2)
    x, y = P[..., 0], P[..., 1]
    inside = ((x >= cell.x0 - EDGE_TOL) & (x <= cell.x1 + EDGE_TOL)
              & (y >= cell.y0 - EDGE_TOL) & (y <= cell.y1 + EDGE_TOL)).all(axis=1)
    interior = P[inside].copy()
    for lo_, hi_, k in ((cell.x0, cell.x1, 0), (cell.y0, cell.y1, 1)):
        comp = interior[..., k]
        comp[np.abs(comp - lo_) <= EDGE_TOL] = lo_
        comp[np.abs(comp - hi_) <= EDGE_TOL] = hi_
    s = signed_areas(interior)
    interior[s < 0] = interior[s < 0][:, [0, 2, 1]]
    interior = interior[np.abs(s) >= MIN_AREA]
    boundary = []
    for tri in P[~inside]:
        poly = clip_triangle(tri, cell)
        if poly is None:
            continue
        for t in triangulate_polygon(poly):
            if t.area >= MIN_AREA:
                boundary.append(t.vertices)
    boundary = np.array(boundary).reshape(-1, 3, 2)
    total = float(np.abs(signed_areas(interior)).sum() + np.abs(signed_areas(boundary)).sum())
    if abs(total - cell.area) > 1e-9 * cell.area:
        raise CoverageError(f"clipped tiles cover {total!r} of cell area {cell.area!r}")
    return interior, boundary


def boundary_points(P: np.ndarray, cell: Square) -> np.ndarray:
    """Distinct triangle vertices lying on the boundary of ``cell``, sorted."""
    pts = np.asarray(P, dtype=float).reshape(-1, 2)
    on = ((np.abs(pts[:, 0] - cell.x0) <= EDGE_TOL) | (np.abs(pts[:, 0] - cell.x1) <= EDGE_TOL)
          | (np.abs(pts[:, 1] - cell.y0) <= EDGE_TOL) | (np.abs(pts[:, 1] - cell.y1) <= EDGE_TOL))
    return np.unique(pts[on], axis=0)


def clip_to_cell(tiles: Sequence[Triangle], cell: Square) -> ClipResult:
    """Restrict a covering set of tiles to ``cell``.

    Tiles inside the closed cell pass through; tiles crossing its boundary
    are clipped to a convex polygon (at most 7 vertices) and fan
    triangulated.  Raises :class:`CoverageError` if the pieces do not add
    up to the cell area.
    """
    P = np.array([t.vertices for t in tiles]).reshape(-1, 3, 2)
    interior, boundary = clip_tiles(P, cell)
    bverts = boundary_points(np.concatenate([interior, boundary]), cell)
    return ClipResult([Triangle.from_array(t) for t in interior],
                      [Triangle.from_array(t) for t in boundary],
                      [Point2(*p) for p in bverts])


# ---------------------------------------------------------------------------
# triangulations


@dataclass
class Triangulation:
    vertices: np.ndarray
    triangles: np.ndarray
    domain: Square = UNIT_SQUARE

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.domain = Square(*map(float, self.domain))

    def __len__(self):
        return len(self.triangles)

    def triangle(self, i: int) -> Triangle:
        return Triangle.from_array(self.vertices[self.triangles[i]])

    def corners(self) -> np.ndarray:
        """Array of shape ``(n, 3, 2)`` with the triangle vertices."""
        return self.vertices[self.triangles]

    def areas(self) -> np.ndarray:
        return np.abs(signed_areas(self.corners()))

    @classmethod
    def from_triangles(cls, tris: Iterable, domain: Square = UNIT_SQUARE,
                       tol: float = MERGE_TOL) -> "Triangulation":
        """Build an indexed mesh from triangle soup, merging nearby points."""
        pts = np.array([np.asarray(t.vertices if isinstance(t, Triangle) else t, float)
                        for t in tris]).reshape(-1, 2)
        if len(pts) == 0:
            return cls(np.zeros((0, 2)), np.zeros((0, 3), int), domain)
        verts, inverse = merge_points(pts, tol)
        return cls(verts, inverse.reshape(-1, 3), domain)

    def to_json(self) -> str:
        return json.dumps({"vertices": self.vertices.tolist(),
                           "triangles": self.triangles.tolist(),
                           "domain": list(self.domain)})

    @classmethod
    def from_json(cls, text: str) -> "Triangulation":
        data = json.loads(text)
        return cls(np.array(data["vertices"], dtype=float).reshape(-1, 2),
                   np.array(data["triangles"], dtype=np.int64).reshape(-1, 3),
                   Square(*data.get("domain", UNIT_SQUARE)))

    def to_off(self) -> str:
        lines = ["OFF", f"{len(self.vertices)} {len(self.triangles)} 0"]
        lines += [f"{float(x)!r} {float(y)!r} 0.0" for x, y in self.vertices]
        lines += [f"3 {i} {j} {k}" for i, j, k in self.triangles]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_off(cls, text: str, domain: Square = UNIT_SQUARE) -> "Triangulation":
        toks = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not toks or toks[0][0] != "OFF":
            raise InvalidArgument("not an OFF file")
        nv, nf = int(toks[1][0]), int(toks[1][1])
        V = np.array([[float(t[0]), float(t[1])] for t in toks[2:2 + nv]])
        F = np.array([[int(t[1]), int(t[2]), int(t[3])] for t in toks[2 + nv:2 + nv + nf]])
        return cls(V, F, domain)


def merge_points(pts: np.ndarray, tol: float = MERGE_TOL):
    """Merge points closer than ``tol``; returns unique points and inverse map.

    Unique points keep first-seen order so the output is deterministic.
    """
    pts = np.asarray(pts, dtype=float)
    tree = cKDTree(pts)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    parent = np.arange(len(pts))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(pts))])
    uniq_roots, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return pts[uniq_roots[order]], rank[inverse]


def signed_areas(P: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    a, b, c = P[..., 0, :], P[..., 1, :], P[..., 2, :]
    return 0.5 * ((b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1])
                  - (c[..., 0] - a[..., 0]) * (b[..., 1] - a[..., 1]))


@dataclass
class ValidityReport:
    n_triangles: int
    total_area: float
    coverage_deficit: float
    overlaps: list = field(default_factory=list)
    hanging_vertices: list = field(default_factory=list)
    degenerate: list = field(default_factory=list)
    unreferenced_vertices: list = field(default_factory=list)
    duplicate_vertices: list = field(default_factory=list)
    outside_vertices: list = field(default_factory=list)

    @property
    def n_violations(self) -> int:
        return (len(self.overlaps) + len(self.hanging_vertices) + len(self.degenerate)
                + len(self.unreferenced_vertices) + len(self.duplicate_vertices)
                + len(self.outside_vertices))

    @property
    def valid(self) -> bool:
        return self.n_violations == 0 and abs(self.coverage_deficit) <= 1e-10

    def summary(self) -> str:
        return (f"{self.n_triangles} triangles, deficit {self.coverage_deficit:.2e}, "
                f"{len(self.overlaps)} overlaps, {len(self.hanging_vertices)} hanging, "
                f"{len(self.degenerate)} degenerate")


def _bucket_index(lo, hi, size):
    return (np.floor(lo / size).astype(int), np.floor(hi / size).astype(int))


def _candidate_pairs(P: np.ndarray) -> np.ndarray:
    # triangles whose bounding boxes share a grid bucket
    lo, hi = P.min(axis=1), P.max(axis=1)
    ext = np.maximum(hi - lo, 0).max(axis=1)
    size = max(float(np.median(ext)) * 2.0, 1e-9) if len(P) else 1.0
    (bx0, by0), (bx1, by1) = [np.floor(lo[:, k] / size).astype(int) for k in (0, 1)], \
        [np.floor(hi[:, k] / size).astype(int) for k in (0, 1)]
    buckets = defaultdict(list)
    for t in range(len(P)):
        for i in range(bx0[t], bx1[t] + 1):
            for j in range(by0[t], by1[t] + 1):
                buckets[(i, j)].append(t)
    pairs = set()
    for members in buckets.values():
        m = len(members)
        for u in range(m):
            for w in range(u + 1, m):
                a, b = members[u], members[w]
                pairs.add((a, b) if a < b else (b, a))
    if not pairs:
        return np.zeros((0, 2), dtype=int)
    return np.array(sorted(pairs), dtype=int)


def _sat_overlap(P1: np.ndarray, P2: np.ndarray, tol: float) -> np.ndarray:
    """Vectorized test for positive-area overlap of triangle pairs."""
    separated = np.zeros(len(P1), dtype=bool)
    for P in (P1, P2):
        for k in range(3):
            e = P[:, (k + 1) % 3] - P[:, k]
            n = np.stack([-e[:, 1], e[:, 0]], axis=1)
            n /= np.linalg.norm(n, axis=1, keepdims=True)
            s1 = np.einsum("nkd,nd->nk", P1, n)
            s2 = np.einsum("nkd,nd->nk", P2, n)
            gap = np.minimum(s1.max(1) - s2.min(1), s2.max(1) - s1.min(1))
            separated |= gap <= tol
    return ~separated


def validate_triangulation(tri: Triangulation, tol: float = 1e-10) -> ValidityReport:
    """Check conformity: no overlaps, no hanging vertices, full coverage."""
    V, F = tri.vertices, tri.triangles
    P = V[F] if len(F) else np.zeros((0, 3, 2))
    area = np.abs(signed_areas(P))
    total = float(area.sum())
    rep = ValidityReport(len(F), total, tri.domain.area - total)
    rep.degenerate = np.nonzero(area <= 1e-15)[0].tolist()
    used = np.zeros(len(V), dtype=bool)
    used[F.ravel()] = True
    rep.unreferenced_vertices = np.nonzero(~used)[0].tolist()
    if len(V):
        rep.duplicate_vertices = [tuple(p) for p in
                                  cKDTree(V).query_pairs(MERGE_TOL, output_type="ndarray").tolist()]
    d = tri.domain
    out = ((V[:, 0] < d.x0 - tol) | (V[:, 0] > d.x1 + tol)
           | (V[:, 1] < d.y0 - tol) | (V[:, 1] > d.y1 + tol))
    rep.outside_vertices = np.nonzero(out)[0].tolist()
    if len(F) < 2:
        return rep

    pairs = _candidate_pairs(P)
    if len(pairs):
        hit = _sat_overlap(P[pairs[:, 0]], P[pairs[:, 1]], tol)
        rep.overlaps = [tuple(p) for p in pairs[hit].tolist()]

    rep.hanging_vertices = _hanging_vertices(V, F, tol)
    return rep


def _hanging_vertices(V: np.ndarray, F: np.ndarray, tol: float) -> list:
    """Pairs ``(vertex, triangle)`` where the vertex lies inside an edge."""
    edges = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
    owner = np.tile(np.arange(len(F)), 3)
    p, q = V[edges[:, 0]], V[edges[:, 1]]
    tree = cKDTree(V)
    mid = 0.5 * (p + q)
    half = 0.5 * np.linalg.norm(q - p, axis=1)
    found = []
    cand = tree.query_ball_point(mid, half + tol)
    for e, verts in enumerate(cand):
        if len(verts) <= 2:
            continue
        a, b = edges[e]
        d = q[e] - p[e]
        L2 = float(d @ d)
        for v in verts:
            if v == a or v == b:
                continue
            w = V[v] - p[e]
            t = float(w @ d) / L2
            if t <= tol or t >= 1 - tol:
                continue
            dist = abs(w[0] * d[1] - w[1] * d[0]) / math.sqrt(L2)
            if dist <= tol:
                found.append((int(v), int(owner[e])))
    return sorted(set(found))
