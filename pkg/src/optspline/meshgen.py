"""Adaptive triangulations of the unit square with about N triangles.

The square is cut into ``m x m`` cells.  On each cell the field is frozen
to its second degree Taylor form at the cell centre, the cell gets a
triangle budget from the equidistribution formula, and it is tiled with
translates and point reflections of the optimal triangle for that form.
Tiles are clipped to the cell and the cell meshes are glued along shared
edges by splitting triangles at the neighbour's boundary vertices.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import GlueError, InvalidArgument, ModulusTooRough
from .fields import ScalarField, WeightField, UNIT_WEIGHT, check_admissible, check_weight, \
    modulus_estimate
from .geometry import (UNIT_SQUARE, Square, Triangulation, _lattice, boundary_points, clip_tiles,
                       validate_triangulation)
from .quadform import QuadraticForm, optimal_triangle

DEFAULT_EPSILON = 0.2
MAX_GLUE_PASSES = 10


def choose_m(field: ScalarField, epsilon: float, N: int) -> int:
    """Smallest ``m >= 1`` with ``(2/m^2) omega(1/m) <= epsilon/N``.

    The search stops at ``4 sqrt(N)``; a field that needs more cells than
    that is rejected with :class:`ModulusTooRough`.
    """
    _check_eps_N(epsilon, N)
    cap = max(1, int(math.floor(4.0 * math.sqrt(N))))
    target = epsilon / N
    for m in range(1, cap + 1):
        if 2.0 / (m * m) * modulus_estimate(field, 1.0 / m) <= target:
            return m
    raise ModulusTooRough(f"no m <= {cap} satisfies the freeze condition for N={N}, "
                          f"epsilon={epsilon}")


def _check_eps_N(epsilon, N):
    if not 0 < epsilon < 1:
        raise InvalidArgument(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if int(N) != N or N < 1:
        raise InvalidArgument(f"N must be a positive integer, got {N!r}")


@dataclass
class CellPlan:
    index: int
    square: tuple
    center: tuple
    A: float
    B: float
    C: float
    H: float
    omega_bar: float
    budget: int

    @property
    def form(self) -> QuadraticForm:
        return QuadraticForm(self.A, self.B, self.C)


@dataclass
class MeshPlan:
    epsilon: float
    N: int
    m: int
    p: float
    cells: list
    orientation: float = 0.0
    n_interior: int = 0   # triangles copied whole from the tilings
    n_boundary: int = 0   # pieces of tiles cut by a cell boundary
    n_final: int = 0      # triangles after gluing

    @property
    def total_budget(self) -> int:
        return sum(c.budget for c in self.cells)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total_budget"] = self.total_budget
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def budgets(H, omega_bar, p: float, N: int, epsilon: float) -> np.ndarray:
    """``floor(N (1-eps) w_i / sum_j w_j) + 1`` with ``w = H^(p/(2p+2)) omega^(p/(p+1))``."""
    H = np.asarray(H, dtype=float)
    w = H ** (p / (2 * p + 2)) * np.asarray(omega_bar, dtype=float) ** (p / (p + 1))
    return np.floor(N * (1 - epsilon) * w / w.sum()).astype(int) + 1


def _cells(m):
    edges = [k / m for k in range(m + 1)]
    out = []
    for iy in range(m):
        for ix in range(m):
            out.append(Square(edges[ix], edges[iy], edges[ix + 1], edges[iy + 1]))
    return out


def cell_plans(field: ScalarField, weight: WeightField | None, p: float, epsilon: float, N: int,
               m: int | None = None) -> MeshPlan:
    """Frozen quadratic forms and triangle budgets for every cell."""
    _check_eps_N(epsilon, N)
    if not p > 0:
        raise InvalidArgument("p must be positive")
    sign = check_admissible(field)
    weight = check_weight(weight or UNIT_WEIGHT)
    if m is None:
        m = choose_m(field, epsilon, N)
    squares = _cells(m)
    cx = np.array([0.5 * (s.x0 + s.x1) for s in squares])
    cy = np.array([0.5 * (s.y0 + s.y1) for s in squares])
    fxx, fxy, fyy = (np.broadcast_to(np.asarray(g, dtype=float), cx.shape)
                     for g in field.second_derivatives(cx, cy))
    A, B, C = 0.5 * sign * fxx, 0.5 * sign * fyy, 0.5 * sign * fxy
    H = 4.0 * (A * B - C * C)
    if np.any(H <= 0) or np.any(A <= 0):
        raise InvalidArgument("frozen form is not positive definite in some cell")
    t = (np.arange(16) + 0.5) / 16
    omega_bar = []
    for s in squares:
        X, Y = np.meshgrid(s.x0 + t * (s.x1 - s.x0), s.y0 + t * (s.y1 - s.y0))
        X = np.concatenate([X.ravel(), [s.x0, s.x1, s.x0, s.x1, 0.5 * (s.x0 + s.x1)]])
        Y = np.concatenate([Y.ravel(), [s.y0, s.y0, s.y1, s.y1, 0.5 * (s.y0 + s.y1)]])
        omega_bar.append(float(np.max(weight(X, Y))))
    n = budgets(H, omega_bar, p, N, epsilon)
    cells = [CellPlan(i, tuple(squares[i]), (float(cx[i]), float(cy[i])), float(A[i]),
                      float(B[i]), float(C[i]), float(H[i]), omega_bar[i], int(n[i]))
             for i in range(len(squares))]
    return MeshPlan(float(epsilon), int(N), int(m), float(p), cells)


@dataclass
class CellMesh:
    index: int
    square: Square
    interior: np.ndarray   # (k, 3, 2) unclipped tiles
    boundary: np.ndarray   # (k, 3, 2) pieces of clipped tiles
    boundary_vertices: np.ndarray

    @property
    def triangles(self) -> np.ndarray:
        return np.concatenate([self.interior, self.boundary])


def cell_mesh(plan: CellPlan, m: int, orientation: float = 0.0) -> CellMesh:
    """Tile one cell with the optimal triangle of area ``1/(m^2 n_i)``."""
    sq = Square(*plan.square)
    T = optimal_triangle(plan.form, 1.0 / (m * m * plan.budget), orientation)
    a = T.a
    T = T.translated(sq.x0 - a[0], sq.y0 - a[1])
    verts, tris = _lattice(T, sq)
    interior, boundary = clip_tiles(verts[tris], sq)
    W = boundary_points(np.concatenate([interior, boundary]), sq)
    return CellMesh(plan.index, sq, interior, boundary, W)


def _split_hanging(P: np.ndarray, hanging: dict) -> list:
    """Fan triangles from the vertex opposite an edge carrying hanging vertices.

    Only one edge per triangle is treated per call; the others are picked
    up by the next pass.
    """
    out = []
    for t, tri in enumerate(P):
        pts = hanging.get(t)
        if not pts:
            out.append(tri)
            continue
        best = None
        for k in range(3):
            a, b = tri[k], tri[(k + 1) % 3]
            d = b - a
            L2 = float(d @ d)
            on = []
            for v in pts:
                w = v - a
                if abs(w[0] * d[1] - w[1] * d[0]) <= 1e-10 * math.sqrt(L2):
                    s = float(w @ d) / L2
                    if 0 < s < 1:
                        on.append((s, v))
            if on:
                best = (k, sorted(on, key=lambda e: e[0]))
                break
        if best is None:
            out.append(tri)
            continue
        k, on = best
        a, b, c = tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]
        chain = [a] + [v for _, v in on] + [b]
        for u, v in zip(chain[:-1], chain[1:]):
            out.append(np.array([u, v, c]))
    return out


def glue(cells: list, plan: MeshPlan | None = None, domain: Square = UNIT_SQUARE) -> Triangulation:
    """Make per-cell meshes conforming across shared cell edges.

    Every triangle edge that contains another triangle's vertex in its
    relative interior is split there by fanning from the opposite vertex.
    Passes repeat until no hanging vertex is left.
    """
    from .geometry import _hanging_vertices

    P = [np.asarray(t, dtype=float) for c in cells for t in c.triangles]
    for _ in range(MAX_GLUE_PASSES):
        mesh = Triangulation.from_triangles(P, domain)
        found = _hanging_vertices(mesh.vertices, mesh.triangles, 1e-12)
        if not found:
            break
        hanging: dict = {}
        for v, t in found:
            hanging.setdefault(t, []).append(mesh.vertices[v])
        P = _split_hanging(mesh.corners(), hanging)
    else:
        raise GlueError(f"hanging vertices remain after {MAX_GLUE_PASSES} passes",
                        {"hanging": found[:20]})
    rep = validate_triangulation(mesh)
    if rep.n_violations or not rep.valid:
        raise GlueError(f"glued mesh is not conforming: {rep.summary()}", rep)
    if plan is not None:
        plan.n_interior = sum(len(c.interior) for c in cells)
        plan.n_boundary = sum(len(c.boundary) for c in cells)
        plan.n_final = len(mesh)
    return mesh


def build_mesh(field: ScalarField, weight: WeightField | None, p: float, N: int,
               epsilon: float = DEFAULT_EPSILON, orientation: float = 0.0,
               return_plan: bool = False):
    """Plan, tile, clip and glue.  Returns the triangulation (and the plan)."""
    plan = cell_plans(field, weight, p, epsilon, N)
    plan.orientation = float(orientation)
    cells = [cell_mesh(c, plan.m, orientation) for c in plan.cells]
    mesh = glue(cells, plan)
    return (mesh, plan) if return_plan else mesh


def uniform_mesh(N: int) -> Triangulation:
    """``k x k`` squares cut by parallel diagonals, ``k = floor(sqrt(N/2))``."""
    if int(N) != N or N < 2:
        raise InvalidArgument("uniform_mesh needs N >= 2")
    k = int(math.isqrt(int(N) // 2))
    t = np.array([i / k for i in range(k + 1)])
    X, Y = np.meshgrid(t, t, indexing="ij")
    V = np.column_stack([X.ravel(), Y.ravel()])
    idx = np.arange((k + 1) ** 2).reshape(k + 1, k + 1)
    p00, p10 = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    p01, p11 = idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
    F = np.empty((2 * k * k, 3), dtype=np.int64)
    F[0::2] = np.column_stack([p00, p10, p11])
    F[1::2] = np.column_stack([p00, p11, p01])
    return Triangulation(V, F, UNIT_SQUARE)
