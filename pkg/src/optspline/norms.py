"""Linear interpolation on triangles and L_p error functionals.

Integrals are computed with a fixed symmetric rule on the reference
triangle combined with adaptive 4-way midpoint subdivision.  Sub-triangles
are tracked in barycentric coordinates of their root triangle, so the
interpolant at a quadrature point is a convex combination of the vertex
values and never needs a linear solve.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import DegenerateTriangle, InvalidArgument, InvalidTriangulation, ToleranceNotReached
from .geometry import MIN_AREA, Triangle, Triangulation, signed_areas


@dataclass(frozen=True)
class QuadratureSpec:
    """Base rule size and adaptivity controls.

    ``points_per_axis`` Gauss points in the collapsed product make the base
    rule exact for polynomials of degree ``2 * points_per_axis - 1``.
    """

    points_per_axis: int = 6
    max_depth: int = 12
    rtol: float = 1e-9
    batch: int = 512
    max_active: int = 16384

    def __post_init__(self):
        if not self.rtol > 0:
            raise InvalidArgument("rtol must be positive")
        if self.max_depth < 0 or self.points_per_axis < 1:
            raise InvalidArgument("invalid quadrature spec")

    @property
    def degree(self) -> int:
        return 2 * self.points_per_axis - 1


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=None)
def reference_rule(points_per_axis: int = 6):
    """Fully symmetric interior rule on the reference triangle.

    Returns barycentric points of shape ``(k, 3)`` and weights summing to 1
    (so a rule applied to triangle ``T`` is multiplied by ``|T|``).  The
    rule is a Gauss-Jacobi x Gauss-Legendre conical product averaged over
    the six permutations of the barycentric coordinates.
    """
    n = points_per_axis
    u, wu = roots_jacobi(n, 1.0, 0.0)  # weight (1 - u) on [-1, 1]
    v, wv = roots_legendre(n)
    u, v = 0.5 * (u + 1.0), 0.5 * (v + 1.0)
    wu, wv = wu / 4.0, wv / 2.0
    U, V = np.meshgrid(u, v, indexing="ij")
    x, y = U.ravel(), ((1.0 - U) * V).ravel()
    w = np.outer(wu, wv).ravel()
    base = np.column_stack([1.0 - x - y, x, y])
    pts = np.concatenate([base[:, list(perm)] for perm in itertools.permutations(range(3))])
    wts = np.tile(w, 6)
    return pts, wts / wts.sum()


@dataclass(frozen=True)
class LinearFunction:
    """``p(x, y) = a x + b y + c``."""

    a: float
    b: float
    c: float

    def __call__(self, x, y):
        return self.a * np.asarray(x) + self.b * np.asarray(y) + self.c


@dataclass(frozen=True)
class ErrorValue:
    p: float
    value: float
    pth_power: float
    converged: bool = True

    def to_dict(self) -> dict:
        return {"p": self.p, "value": self.value, "pth_power": self.pth_power,
                "converged": self.converged}


def _as_array(tri) -> np.ndarray:
    if isinstance(tri, Triangle):
        return tri.vertices
    return np.asarray(tri, dtype=float).reshape(3, 2)


def linear_interpolant(g: Callable, T) -> LinearFunction:
    """Affine function matching ``g`` at the three vertices of ``T``."""
    V = _as_array(T)
    if abs(float(signed_areas(V))) < MIN_AREA:
        raise DegenerateTriangle("interpolation on a degenerate triangle")
    vals = np.asarray(g(V[:, 0], V[:, 1]), dtype=float)
    M = np.column_stack([V, np.ones(3)])
    a, b, c = np.linalg.solve(M, vals)
    return LinearFunction(float(a), float(b), float(c))


_CHILDREN = np.array([
    [[1, 0, 0], [.5, .5, 0], [.5, 0, .5]],
    [[.5, .5, 0], [0, 1, 0], [0, .5, .5]],
    [[.5, 0, .5], [0, .5, .5], [0, 0, 1]],
    [[0, .5, .5], [.5, 0, .5], [.5, .5, 0]],
])


def _split(B: np.ndarray) -> np.ndarray:
    """Midpoint split of pieces given in barycentric coords, ``(k,3,3) -> (4k,3,3)``."""
    return np.einsum("cij,kjl->kcil", _CHILDREN, B).reshape(-1, 3, 3)


class _Batch:
    """Evaluates the base rule on many pieces of many root triangles."""

    def __init__(self, h, P, spec):
        self.h = h
        self.P = P
        self.area = np.abs(signed_areas(P))
        self.rule, self.w = reference_rule(spec.points_per_axis)

    def rule_on(self, B: np.ndarray, owner: np.ndarray) -> np.ndarray:
        lam = np.einsum("qj,kjl->kql", self.rule, B)           # (k, q, 3)
        xy = np.einsum("kql,kld->kqd", lam, self.P[owner])     # (k, q, 2)
        idx = np.repeat(owner, self.rule.shape[0])
        vals = np.asarray(self.h(xy[..., 0].ravel(), xy[..., 1].ravel(), idx, lam.reshape(-1, 3)),
                          dtype=float).reshape(len(B), -1)
        frac = np.abs(np.linalg.det(B))                        # piece area / root area
        return (vals @ self.w) * frac * self.area[owner]


def integrate_batch(h, P, spec: QuadratureSpec = DEFAULT_SPEC, atol=None):
    """Adaptive integrals of ``h`` over many triangles at once.

    ``h(x, y, owner, bary)`` receives flat point arrays, the index of the
    root triangle of each point and the point's barycentric coordinates
    in that root triangle.  Returns ``(values, converged)``.

    Each piece carries the sum over its four children as value and the
    difference to its own rule value as error estimate.  Per root
    triangle, pieces are split until the summed error estimate is below
    ``max(rtol * |value|, atol)`` or they reach ``max_depth``.  ``atol``
    is an array or a function ``atol(values, slice)`` of the running totals.  At most
    ``max_active`` pieces are alive at once; beyond that only the pieces
    with the largest error estimates are split.
    """
    P = np.asarray(P, dtype=float).reshape(-1, 3, 2)
    n = len(P)
    values = np.zeros(n)
    converged = np.ones(n, dtype=bool)
    for start in range(0, n, spec.batch):
        sl = slice(start, min(n, start + spec.batch))
        if atol is None:
            tol = None
        elif callable(atol):
            tol = (lambda total, sl=sl: atol(total, sl))
        else:
            arr = np.broadcast_to(np.asarray(atol, dtype=float), (n,))[sl]
            tol = (lambda total, arr=arr: arr)
        v, c = _integrate_chunk(h, P[sl], spec, start, tol)
        values[sl], converged[sl] = v, c
    return values, converged


def _integrate_chunk(h, P, spec, offset, atol):
    n = len(P)
    shifted = (lambda x, y, idx, lam: h(x, y, idx + offset, lam)) if offset else h
    ev = _Batch(shifted, P, spec)
    B = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    owner = np.arange(n)
    depth = np.zeros(n, dtype=int)
    coarse = ev.rule_on(B, owner)

    def expand(B, owner, coarse):
        kids = _split(B)
        kid_owner = np.repeat(owner, 4)
        kid_val = ev.rule_on(kids, kid_owner)
        fine = kid_val.reshape(-1, 4).sum(axis=1)
        return kids, kid_owner, kid_val, fine, np.abs(fine - coarse)

    kids, kid_owner, kid_val, fine, err = expand(B, owner, coarse)
    frozen_val = np.zeros(n)
    frozen_err = np.zeros(n)
    while len(owner):
        total = np.bincount(owner, fine, n) + frozen_val
        budget = _budget(total, spec, atol)
        done = np.bincount(owner, err, n) + frozen_err <= budget
        count = np.bincount(owner, minlength=n)
        share = budget[owner] / (2.0 * count[owner])
        go = ~done[owner] & (err > share) & (depth < spec.max_depth)
        limit = spec.max_active // 4
        if go.sum() > limit:
            cand = np.nonzero(go)[0]
            keep = cand[np.argsort(-err[cand], kind="stable")[:limit]]
            go[:] = False
            go[keep] = True
        frozen_val += np.bincount(owner[~go], fine[~go], n)
        frozen_err += np.bincount(owner[~go], err[~go], n)
        sel = np.repeat(go, 4)
        B, owner, coarse = kids[sel], kid_owner[sel], kid_val[sel]
        depth = np.repeat(depth[go] + 1, 4)
        if len(owner):
            kids, kid_owner, kid_val, fine, err = expand(B, owner, coarse)
    return frozen_val, frozen_err <= _budget(frozen_val, spec, atol)


def _budget(total, spec, atol):
    b = spec.rtol * np.abs(total)
    return b if atol is None else np.maximum(b, atol(total))


def _warn_unconverged(what: str, estimate):
    warnings.warn(ToleranceNotReached(f"{what}: tolerance not reached at depth cap", estimate),
                  stacklevel=3)


def integrate_triangle(h: Callable, T, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Adaptive integral of ``h(x, y)`` over one triangle."""
    V = _as_array(T)
    vals, ok = integrate_batch(lambda x, y, idx, lam: h(x, y), V[None], spec)
    if not ok[0]:
        _warn_unconverged("integrate_triangle", float(vals[0]))
    return float(vals[0])


def _check_p(p):
    if not p > 0 or not math.isfinite(p):
        raise InvalidArgument(f"exponent p must be in (0, inf), got {p!r}")


def _error_integrand(g, P, p, weight):
    fv = np.asarray(g(P[..., 0], P[..., 1]), dtype=float)  # (n, 3) vertex values

    def h(x, y, idx, lam):
        e = np.abs(np.asarray(g(x, y), dtype=float) - np.einsum("kj,kj->k", lam, fv[idx]))
        out = e ** p
        if weight is not None:
            out = out * np.asarray(weight(x, y), dtype=float) ** p
        return out

    return h


def pth_powers(g: Callable, P, p: float, weight: Callable | None = None,
               spec: QuadratureSpec = DEFAULT_SPEC):
    """``d(g, T, L_{p,w})^p`` for every triangle of ``P`` (shape ``(n, 3, 2)``).

    Returns ``(values, converged)``.
    """
    _check_p(p)
    P = np.asarray(P, dtype=float).reshape(-1, 3, 2)
    if np.any(np.abs(signed_areas(P)) < MIN_AREA):
        raise DegenerateTriangle("error on a degenerate triangle")
    return integrate_batch(_error_integrand(g, P, p, weight), P, spec,
                           atol=_noise_floor(g, P, p, weight))


def _noise_floor(g, P, p, weight):
    """Absolute tolerance from rounding in ``e = g - interpolant``.

    With ``de`` the rounding level of ``e`` and ``M`` its typical size,
    the p-th power integral cannot be resolved below ``p de M^(p-1) |T|``.
    """
    area = np.abs(signed_areas(P))
    scale = np.abs(np.asarray(g(P[..., 0], P[..., 1]), dtype=float)).max(axis=1)
    if weight is not None:
        scale = scale * np.abs(np.asarray(weight(P[..., 0], P[..., 1]), dtype=float)).max(axis=1)
    de = 16.0 * np.finfo(float).eps * np.maximum(scale, np.finfo(float).tiny)

    def atol(total, sl):
        M = np.maximum((np.abs(total) / area[sl]) ** (1.0 / p), de[sl])
        return p * de[sl] * M ** (p - 1.0) * area[sl]

    return atol


def cell_error(g: Callable, T, p: float, weight: Callable | None = None,
               spec: QuadratureSpec = DEFAULT_SPEC) -> ErrorValue:
    """Weighted L_p norm over ``T`` of ``g`` minus its vertex interpolant.

    The integrand is ``|e|^p * w^p``.  ``weight=None`` means ``w = 1``.
    """
    V = _as_array(T)
    vals, ok = pth_powers(g, V[None], p, weight, spec)
    pp = max(float(vals[0]), 0.0)
    if not ok[0]:
        _warn_unconverged("cell_error", pp ** (1.0 / p))
    return ErrorValue(p, pp ** (1.0 / p), pp, bool(ok[0]))


def global_error(f: Callable, mesh: Triangulation, p: float, weight: Callable | None = None,
                 spec: QuadratureSpec = DEFAULT_SPEC, check: bool = True) -> ErrorValue:
    """Error of the continuous piecewise linear interpolant of ``f`` on ``mesh``.

    The p-th powers are summed triangle by triangle in mesh order with
    :func:`math.fsum`, so the result does not depend on chunking.
    """
    if check:
        _cheap_mesh_check(mesh)
    vals, ok = pth_powers(f, mesh.corners(), p, weight, spec)
    pp = math.fsum(vals.tolist())
    conv = bool(np.all(ok))
    if not conv:
        _warn_unconverged("global_error", pp ** (1.0 / p))
    return ErrorValue(p, pp ** (1.0 / p), pp, conv)


def _cheap_mesh_check(mesh: Triangulation):
    F = mesh.triangles
    if len(F) == 0:
        raise InvalidTriangulation("empty triangulation")
    if F.min() < 0 or F.max() >= len(mesh.vertices):
        raise InvalidTriangulation("triangle references a missing vertex")
    a = mesh.areas()
    if np.any(a < MIN_AREA):
        raise InvalidTriangulation("triangulation has degenerate triangles")
    if abs(a.sum() - mesh.domain.area) > 1e-9 * mesh.domain.area:
        raise InvalidTriangulation(f"triangles cover {a.sum()!r}, domain area {mesh.domain.area!r}")


def affine_transport_check(Q, T, F, p: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """Both sides of ``d(Q o F, F^-1 T) = d(Q, T) |det F~|^(-1/p)``.

    ``Q`` is any object callable on ``(x, y)`` (e.g. a quadratic form) and
    ``F`` any object with ``matrix`` and ``shift`` attributes.  Returns
    ``(lhs, rhs)`` computed by separate quadratures.
    """
    _check_p(p)
    M = np.asarray(F.matrix, dtype=float)
    c = np.asarray(F.shift, dtype=float)
    det = float(np.linalg.det(M))
    if abs(det) < 1e-14:
        raise InvalidArgument("affine map is singular")
    V = _as_array(T)
    pre = np.linalg.solve(M, (V - c).T).T

    def QF(u, v):
        x = M[0, 0] * u + M[0, 1] * v + c[0]
        y = M[1, 0] * u + M[1, 1] * v + c[1]
        return Q(x, y)

    lhs = cell_error(QF, pre, p, spec=spec).value
    rhs = cell_error(Q, V, p, spec=spec).value * abs(det) ** (-1.0 / p)
    return lhs, rhs


def taylor_bound_check(field, square, grid: int = 33):
    """Sampled ``sup |f - P2|`` on a square against ``2 h^2 omega(h)``.

    ``P2`` is the second degree Taylor polynomial at the square's centre.
    Returns ``(lhs, rhs)``.
    """
    from .fields import modulus_estimate

    x0, y0, x1, y1 = square
    h = x1 - x0
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    X, Y = np.meshgrid(np.linspace(x0, x1, grid), np.linspace(y0, y1, grid))
    f0 = float(field(cx, cy))
    gx, gy = (float(v) for v in field.gradient(cx, cy))
    fxx, fxy, fyy = (float(v) for v in field.second_derivatives(cx, cy))
    dx, dy = X - cx, Y - cy
    P2 = f0 + gx * dx + gy * dy + 0.5 * (fxx * dx * dx + 2 * fxy * dx * dy + fyy * dy * dy)
    lhs = float(np.max(np.abs(field(X, Y) - P2)))
    rhs = 2.0 * h * h * modulus_estimate(field, h)
    return lhs, rhs
