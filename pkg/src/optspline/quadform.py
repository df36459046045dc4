"""Positive definite quadratic forms ``Q = A x^2 + B y^2 + 2 C x y``.

An affine change of variables ``F`` turns ``Q`` into ``u^2 + v^2``, so the
optimal triangle for ``Q`` is the image under ``F`` of an equilateral one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import cp_closed
from .errors import InvalidArgument, NotPositiveDefinite
from .geometry import Triangle, make_equilateral, triangle_metrics


@dataclass(frozen=True)
class QuadraticForm:
    A: float
    B: float
    C: float

    def __call__(self, x, y):
        x, y = np.asarray(x), np.asarray(y)
        return self.A * x * x + self.B * y * y + 2.0 * self.C * x * y

    @property
    def det(self) -> float:
        """``AB - C^2``."""
        return self.A * self.B - self.C * self.C

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.A, self.C], [self.C, self.B]], dtype=float)

    def is_positive_definite(self) -> bool:
        return self.A > 0 and self.det > 0

    def scaled(self, c: float) -> "QuadraticForm":
        return QuadraticForm(c * self.A, c * self.B, c * self.C)


PARABOLOID = QuadraticForm(1.0, 1.0, 0.0)


@dataclass(frozen=True)
class EigenData:
    lam_min: float
    lam_max: float
    xi: tuple  # unit eigenvector for lam_max

    @property
    def xi_min(self) -> tuple:
        return (-self.xi[1], self.xi[0])


def _require_pd(Q: QuadraticForm):
    vals = (Q.A, Q.B, Q.C)
    if not all(math.isfinite(v) for v in vals):
        raise NotPositiveDefinite("form has non-finite coefficients")
    if not Q.is_positive_definite():
        raise NotPositiveDefinite(f"form {vals} is not positive definite (A={Q.A}, AB-C^2={Q.det})")


def eigen_decompose(Q: QuadraticForm) -> EigenData:
    """Closed-form eigenvalues and the unit eigenvector of ``lam_max``.

    When the eigenvalues coincide the eigenvector is ``(1, 0)``.
    """
    _require_pd(Q)
    half = 0.5 * (Q.A + Q.B)
    disc = math.hypot(0.5 * (Q.A - Q.B), Q.C)
    lam_max = half + disc
    lam_min = Q.det / lam_max  # avoids cancellation in half - disc
    if disc <= 1e-15 * lam_max:
        return EigenData(lam_min, lam_max, (1.0, 0.0))
    # rows of (Q - lam_max I); use the one with larger norm
    r1 = (Q.A - lam_max, Q.C)
    r2 = (Q.C, Q.B - lam_max)
    r = r1 if math.hypot(*r1) >= math.hypot(*r2) else r2
    v = np.array([-r[1], r[0]])
    v /= np.linalg.norm(v)
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return EigenData(lam_min, lam_max, (float(v[0]), float(v[1])))


@dataclass(frozen=True)
class AffineMap:
    """``x -> matrix @ x + shift``."""

    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float).reshape(2, 2))
        object.__setattr__(self, "shift", np.asarray(self.shift, dtype=float).reshape(2))
        if abs(self.det) < 1e-300:
            raise InvalidArgument("affine map is singular")

    @classmethod
    def linear(cls, M) -> "AffineMap":
        return cls(M, np.zeros(2))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return pts @ self.matrix.T + self.shift

    def compose(self, other: "AffineMap") -> "AffineMap":
        """``self o other``."""
        return AffineMap(self.matrix @ other.matrix, self.matrix @ other.shift + self.shift)

    def inverse(self) -> "AffineMap":
        Mi = np.linalg.inv(self.matrix)
        return AffineMap(Mi, -Mi @ self.shift)

    def apply_triangle(self, T: Triangle) -> Triangle:
        return Triangle.from_array(self(T.vertices))


def canonical_map(Q: QuadraticForm) -> AffineMap:
    """``F = F1 o F2`` with ``Q(F(u, v)) = u^2 + v^2``.

    ``F2`` scales the axes by ``lam_max^-1/2`` and ``lam_min^-1/2`` and
    ``F1`` rotates them onto the eigenvectors.
    """
    e = eigen_decompose(Q)
    x1, x2 = e.xi
    F1 = AffineMap.linear([[x1, -x2], [x2, x1]])
    F2 = AffineMap.linear([[1.0 / math.sqrt(e.lam_max), 0.0], [0.0, 1.0 / math.sqrt(e.lam_min)]])
    return F1.compose(F2)


def optimal_triangle(Q: QuadraticForm, area: float = 1.0, orientation: float = 0.0,
                     center=(0.0, 0.0)) -> Triangle:
    """Image under the canonical map of an equilateral triangle, with given area."""
    if not (area > 0 and math.isfinite(area)):
        raise InvalidArgument(f"area must be positive, got {area!r}")
    F = canonical_map(Q)
    # |F(T)| = |det F| |T|
    T0 = make_equilateral((0.0, 0.0), area / abs(F.det), orientation)
    V = F(T0.vertices) + np.asarray(center, dtype=float)
    return Triangle.from_array(V).ccw()


def lower_bound(Q: QuadraticForm, T, p: float, spec=None):
    """``(C_p^+ |T|^(1+1/p) sqrt(AB - C^2), d(Q, T, L_p))``."""
    from .norms import DEFAULT_SPEC, _as_array, cell_error

    _require_pd(Q)
    V = _as_array(T)
    area = triangle_metrics(V).area
    bound = cp_closed(p) * area ** (1.0 + 1.0 / p) * math.sqrt(Q.det)
    actual = cell_error(Q, V, p, spec=spec or DEFAULT_SPEC).value
    return bound, actual


def lambda_min_floor(A_plus: float, B_plus: float, C_plus: float) -> float:
    """Floor on ``lam_min`` over a box of forms.

    For every form with ``0 < A <= A_plus``, ``0 < B <= B_plus`` and
    ``AB - C^2 >= C_plus``,
    ``lam_min >= (A+ + B+)/2 - sqrt(((A+ + B+)/2)^2 - C+)``.
    """
    if not (A_plus > 0 and B_plus > 0 and 0 < C_plus <= A_plus * B_plus):
        raise InvalidArgument("need A+, B+ > 0 and 0 < C+ <= A+ B+")
    h = 0.5 * (A_plus + B_plus)
    # same value as h - sqrt(h^2 - C+) without cancellation
    return C_plus / (h + math.sqrt(max(h * h - C_plus, 0.0)))


def aspect_ratio_bound_check(Q: QuadraticForm):
    """``(diam(optimal_triangle(Q, 1)), bound)``.

    The bound is the diameter of the unit-area equilateral triangle times
    ``sqrt(lam_max / lam_min)``.
    """
    e = eigen_decompose(Q)
    ratio = triangle_metrics(optimal_triangle(Q, 1.0)).diameter
    bound = 2.0 / 3.0 ** 0.25 * math.sqrt(e.lam_max / e.lam_min)
    return ratio, bound
