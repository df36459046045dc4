"""The optimal constant for x^2 + y^2 and the angle-parameterized error.

For a triangle with angles ``A, B, C`` and circumradius ``R`` the error
integral of the circular paraboloid splits into three isosceles sectors
``m(A) + m(B) + m(C)`` with apex at the circumcentre.  All quantities
here are built from the one-dimensional function ``l(A)``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import InvalidArgument, ToleranceNotReached

_QUAD = dict(epsabs=0.0, epsrel=1e-13, limit=400)


def _check_p(p):
    if not (p > 0 and math.isfinite(p)):
        raise InvalidArgument(f"p must be a positive finite number, got {p!r}")


def gamma_p(p: float) -> float:
    """``gamma(p) = B(p + 1, 1/2) / 2`` computed through log-Gamma."""
    _check_p(p)
    return 0.5 * math.exp(special.betaln(p + 1.0, 0.5))


def incomplete_beta(x: float, a: float, b: float) -> float:
    """Non-regularized incomplete Beta function ``B(x; a, b)``."""
    if not (0.0 <= x <= 1.0):
        raise InvalidArgument(f"x must lie in [0, 1], got {x!r}")
    if not (a > 0 and b > 0):
        raise InvalidArgument("a and b must be positive")
    return float(special.betainc(a, b, x) * special.beta(a, b))


@lru_cache(maxsize=65536)
def _l_acute(A: float, p: float) -> float:
    c = math.cos(A)
    if c >= 1.0:
        return 0.0
    if c <= 0.0:
        return math.pi / (4.0 * p + 4.0) if c == 0.0 else None
    # the sqrt-type kink at x = c gets narrow as c -> 0; breakpoints help QUADPACK find it
    pts = [k * c for k in (2.0, 8.0, 32.0, 128.0) if k * c <= 0.5] or None
    with warnings.catch_warnings():
        # epsrel sits at the rounding floor, so QUADPACK often reports it as unreachable
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda x: x * (1.0 - x * x) ** p * math.acos(min(c / x, 1.0)),
                                c, 1.0, points=pts, **_QUAD)
    return val


def l_of_A(A: float, p: float) -> float:
    """``l(A) = int_{cos A}^1 x (1 - x^2)^p arccos(cos A / x) dx``.

    For ``A > pi/2`` the integrand is taken over the part of the disc cap
    where it is defined, which gives ``l(A) = pi/(2p+2) - l(pi - A)``.
    This keeps ``l' = gamma(p) sin^(2p+2)`` valid on all of ``[0, pi]``.
    """
    _check_p(p)
    A = float(A)
    if not (0.0 <= A <= math.pi):
        raise InvalidArgument(f"angle must lie in [0, pi], got {A!r}")
    if A <= 0.5 * math.pi:
        return _l_acute(A, float(p))
    return math.pi / (2.0 * p + 2.0) - _l_acute(math.pi - A, float(p))


def m_sector(angle: float, R: float, p: float) -> float:
    """Signed sector integral ``2 R^(2p+2) (angle/(2p+2) - l(angle))``.

    For an obtuse angle this equals ``-m(pi - angle)``.
    """
    if not (0.0 < angle < math.pi):
        raise InvalidArgument(f"sector angle must lie in (0, pi), got {angle!r}")
    if not R > 0:
        raise InvalidArgument("circumradius must be positive")
    return 2.0 * R ** (2 * p + 2) * (angle / (2 * p + 2) - l_of_A(angle, p))


def _angles(A, B):
    A, B = float(A), float(B)
    C = math.pi - A - B
    if not (A > 0 and B > 0 and C > 0):
        raise InvalidArgument(f"angles ({A!r}, {B!r}) do not form a triangle")
    return A, B, C


def _d_pth(A, B, C, p):
    s = math.sin(2 * A) + math.sin(2 * B) + math.sin(2 * C)
    R = math.sqrt(2.0 / s)
    return sum(m_sector(t, R, p) for t in (A, B, C))


def d_unit_area(A: float, B: float, p: float) -> float:
    """``d(x^2 + y^2, T, L_p)`` for the unit-area triangle with angles A, B."""
    _check_p(p)
    A, B, C = _angles(A, B)
    return max(_d_pth(A, B, C, p), 0.0) ** (1.0 / p)


def z_objective(A: float, B: float, p: float) -> float:
    """``[pi/(2p+2) - l(A) - l(B) - l(C)] / (sin 2A + sin 2B + sin 2C)^(p+1)``."""
    _check_p(p)
    A, B, C = _angles(A, B)
    if max(A, B, C) >= 0.5 * math.pi:
        raise InvalidArgument("z_objective needs an acute triangle")
    s = math.sin(2 * A) + math.sin(2 * B) + math.sin(2 * C)
    num = math.pi / (2 * p + 2) - l_of_A(A, p) - l_of_A(B, p) - l_of_A(C, p)
    return num / s ** (p + 1)


@dataclass(frozen=True)
class CpValue:
    p: float
    value_arccos_form: float
    value_beta_form: float
    value_quadrature: float

    @property
    def value(self) -> float:
        return self.value_beta_form

    def max_rel_diff(self) -> float:
        v = (self.value_arccos_form, self.value_beta_form, self.value_quadrature)
        return max(abs(a - b) / abs(b) for a in v for b in v)

    def to_dict(self) -> dict:
        return {"p": self.p, "value": self.value, "arccos_form": self.value_arccos_form,
                "beta_form": self.value_beta_form, "quadrature": self.value_quadrature}


def _scale(p):
    return (4.0 / (3.0 * math.sqrt(3.0))) ** (1.0 + 1.0 / p)


@lru_cache(maxsize=None)
def cp_closed(p: float) -> float:
    """C_p^+ from the incomplete Beta closed form (cheap, no 2D quadrature)."""
    _check_p(p)
    inner = math.pi / (p + 1) - 1.5 * math.exp(special.betaln(p + 1, 0.5)) * \
        incomplete_beta(0.75, p + 1.5, 0.5)
    return _scale(p) * inner ** (1.0 / p)


@lru_cache(maxsize=None)
def c_p_plus(p: float) -> CpValue:
    """C_p^+ computed three ways."""
    from .norms import integrate_triangle

    _check_p(p)
    p = float(p)
    arc = _scale(p) * (math.pi / (p + 1) - 6.0 * l_of_A(math.pi / 3, p)) ** (1.0 / p)
    beta = cp_closed(p)
    T0 = [(math.cos(t), math.sin(t)) for t in (7 * math.pi / 6, 11 * math.pi / 6, math.pi / 2)]
    with np.errstate(invalid="ignore"):
        I = integrate_triangle(lambda x, y: np.maximum(1.0 - x * x - y * y, 0.0) ** p, T0)
    quad = _scale(p) * I ** (1.0 / p)
    out = CpValue(p, arc, beta, quad)
    if out.max_rel_diff() > 1e-6:
        raise ToleranceNotReached(f"C_p routes disagree for p={p}", beta)
    return out


def appendix_profile(kind: str, A: float, p: float) -> float:
    """One-parameter profiles for right and isosceles triangles.

    ``"L"``: right triangles, ``A`` in (0, pi/2).
    ``"S"``: acute isosceles with base angles ``A`` in [pi/4, pi/2).
    ``"S_tilde"``: obtuse isosceles with base angles ``A`` in (0, pi/4].
    """
    _check_p(p)
    A = float(A)
    if kind == "L":
        if not 0 < A < 0.5 * math.pi:
            raise InvalidArgument("L needs A in (0, pi/2)")
        num = math.pi / (4 * p + 4) - l_of_A(A, p) - l_of_A(0.5 * math.pi - A, p)
        return num / math.sin(2 * A) ** (p + 1)
    den = (2 * math.sin(2 * A) - math.sin(4 * A)) ** (p + 1)
    if kind == "S":
        if not 0.25 * math.pi <= A < 0.5 * math.pi:
            raise InvalidArgument("S needs A in [pi/4, pi/2)")
        return (math.pi / (2 * p + 2) - 2 * l_of_A(A, p) - l_of_A(math.pi - 2 * A, p)) / den
    if kind == "S_tilde":
        if not 0 < A <= 0.25 * math.pi:
            raise InvalidArgument("S_tilde needs A in (0, pi/4]")
        return (l_of_A(2 * A, p) - 2 * l_of_A(A, p)) / den
    raise InvalidArgument(f"unknown profile {kind!r}")


def q_at_quarter(p: float) -> float:
    """``gamma(p)(1 - 2^(-p-1)) - (p+1)[pi/(4p+4) - 2 l(pi/4)]``, expected <= 0."""
    return gamma_p(p) * (1 - 2.0 ** (-p - 1)) - (p + 1) * (
        math.pi / (4 * p + 4) - 2 * l_of_A(0.25 * math.pi, p))


def z_polynomial(kind: str, t, p: float):
    t = np.asarray(t, dtype=float)
    if kind == "prop1":
        return (p * t ** (2 * p + 6) - 2 * t ** (2 * p + 4) - (p + 2) * t ** (2 * p + 2)
                + (p + 2) * t ** 4 + 2 * t ** 2 - p)
    if kind == "prop2":
        return (-(2 * p + 1) * t ** (2 * p + 4) + 2 * (p + 2) * t ** (2 * p + 2)
                + (p + 1) * t ** 4 - (3 * p + 4) * t ** 2 + 2 * p)
    raise InvalidArgument(f"unknown kind {kind!r}")


@dataclass(frozen=True)
class SignScanResult:
    kind: str
    p: float
    grid: int
    max_value: float
    sign_changes: list = field(default_factory=list)


def z_sign_scan(kind: str, p: float, grid: int = 10_000, zero_tol: float = 1e-12) -> SignScanResult:
    """Scan z(t) on [0, 1] (prop1) or [0, 2] (prop2).

    Samples with ``|z| <= zero_tol`` count as zeros and do not break a run
    of equal signs, so a tangential zero is not reported as a change.
    """
    if not 0 < p < 1:
        raise InvalidArgument("the sign scans are stated for p in (0, 1)")
    if grid < 1000:
        raise InvalidArgument("grid must have at least 1000 points")
    t = np.linspace(0.0, 1.0 if kind == "prop1" else 2.0, grid)
    z = z_polynomial(kind, t, p)
    changes = []
    last_sign, last_t = 0, None
    for ti, zi in zip(t, z):
        s = 0 if abs(zi) <= zero_tol else (1 if zi > 0 else -1)
        if s == 0:
            continue
        if last_sign and s != last_sign:
            changes.append((float(last_t), float(ti)))
        last_sign, last_t = s, ti
    return SignScanResult(kind, p, grid, float(z.max()), changes)


@dataclass
class ShapeScanResult:
    p: float
    grid: int
    A: float
    B: float
    value: float
    table: np.ndarray | None = None

    @property
    def C(self) -> float:
        return math.pi - self.A - self.B

    def write_csv(self, path):
        if self.table is None:
            raise InvalidArgument("scan was run without keep_table")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["A", "B", "d_value"])
            for a, b, d in self.table:
                w.writerow([repr(float(a)), repr(float(b)), repr(float(d))])

    def to_dict(self) -> dict:
        return {"p": self.p, "grid": self.grid, "A": self.A, "B": self.B, "C": self.C,
                "d_value": self.value}


def _scan(As, Bs, p, delta):
    A, B = np.meshgrid(As, Bs, indexing="ij")
    A, B = A.ravel(), B.ravel()
    C = math.pi - A - B
    ok = (A > delta) & (B > delta) & (C > delta)
    A, B, C = A[ok], B[ok], C[ok]
    key = np.round(np.concatenate([A, B, C]), 13)
    uniq, inv = np.unique(key, return_inverse=True)
    lv = np.array([l_of_A(float(a), p) for a in uniq])
    la, lb, lc = np.split(lv[inv], 3)
    s = np.sin(2 * A) + np.sin(2 * B) + np.sin(2 * C)
    dp = 2.0 ** (p + 2) * (math.pi / (2 * p + 2) - la - lb - lc) / s ** (p + 1)
    return A, B, np.maximum(dp, 0.0) ** (1.0 / p)


def _argmin(A, B, d):
    # smallest value, ties broken by smallest A then smallest B
    order = np.lexsort((B, A, d))
    return order[0]


def optimize_shape(p: float, grid: int = 400, delta: float = 0.01,
                   keep_table: bool = False) -> ShapeScanResult:
    """Brute-force minimum of ``d_unit_area`` over the angle simplex.

    A coarse ``grid x grid`` scan is followed by a pass at ten times the
    resolution in a window of two coarse steps around the coarse argmin.
    """
    _check_p(p)
    if grid < 4:
        raise InvalidArgument("grid too small")
    axis = np.linspace(delta, math.pi - 2 * delta, grid)
    A, B, d = _scan(axis, axis, p, delta)
    i = _argmin(A, B, d)
    table = np.column_stack([A, B, d]) if keep_table else None
    h = axis[1] - axis[0]
    fine = np.linspace(-2 * h, 2 * h, 41)
    A2, B2, d2 = _scan(A[i] + fine, B[i] + fine, p, delta)
    j = _argmin(A2, B2, d2)
    if d2[j] <= d[i]:
        a, b, v = A2[j], B2[j], d2[j]
    else:
        a, b, v = A[i], B[i], d[i]
    return ShapeScanResult(float(p), grid, float(a), float(b), float(v), table)
