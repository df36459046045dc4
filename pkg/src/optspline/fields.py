"""Scalar fields on the unit square, weights, and the expression parser.

Fields carry second derivatives (analytic for the builtins, central
differences for parsed expressions).  Only fields whose Hessian
determinant stays positive on the unit square are admitted.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EvalError, InvalidArgument, NotAdmissible, ParseError, UnknownField
from .geometry import UNIT_SQUARE

FD_STEP = 1e-4


def _const_like(x, y, c):
    return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(c))


def _fd_second(f, h=FD_STEP):
    """Central second differences with one Richardson step (h and 2h)."""

    def xx(x, y, s):
        return (f(x + s, y) - 2 * f(x, y) + f(x - s, y)) / (s * s)

    def yy(x, y, s):
        return (f(x, y + s) - 2 * f(x, y) + f(x, y - s)) / (s * s)

    def xy(x, y, s):
        return (f(x + s, y + s) - f(x + s, y - s) - f(x - s, y + s) + f(x - s, y - s)) / (4 * s * s)

    def rich(g):
        def out(x, y):
            x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
            return (4.0 * g(x, y, h) - g(x, y, 2 * h)) / 3.0
        return out

    return rich(xx), rich(xy), rich(yy)


def _fd_gradient(f, h=1e-6):
    def grad(x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return ((f(x + h, y) - f(x - h, y)) / (2 * h), (f(x, y + h) - f(x, y - h)) / (2 * h))
    return grad


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A C^2 function on the unit square.

    ``fxx``, ``fxy`` and ``fyy`` default to finite differences when not
    given, as does ``grad``.
    """

    name: str
    f: Callable
    fxx: Callable | None = None
    fxy: Callable | None = None
    fyy: Callable | None = None
    grad: Callable | None = None
    analytic: bool = True

    def __post_init__(self):
        if self.fxx is None or self.fxy is None or self.fyy is None:
            xx, xy, yy = _fd_second(self.f)
            object.__setattr__(self, "fxx", xx)
            object.__setattr__(self, "fxy", xy)
            object.__setattr__(self, "fyy", yy)
            object.__setattr__(self, "analytic", False)
        if self.grad is None:
            object.__setattr__(self, "grad", _fd_gradient(self.f))

    def __call__(self, x, y):
        return self.f(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def gradient(self, x, y):
        return self.grad(x, y)

    def second_derivatives(self, x, y):
        return self.fxx(x, y), self.fxy(x, y), self.fyy(x, y)

    def hessian_det(self, x, y):
        """``H = f_xx f_yy - f_xy^2``."""
        a, b, c = self.second_derivatives(x, y)
        return a * c - b * b

    def scaled(self, c: float) -> "ScalarField":
        return ScalarField(f"{c}*{self.name}", lambda x, y: c * self.f(x, y),
                           lambda x, y: c * self.fxx(x, y), lambda x, y: c * self.fxy(x, y),
                           lambda x, y: c * self.fyy(x, y),
                           lambda x, y: tuple(c * g for g in self.grad(x, y)), self.analytic)


@dataclass(frozen=True, eq=False)
class WeightField:
    name: str
    w: Callable

    def __call__(self, x, y):
        return self.w(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def scaled(self, c: float) -> "WeightField":
        return WeightField(f"{c}*{self.name}", lambda x, y: c * self.w(x, y))


UNIT_WEIGHT = WeightField("1", lambda x, y: _const_like(x, y, 1.0))


def _grid(n, square=UNIT_SQUARE):
    x0, y0, x1, y1 = square
    X, Y = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n), indexing="ij")
    return X, Y


def _eval_grid(g, X, Y):
    with np.errstate(all="ignore"):
        v = np.broadcast_to(np.asarray(g(X, Y), dtype=float), X.shape)
    if not np.all(np.isfinite(v)):
        raise EvalError("field is not finite on the domain")
    return v


def check_weight(weight: WeightField, n: int = 64) -> WeightField:
    X, Y = _grid(n)
    v = _eval_grid(weight, X, Y)
    if np.any(v <= 0):
        raise NotAdmissible(f"weight {weight.name!r} is not positive on the domain")
    return weight


@dataclass(frozen=True)
class FieldBounds:
    """Grid estimates of ``min H`` and the sup-norms of the second derivatives."""

    C_plus: float
    fxx_sup: float
    fyy_sup: float
    fxy_sup: float
    sign: int  # sign of f_xx on the domain


def _bounds_on(field, n):
    X, Y = _grid(n)
    a = _eval_grid(field.fxx, X, Y)
    b = _eval_grid(field.fxy, X, Y)
    c = _eval_grid(field.fyy, X, Y)
    H = a * c - b * b
    return float(H.min()), float(np.abs(a).max()), float(np.abs(c).max()), float(np.abs(b).max()), a


def check_admissible(field: ScalarField, n: int = 64) -> int:
    """Raise :class:`NotAdmissible` unless ``H > 0`` on an ``n x n`` grid.

    Returns the sign of ``f_xx`` (+1 convex, -1 concave).
    """
    Hmin, _, _, _, a = _bounds_on(field, n)
    if not Hmin > 0:
        raise NotAdmissible(f"field {field.name!r} has Hessian determinant {Hmin:.6g} <= 0 "
                            "somewhere on the domain")
    if np.all(a > 0):
        return 1
    if np.all(a < 0):
        return -1
    raise NotAdmissible(f"f_xx of {field.name!r} changes sign on the domain")


def field_bounds(field: ScalarField) -> FieldBounds:
    """Bounds on a 256 x 256 grid, cross-checked against 128 x 128.

    A relative disagreement above 1% rejects the field as too rough.
    """
    sign = check_admissible(field)
    coarse = _bounds_on(field, 128)[:4]
    fine = _bounds_on(field, 256)[:4]
    floor = 1e-6 * max(abs(v) for v in fine)  # sup-norms that are zero up to noise
    for c, f in zip(coarse, fine):
        if abs(c - f) > 0.01 * max(abs(f), floor):
            raise NotAdmissible(f"field {field.name!r} is too rough for grid estimates")
    return FieldBounds(*fine, sign)


def modulus_estimate(field: ScalarField, delta: float, n: int = 64) -> float:
    """Sampled modulus of continuity of the second derivatives.

    Pairs are grid points ``P`` and ``P + (s dx, t dy)`` with offsets
    in ``{0, +-delta/2, +-delta}`` that stay in the unit square.
    """
    if not 0 < delta <= 1:
        raise InvalidArgument("delta must lie in (0, 1]")
    X, Y = _grid(n)
    X, Y = X.ravel(), Y.ravel()
    offs = np.array([-delta, -0.5 * delta, 0.0, 0.5 * delta, delta])
    best = 0.0
    for g in (field.fxx, field.fyy, field.fxy):
        g0 = _eval_grid(g, X, Y)
        for dx in offs:
            for dy in offs:
                if dx == 0 and dy == 0:
                    continue
                Xs, Ys = X + dx, Y + dy
                ok = (Xs >= 0) & (Xs <= 1) & (Ys >= 0) & (Ys <= 1)
                if not ok.any():
                    continue
                g1 = _eval_grid(g, Xs[ok], Ys[ok])
                best = max(best, float(np.abs(g1 - g0[ok]).max()))
    return best


@dataclass(frozen=True)
class ModulusEstimate:
    deltas: tuple
    values: tuple
    grid: int = 64

    def __call__(self, delta: float) -> float:
        # smallest tabulated delta >= requested one
        for d, v in zip(self.deltas, self.values):
            if d >= delta:
                return v
        return self.values[-1]


def modulus_table(field: ScalarField, deltas, n: int = 64) -> ModulusEstimate:
    """``omega`` on a set of deltas, made nondecreasing by a running max."""
    ds = sorted(float(d) for d in deltas)
    vals = np.maximum.accumulate([modulus_estimate(field, d, n) for d in ds])
    return ModulusEstimate(tuple(ds), tuple(float(v) for v in vals), n)


def directional_floor(field: ScalarField) -> float:
    """``D+ = (C+/2) min(1/||f_xx||, 1/||f_yy||)``."""
    b = field_bounds(field)
    return 0.5 * b.C_plus * min(1.0 / b.fxx_sup, 1.0 / b.fyy_sup)


def theoretical_limit(field: ScalarField, weight: WeightField | None, p: float, spec=None) -> float:
    """``(C_p^+/2) (int_D H^(p/(2p+2)) w^(p/(p+1)))^((p+1)/p)``."""
    from .constants import cp_closed
    from .norms import QuadratureSpec, integrate_batch, _warn_unconverged

    if not p > 0:
        raise InvalidArgument("p must be positive")
    check_admissible(field)
    weight = weight or UNIT_WEIGHT
    a = p / (2 * p + 2)
    b = p / (p + 1)

    def h(x, y, idx, lam):
        with np.errstate(invalid="ignore"):
            H = np.maximum(np.asarray(field.hessian_det(x, y), dtype=float), 0.0)
            return H ** a * np.asarray(weight(x, y), dtype=float) ** b

    P = np.array([[[0, 0], [1, 0], [1, 1]], [[0, 0], [1, 1], [0, 1]]], dtype=float)
    spec = spec or QuadratureSpec(max_depth=6, rtol=1e-10 if field.analytic else 1e-7)
    vals, ok = integrate_batch(h, P, spec)
    I = math.fsum(vals.tolist())
    out = 0.5 * cp_closed(p) * I ** (1.0 / b)
    if not np.all(ok):
        _warn_unconverged("theoretical_limit", out)
    return out


# builtins -----------------------------------------------------------------

def _zero(x, y):
    return _const_like(x, y, 0.0)


def paraboloid() -> ScalarField:
    return quadratic(1.0, 1.0, 0.0, name="paraboloid")


def quadratic(A: float, B: float, C: float, name: str | None = None) -> ScalarField:
    """``A x^2 + B y^2 + 2 C x y``, Hessian determinant ``4(AB - C^2)``."""
    A, B, C = float(A), float(B), float(C)
    return ScalarField(
        name or f"quadratic({A!r},{B!r},{C!r})",
        lambda x, y: A * x * x + B * y * y + 2 * C * x * y,
        lambda x, y: _const_like(x, y, 2 * A),
        lambda x, y: _const_like(x, y, 2 * C),
        lambda x, y: _const_like(x, y, 2 * B),
        lambda x, y: (2 * A * x + 2 * C * y, 2 * B * y + 2 * C * x),
    )


def cosh_sum() -> ScalarField:
    return ScalarField(
        "cosh_sum",
        lambda x, y: np.cosh(x) + np.cosh(y),
        lambda x, y: np.cosh(x) + 0.0 * y,
        _zero,
        lambda x, y: np.cosh(y) + 0.0 * x,
        lambda x, y: (np.sinh(x) + 0.0 * y, np.sinh(y) + 0.0 * x),
    )


def exp_product() -> ScalarField:
    """``e^(x+y) + x^2 + y^2``."""
    return ScalarField(
        "exp_product",
        lambda x, y: np.exp(x + y) + x * x + y * y,
        lambda x, y: np.exp(x + y) + 2.0,
        lambda x, y: np.exp(x + y),
        lambda x, y: np.exp(x + y) + 2.0,
        lambda x, y: (np.exp(x + y) + 2 * x, np.exp(x + y) + 2 * y),
    )


_QUAD_RE = re.compile(r"^quadratic\(\s*([^,()]+)\s*,\s*([^,()]+)\s*,\s*([^,()]+)\s*\)$")


def builtin_field(name: str) -> ScalarField:
    """``paraboloid``, ``quadratic(A,B,C)``, ``cosh_sum`` or ``exp_product``."""
    name = name.strip()
    simple = {"paraboloid": paraboloid, "cosh_sum": cosh_sum, "exp_product": exp_product}
    if name in simple:
        field = simple[name]()
    else:
        m = _QUAD_RE.match(name)
        if not m:
            raise UnknownField(f"unknown builtin field {name!r}")
        try:
            A, B, C = (float(g) for g in m.groups())
        except ValueError:
            raise InvalidArgument(f"bad coefficients in {name!r}") from None
        field = quadratic(A, B, C)
    check_admissible(field)
    return field


# expression parser --------------------------------------------------------

_FUNCS = {"sin": np.sin, "cos": np.cos, "cosh": np.cosh, "sinh": np.sinh,
          "exp": np.exp, "log": np.log, "sqrt": np.sqrt}
_CONSTS = {"pi": math.pi, "e": math.e}
_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\S))")


def _tokenize(src):
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:  # only trailing whitespace left
            break
        num, ident, op = m.groups()
        start = m.start(m.lastindex)
        if num is not None:
            toks.append(("num", float(num), start))
        elif ident is not None:
            toks.append(("id", ident, start))
        else:
            if op not in "+-*/^()":
                raise ParseError(f"unexpected character {op!r}", start)
            toks.append(("op", op, start))
        pos = m.end()
    toks.append(("end", None, len(src)))
    return toks


class _Parser:
    """Recursive descent; ``^`` is right-associative and binds tighter than unary minus."""

    def __init__(self, src):
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op):
        t = self.take()
        if t[:2] != ("op", op):
            raise ParseError(f"expected {op!r}", t[2])

    def parse(self):
        node = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected token {t[1]!r}", t[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = (op, node, self.unary())
        return node

    def unary(self):
        t = self.peek()
        if t[:2] == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if t[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return ("^", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return ("num", val)
        if kind == "id":
            if val in ("x", "y"):
                return ("var", val)
            if val in _CONSTS:
                return ("num", _CONSTS[val])
            if val in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", val, arg)
            raise ParseError(f"unknown name {val!r}", pos)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected token {val!r}", pos)


def _evaluate(node, x, y):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return x if node[1] == "x" else y
    if tag == "neg":
        return -_evaluate(node[1], x, y)
    if tag == "call":
        return _FUNCS[node[1]](_evaluate(node[2], x, y))
    a, b = _evaluate(node[1], x, y), _evaluate(node[2], x, y)
    if tag == "+":
        return a + b
    if tag == "-":
        return a - b
    if tag == "*":
        return a * b
    if tag == "/":
        return a / b
    return np.power(a, b)


def compile_expression(src: str) -> Callable:
    """Parse ``src`` into a vectorized ``g(x, y)`` without admissibility checks."""
    tree = _Parser(src).parse()

    def g(x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            v = np.asarray(_evaluate(tree, x, y), dtype=float)
        if not np.all(np.isfinite(v)):
            raise EvalError(f"expression {src!r} is not finite at some evaluation point")
        return np.broadcast_to(v, np.broadcast(x, y).shape) if v.ndim == 0 else v

    return g


def parse_expression(src: str, check: bool = True) -> ScalarField:
    """Field from an expression in ``x`` and ``y``, second derivatives by differences."""
    field = ScalarField(src, compile_expression(src))
    if check:
        check_admissible(field)
    return field


def parse_field(spec: str) -> ScalarField:
    """``builtin:NAME`` or ``expr:SOURCE``."""
    if spec.startswith("builtin:"):
        return builtin_field(spec[len("builtin:"):])
    if spec.startswith("expr:"):
        return parse_expression(spec[len("expr:"):])
    raise InvalidArgument(f"field spec must start with 'builtin:' or 'expr:', got {spec!r}")


def parse_weight(spec: str | None) -> WeightField:
    if spec is None or spec == "expr:1":
        return UNIT_WEIGHT
    if not spec.startswith("expr:"):
        raise InvalidArgument(f"weight spec must start with 'expr:', got {spec!r}")
    src = spec[len("expr:"):]
    return check_weight(WeightField(src, compile_expression(src)))
