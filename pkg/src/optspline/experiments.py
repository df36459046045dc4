"""Convergence studies of N times the interpolation error.

For each requested N an adaptive mesh and a uniform baseline are built,
their global errors measured, and the product with the triangle count
compared against the asymptotic limit.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .constants import cp_closed
from .errors import OptSplineError, ToleranceNotReached
from .fields import ScalarField, WeightField, UNIT_WEIGHT, check_admissible, theoretical_limit
from .geometry import validate_triangulation
from .meshgen import DEFAULT_EPSILON, build_mesh, uniform_mesh
from .norms import DEFAULT_SPEC, QuadratureSpec, global_error

DEFAULT_NS = (250, 500, 1000, 2000, 4000, 8000)
CSV_COLUMNS = ("N_requested", "N_actual", "epsilon", "error", "N_times_error", "limit", "ratio")


@dataclass
class ConvergenceRow:
    N_requested: int
    N_actual: int | None
    epsilon: float
    error: float | None
    N_times_error: float | None
    limit: float
    ratio: float | None
    uniform_N: int | None = None
    uniform_error: float | None = None
    uniform_N_times_error: float | None = None
    lower_bound: float | None = None  # certified, constant-Hessian fields only
    valid_mesh: bool | None = None
    converged: bool | None = None
    failure: str | None = None


@dataclass
class ConvergenceReport:
    field: str
    weight: str
    p: float
    quadrature: dict
    rows: list = field(default_factory=list)

    def determinism_hash(self) -> str:
        body = json.dumps([asdict(r) for r in self.rows], sort_keys=True)
        head = json.dumps([self.field, self.weight, self.p, self.quadrature], sort_keys=True)
        return hashlib.sha256((head + body).encode()).hexdigest()

    def to_dict(self) -> dict:
        return {"field": self.field, "weight": self.weight, "p": self.p,
                "quadrature": self.quadrature, "hash": self.determinism_hash(),
                "rows": [asdict(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceReport":
        rows = [ConvergenceRow(**r) for r in d["rows"]]
        return cls(d["field"], d["weight"], d["p"], d["quadrature"], rows)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


def _constant_hessian(field: ScalarField):
    """Frozen ``(A, B, C)`` when the second derivatives are constant, else None."""
    if not field.analytic:
        return None
    t = np.linspace(0.0, 1.0, 9)
    X, Y = np.meshgrid(t, t)
    vals = []
    for g in field.second_derivatives(X, Y):
        g = np.broadcast_to(np.asarray(g, dtype=float), X.shape)
        if np.ptp(g) > 1e-12 * max(1.0, float(np.abs(g).max())):
            return None
        vals.append(float(g.flat[0]))
    fxx, fxy, fyy = vals
    s = 1.0 if fxx > 0 else -1.0
    return 0.5 * s * fxx, 0.5 * s * fyy, 0.5 * s * fxy


def certified_lower_bound(field: ScalarField, mesh, p: float):
    """``(sum_i (C_p^+ |T_i|^(1+1/p) sqrt(AB - C^2))^p)^(1/p)`` or None.

    Valid only for fields with constant Hessian, where each triangle's
    error equals that of the quadratic part.
    """
    abc = _constant_hessian(field)
    if abc is None:
        return None
    A, B, C = abc
    area = mesh.areas()
    b = cp_closed(p) * area ** (1.0 + 1.0 / p) * math.sqrt(A * B - C * C)
    return math.fsum((b ** p).tolist()) ** (1.0 / p)


def convergence_study(field: ScalarField, weight: WeightField | None, p: float, Ns=DEFAULT_NS,
                      epsilon: float = DEFAULT_EPSILON, spec: QuadratureSpec = DEFAULT_SPEC,
                      baseline: bool = True, validate: bool = True) -> ConvergenceReport:
    """Adaptive vs uniform meshes over a list of target sizes.

    A row whose construction fails keeps the failure message and the
    study moves on.
    """
    check_admissible(field)
    Ns = list(Ns)
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise OptSplineError("N list must be strictly increasing")
    weight = weight or UNIT_WEIGHT
    w_arg = None if weight is UNIT_WEIGHT else weight
    limit = theoretical_limit(field, weight, p)
    report = ConvergenceReport(field.name, weight.name, float(p),
                               {"points_per_axis": spec.points_per_axis,
                                "max_depth": spec.max_depth, "rtol": spec.rtol})
    for N in Ns:
        row = ConvergenceRow(int(N), None, float(epsilon), None, None, limit, None)
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", ToleranceNotReached)
                mesh = build_mesh(field, w_arg, p, N, epsilon)
                if validate:
                    row.valid_mesh = validate_triangulation(mesh).n_violations == 0
                err = global_error(field, mesh, p, w_arg, spec)
                row.N_actual = len(mesh)
                row.error = err.value
                row.N_times_error = len(mesh) * err.value
                row.ratio = row.N_times_error / limit
                row.converged = err.converged
                if w_arg is None:
                    row.lower_bound = certified_lower_bound(field, mesh, p)
                if baseline:
                    um = uniform_mesh(N)
                    ue = global_error(field, um, p, w_arg, spec)
                    row.uniform_N = len(um)
                    row.uniform_error = ue.value
                    row.uniform_N_times_error = len(um) * ue.value
            if caught:
                row.converged = False
        except OptSplineError as exc:
            row.failure = f"{type(exc).__name__}: {exc}"
        report.rows.append(row)
    return report


def _fmt(v):
    return "" if v is None else repr(v)


def report_write(report: ConvergenceReport, fmt: str = "csv") -> bytes:
    """Serialize a report; identical reports give identical bytes."""
    if fmt == "json":
        return (json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n").encode()
    if fmt != "csv":
        raise OptSplineError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue().encode()


def report_read(data: bytes) -> ConvergenceReport:
    return ConvergenceReport.from_dict(json.loads(data.decode()))


def appendix_check(p: float, n: int = 200, scan_grid: int = 10_000) -> dict:
    """Grid checks of the one-parameter profiles and the z(t) sign scans."""
    from .constants import appendix_profile, q_at_quarter, z_sign_scan

    quarter = math.pi / 4
    a_l = np.linspace(quarter / n, quarter, n)
    L = [appendix_profile("L", a, p) for a in a_l]
    St = [appendix_profile("S_tilde", a, p) for a in a_l]
    a_s = np.linspace(quarter, 0.5 * math.pi, n, endpoint=False)
    S = [appendix_profile("S", a, p) for a in a_s]
    step = a_s[1] - a_s[0]
    out = {
        "p": p,
        "L_nonincreasing": bool(np.all(np.diff(L) <= 1e-13 * np.abs(L[:-1]))),
        "S_tilde_nonincreasing": bool(np.all(np.diff(St) <= 1e-13 * np.abs(St[:-1]))),
        "S_argmin": float(a_s[int(np.argmin(S))]),
        "S_argmin_near_pi_3": bool(abs(a_s[int(np.argmin(S))] - math.pi / 3) <= step),
        "q_quarter": q_at_quarter(p),
    }
    if 0 < p < 1:
        z1 = z_sign_scan("prop1", p, scan_grid)
        z2 = z_sign_scan("prop2", p, scan_grid)
        out["prop1_max"] = z1.max_value
        out["prop1_ok"] = z1.max_value <= 1e-12
        out["prop2_sign_changes"] = z2.sign_changes
        out["prop2_ok"] = len(z2.sign_changes) == 1 and 0 < z2.sign_changes[0][0] < 1 \
            and z2.sign_changes[0][1] < 1
    return out
