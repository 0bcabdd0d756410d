"""Numerical flows of vector fields and flow-level checks.

Integration is classical fixed-step RK4, vectorized over many starting
points at once.  Jacobians of a flow map come from central differences
of the map itself with step ``JACOBIAN_STEP``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import expr as ex
from .errors import DomainError, UnsupportedGeometryError
from .expr import Expr
from .geometry import Chart, Geometry, OneForm, TwoForm, VectorField
from .quadrature import fd_gradient, gauss_legendre
from .sampling import SampleDomain, admissible_points
from .symmetry import HamiltonianSystem, PredicateResult, _numeric_result

DEFAULT_STEPS = 1000
JACOBIAN_STEP = 1e-5
PROBES = 20
FLOW_TIMES = (0.1, 0.5, 1.0)


def _steps(s: float, h: float | None) -> int:
    if s == 0:
        return 0
    if h is None:
        return DEFAULT_STEPS
    if not h > 0:
        raise ValueError("step size must be positive")
    return max(1, math.ceil(abs(s) / h - 1e-9))


def _rk4(evaluator, x: np.ndarray, h: float, steps: int, record: bool = False):
    """Advance columns of ``x``; returns (final, bad-mask, history or None)."""
    x = np.array(x, float)
    bad = np.zeros(x.shape[1], bool)
    history = [x.copy()] if record else None
    f = getattr(evaluator, "raw", evaluator)
    half, sixth = 0.5 * h, h / 6.0
    y = np.empty_like(x)
    with np.errstate(all="ignore"):
        for _ in range(steps):
            k1, b1 = f(x, 0.0)
            np.multiply(k1, half, out=y)
            y += x
            k2, b2 = f(y, 0.0)
            np.multiply(k2, half, out=y)
            y += x
            k3, b3 = f(y, 0.0)
            np.multiply(k3, h, out=y)
            y += x
            k4, b4 = f(y, 0.0)
            b1 |= b2
            b1 |= b3
            b1 |= b4
            if record and b1.any():
                return x, b1, history
            bad |= b1
            k2 += k3
            k2 *= 2.0
            k2 += k1
            k2 += k4
            k2 *= sixth
            x = x + k2
            if record:
                history.append(x.copy())
    return x, bad, history


@dataclass(frozen=True, eq=False)
class Trajectory:
    """RK4 samples ``(s_k, x_k)`` of one integral curve."""

    chart: Chart
    field: VectorField
    s: np.ndarray
    points: np.ndarray
    h: float
    truncated: bool = False
    error: str | None = None
    rate: Expr | None = field(default=None, repr=False)

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    def values(self, f: Expr) -> np.ndarray:
        v, _ = ex.evaluate_many((f,), self.points.T)
        return v[0]

    def to_csv(self, monitors: Sequence[tuple[str, np.ndarray]] = (), summary: str | None = None) -> str:
        out = io.StringIO()
        out.write(",".join(["s", *self.chart.names, *(name for name, _ in monitors)]) + "\n")
        for k in range(len(self.s)):
            row = [self.s[k], *self.points[k], *(vals[k] for _, vals in monitors)]
            out.write(",".join("%.17g" % v for v in row) + "\n")
        if self.truncated:
            out.write(f"# truncated: {self.error}\n")
        if summary:
            out.write(f"# {summary}\n")
        return out.getvalue()


def integrate(chart: Chart, X: VectorField, x0, s: float, h: float | None = None,
              box: Sequence[tuple[float, float]] | None = None, rate: Expr | None = None) -> Trajectory:
    """Integrate ``X`` from ``x0`` over parameter length ``s`` with RK4.

    ``N = ceil(|s| / h)`` steps of size ``s / N`` are taken, so the final
    parameter is exactly ``s``; without ``h`` the step is ``s / 1000``.
    Leaving ``box`` or an undefined field value truncates the trajectory.
    """
    x0 = np.asarray(x0, float).reshape(-1)
    if x0.size != chart.dim:
        raise ValueError(f"starting point needs {chart.dim} coordinates, got {x0.size}")
    steps = _steps(s, h)
    step = s / steps if steps else 0.0
    evaluator = ex.compile_exprs(X.components)
    x = x0[:, None].copy()
    pts = [x0.copy()]
    error = None
    lo = hi = None
    if box is not None:
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
    for k in range(steps):
        new, bad, _ = _rk4(evaluator, x, step, 1)
        if bad.any() or not np.all(np.isfinite(new)):
            error = f"vector field undefined near {tuple(float(v) for v in x[:, 0])} at s={k * step:.17g}"
            break
        if lo is not None and (np.any(new[:, 0] < lo) or np.any(new[:, 0] > hi)):
            error = f"left the integration box at s={(k + 1) * step:.17g}"
            break
        x = new
        pts.append(x[:, 0].copy())
    points = np.array(pts)
    svals = step * np.arange(len(points))
    return Trajectory(chart, X, svals, points, abs(step), error is not None, error, rate)


def integrate_system(sys: HamiltonianSystem, x0, s: float, h: float | None = None, box=None) -> Trajectory:
    """Trajectory of the system's dynamics (``X_H`` or ``E_H``)."""
    return integrate(sys.chart, sys.dynamics, x0, s, h, box, rate=sys.RH)


@dataclass(frozen=True, eq=False)
class FlowMap:
    """The time-``s`` map of ``X`` computed with ``steps`` RK4 steps."""

    chart: Chart
    field: VectorField
    s: float
    steps: int

    @property
    def h(self) -> float:
        return self.s / self.steps if self.steps else 0.0

    def apply_many(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        if self.steps == 0:
            return pts.copy()
        final, bad, _ = _rk4(ex.compile_exprs(self.field.components), pts, self.h, self.steps)
        bad |= ~np.all(np.isfinite(final), axis=0)
        if bad.any():
            raise DomainError("flow left the domain of the vector field", pts[:, int(np.argmax(bad))])
        return final

    def apply(self, point) -> np.ndarray:
        return self.apply_many(np.asarray(point, float).reshape(-1, 1))[:, 0]

    def pushforward(self, points, vectors, step: float = JACOBIAN_STEP) -> np.ndarray:
        """``D phi(x) v`` for paired columns of points and vectors."""
        pts = np.asarray(points, float)
        v = np.broadcast_to(np.asarray(vectors, float).reshape(pts.shape[0], -1), pts.shape)
        moved = self.apply_many(np.concatenate([pts + step * v, pts - step * v], axis=1))
        n = pts.shape[1]
        return (moved[:, :n] - moved[:, n:]) / (2 * step)

    def jacobian(self, points, step: float = JACOBIAN_STEP) -> np.ndarray:
        """Jacobians ``(N, dim, dim)`` by central differences."""
        pts = np.asarray(points, float)
        dim, n = pts.shape
        if self.steps == 0:
            return np.broadcast_to(np.eye(dim), (n, dim, dim)).copy()
        shifted = []
        for j in range(dim):
            e = np.zeros((dim, 1))
            e[j] = step
            shifted += [pts + e, pts - e]
        moved = self.apply_many(np.concatenate(shifted, axis=1)).reshape(dim, 2 * dim, n)
        cols = (moved[:, 0::2, :] - moved[:, 1::2, :]) / (2 * step)  # (dim_out, dim_in, N)
        return cols.transpose(2, 0, 1)


def flow_map(chart: Chart, X: VectorField, s: float, h: float | None = None) -> FlowMap:
    return FlowMap(chart, X, float(s), _steps(s, h))


def apply(flow: FlowMap, point) -> np.ndarray:
    return flow.apply(point)


def probe_points(chart: Chart, exprs: Sequence[Expr] = (), count: int = PROBES, domain: SampleDomain | None = None) -> np.ndarray:
    dom = domain or chart.default_domain()
    return admissible_points(tuple(exprs), dom, count)


def _matrices(form: TwoForm, points: np.ndarray) -> np.ndarray:
    """Antisymmetric coefficient matrices ``(N, dim, dim)``."""
    from .geometry import _pairs

    dim = form.chart.dim
    values, _ = ex.evaluate_many(form.components, points)
    mats = np.zeros((points.shape[1], dim, dim))
    for k, (i, j) in enumerate(_pairs(dim)):
        mats[:, i, j] = values[k]
        mats[:, j, i] = -values[k]
    return mats


def pullback(flow: FlowMap, form, points: np.ndarray, jac: np.ndarray | None = None, moved: np.ndarray | None = None):
    """Coefficients of ``phi_s^* form`` at ``points``: ``(N, dim)`` or ``(N, dim, dim)``."""
    jac = flow.jacobian(points) if jac is None else jac
    moved = flow.apply_many(points) if moved is None else moved
    if isinstance(form, OneForm):
        values, _ = ex.evaluate_many(form.components, moved)
        return np.einsum("nk,nki->ni", values.T, jac)
    if isinstance(form, TwoForm):
        A = _matrices(form, moved)
        return np.einsum("nki,nkl,nlj->nij", jac, A, jac)
    raise TypeError(f"cannot pull back {type(form).__name__}")


def _coefficients(form, points: np.ndarray) -> np.ndarray:
    if isinstance(form, OneForm):
        values, _ = ex.evaluate_many(form.components, points)
        return values.T
    return _matrices(form, points)


def pullback_residual(flow: FlowMap, form, target=None, probes: np.ndarray | None = None,
                      jac: np.ndarray | None = None, moved: np.ndarray | None = None) -> float:
    """``max |(phi_s^* form)(e_i[, e_j]) - target(...)|`` over probe points.

    ``jac`` and ``moved`` may be passed in to reuse one Jacobian for several forms.
    """
    target = form if target is None else target
    if probes is None:
        probes = probe_points(flow.chart, flow.field.components + form.components + target.components)
    got = pullback(flow, form, probes, jac, moved)
    want = _coefficients(target, probes)
    return float(np.max(np.abs(got - want))) if got.size else 0.0


# -- canonoid transformations along a flow ------------------------------------------------


@dataclass(frozen=True, eq=False)
class FlowCanonoidResult:
    s: float
    probes: np.ndarray
    K_s: object
    K_values: np.ndarray
    pulled_H: np.ndarray
    residuals: dict
    K_error: float

    def as_predicate(self, tol: float) -> PredicateResult:
        parts = [PredicateResult(name, value <= tol, value) for name, value in self.residuals.items()]
        parts.append(PredicateResult("K_s = phi_s^* H", self.K_error <= tol, self.K_error))
        return PredicateResult(
            f"canonoid_flow(s={self.s:g})",
            all(p.verdict for p in parts),
            max(p.max_residual for p in parts),
            None,
            tuple(parts),
        )


class _ContactK:
    """``K_s = -X_H _| phi_s^* theta`` as a numeric function."""

    def __init__(self, sys: HamiltonianSystem, flow: FlowMap):
        self.sys, self.flow = sys, flow

    def __call__(self, points: np.ndarray, step: float = JACOBIAN_STEP) -> np.ndarray:
        n = points.shape[1]
        xh, _ = ex.evaluate_many(self.sys.XH.components, points)
        moved = self.flow.apply_many(np.concatenate([points + step * xh, points - step * xh, points], axis=1))
        pushed = (moved[:, :n] - moved[:, n:2 * n]) / (2 * step)
        theta, _ = ex.evaluate_many(self.sys.structure.theta.components, moved[:, 2 * n:])
        return -np.sum(theta * pushed, axis=0)


class _LineK:
    """``K_s`` with ``dK_s = X_H _| phi_s^* omega`` on ``(q, p)``, by Gauss-Legendre line integrals."""

    def __init__(self, sys: HamiltonianSystem, flow: FlowMap, reverse: bool = False):
        self.sys, self.flow = sys, flow
        self.axes = tuple(reversed(sys.chart.qp_indices)) if reverse else sys.chart.qp_indices
        self.base = np.ones(sys.chart.dim)
        self.omega = _matrices(sys.structure.two_form, self.base[:, None])[0]

    def alpha(self, points: np.ndarray, axes) -> np.ndarray:
        """``(X_H _| phi_s^* omega)(e_axis)`` per column; ``axes`` is one index or one per column."""
        dim, n = points.shape
        xh, _ = ex.evaluate_many(self.sys.XH.components, points)
        e = np.zeros((dim, n))
        e[np.broadcast_to(np.asarray(axes), (n,)), np.arange(n)] = 1.0
        both = self.flow.pushforward(np.concatenate([points, points], axis=1), np.concatenate([xh, e], axis=1))
        return np.einsum("in,ij,jn->n", both[:, :n], self.omega, both[:, n:])

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, float)
        n = pts.shape[1]
        u = (np.polynomial.legendre.leggauss(16)[0] + 1) / 2
        m = len(u)
        start = pts.copy()
        start[list(self.axes)] = self.base[list(self.axes), None]
        nodes, spans, which = [], [], []
        for axis in self.axes:
            lo = start[axis].copy()
            span = pts[axis] - lo
            y = np.repeat(start, m, axis=1)
            y[axis] = np.repeat(lo, m) + np.tile(u, n) * np.repeat(span, m)
            nodes.append(y)
            spans.append(np.repeat(span, m))
            which.append(np.full(n * m, axis))
            start[axis] = pts[axis]
        values = self.alpha(np.concatenate(nodes, axis=1), np.concatenate(which)) * np.concatenate(spans)
        per_axis = values.reshape(len(self.axes), n, m)
        return gauss_legendre(lambda _: per_axis.sum(axis=0), n)


def canonoid_flow_check(sys: HamiltonianSystem, X, s: float, probes: np.ndarray | None = None,
                        h: float | None = None) -> FlowCanonoidResult:
    """Evaluate the finite-``s`` canonoid equations for the flow of ``X``.

    Contact kinds read ``K_s`` off ``-X_H _| phi_s^* theta`` and check the
    ``d phi_s^* theta`` equation; symplectic kinds recover ``K_s`` by line
    integration and check path independence.  ``K_error`` compares ``K_s``
    with ``H o phi_s`` (up to the kind's gauge).
    """
    X = sys.field(X)
    chart = sys.chart
    flow = flow_map(chart, X, s, h)
    if probes is None:
        probes = probe_points(chart, X.components + sys.XH.components + (sys.H,), domain=sys.domain.with_(samples=PROBES))
    moved = flow.apply_many(probes)
    pulled_H, _ = ex.evaluate_many((sys.H,), moved)
    pulled_H = pulled_H[0]
    residuals = {}
    if chart.has_z:
        K = _ContactK(sys, flow)
        Kv = K(probes)
        jac = flow.jacobian(probes)
        st = sys.structure
        dK = fd_gradient(K, probes).T  # (N, dim)
        xh, _ = ex.evaluate_many(sys.XH.components, probes)
        A = _matrices(st.two_form, moved)
        pulled_dtheta = np.einsum("nki,nkl,nlj->nij", jac, A, jac)
        lhs = np.einsum("jn,nji->ni", xh, pulled_dtheta)
        pulled_theta = pullback(flow, st.theta, probes, jac, moved)
        rz, _ = ex.evaluate_many(sys.reeb[0].components, moved)
        reeb_s = np.linalg.solve(jac, rz.T[:, :, None])[:, :, 0]
        rhs = dK - np.sum(dK * reeb_s, axis=1)[:, None] * pulled_theta
        if chart.has_t:
            eta = np.zeros(chart.dim)
            eta[chart.t] = 1.0
            rhs = rhs - dK[:, [chart.t]] * eta[None, :]
            residuals["phi_s^* eta = eta"] = pullback_residual(flow, st.eta, probes=probes, jac=jac, moved=moved)
        residuals["X_H _| d phi_s^* theta equation"] = float(np.max(np.abs(lhs - rhs)))
        K_error = float(np.max(np.abs(Kv - pulled_H)))
        return FlowCanonoidResult(s, probes, K, Kv, pulled_H, residuals, K_error)

    K = _LineK(sys, flow)
    Kv = K(probes)
    Kr = _LineK(sys, flow, reverse=True)(probes)
    residuals["path independence of K_s"] = float(np.max(np.abs(Kv - Kr)))
    ref = probes.copy()
    ref[list(chart.qp_indices)] = 1.0
    ref_H, _ = ex.evaluate_many((sys.H,), flow.apply_many(ref))
    if chart.has_t:
        residuals["(X_H _| phi_s^* Omega)_t = 0"] = float(np.max(np.abs(K.alpha(probes, chart.t))))
        residuals["phi_s^* eta = eta"] = pullback_residual(flow, sys.structure.eta, probes=probes)
    K_error = float(np.max(np.abs(Kv - (pulled_H - ref_H[0]))))
    return FlowCanonoidResult(s, probes, K, Kv, pulled_H, residuals, K_error)


# -- monitoring ------------------------------------------------------------------------------


@dataclass(frozen=True)
class MonitorResult:
    series: np.ndarray
    drift: float
    mode: str


def monitor(traj: Trajectory, f: Expr, mode: str = "conserved", rate: Expr | None = None) -> MonitorResult:
    """Drift of ``f`` along a trajectory.

    ``conserved``: ``max |f(x_k) - f(x_0)|``.  ``dissipated``: the series is
    ``f(x_k) exp(int_0^s_k rate)`` with the trapezoid rule, where ``rate``
    is ``R_z H`` (taken from the trajectory when omitted).
    """
    values = traj.values(f)
    if mode == "conserved":
        series = values
    elif mode == "dissipated":
        rate = traj.rate if rate is None else rate
        if rate is None:
            raise UnsupportedGeometryError("dissipated monitoring needs a Reeb rate (contact or cocontact dynamics)")
        r = traj.values(rate)
        integral = np.concatenate([[0.0], np.cumsum(0.5 * (r[1:] + r[:-1]) * np.diff(traj.s))])
        series = values * np.exp(integral)
    else:
        raise ValueError(f"unknown monitoring mode {mode!r}")
    drift = float(np.max(np.abs(series - series[0]))) if len(series) else 0.0
    return MonitorResult(series, drift, mode)
