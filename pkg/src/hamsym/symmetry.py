"""Symmetry predicates and theorem checks for Hamiltonian systems.

Every predicate returns a :class:`PredicateResult` whose verdict comes from
sampling an identity on the system's :class:`SampleDomain`.  Identities that
involve only symbolic derivatives use the exact tolerance; identities that
involve a numerically recovered potential (``g`` or ``K``) use the numeric
one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import expr as ex
from .errors import DegenerateHamiltonianError, UnsupportedGeometryError
from .expr import Expr
from .geometry import (
    Chart,
    Geometry,
    OneForm,
    VectorField,
    bracket,
    contract,
    evolution_field,
    exterior_derivative,
    hamiltonian_vector_field,
    lie_bracket,
    lie_derivative,
)
from .quadrature import LinePotential, fd_derivative, fd_gradient
from .sampling import TOL_EXACT, TOL_FLOW, Comparison, SampleDomain, admissible_points, equal_on_samples

TOL_NUMERIC = 1e-6


@dataclass(frozen=True)
class Tolerances:
    exact: float = TOL_EXACT
    numeric: float = TOL_NUMERIC
    flow: float = TOL_FLOW
    scaling_spread: float = 1e-6
    hamiltonian_floor: float = 1e-3


@dataclass(frozen=True)
class PredicateResult:
    name: str
    verdict: bool
    max_residual: float
    witness: tuple[float, ...] | None = None
    parts: tuple["PredicateResult", ...] = ()

    def __bool__(self) -> bool:
        return self.verdict

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "verdict": self.verdict,
            "max_residual": self.max_residual,
            "witness": list(self.witness) if self.witness is not None else None,
        }
        if self.parts:
            out["parts"] = [p.to_dict() for p in self.parts]
        return out


def _from_comparison(name: str, cmp: Comparison) -> PredicateResult:
    return PredicateResult(name, cmp.verdict, cmp.max_residual, cmp.witness)


def _all(name: str, parts) -> PredicateResult:
    parts = tuple(parts)
    failing = [p for p in parts if not p.verdict]
    return PredicateResult(
        name,
        not failing,
        max((p.max_residual for p in parts), default=0.0),
        failing[0].witness if failing else None,
        parts,
    )


def _numeric_result(name: str, residuals: np.ndarray, points: np.ndarray, tol: float) -> PredicateResult:
    per_point = np.abs(residuals).reshape(-1, points.shape[1]).max(axis=0)
    worst = int(np.argmax(per_point))
    value = float(per_point[worst])
    if not np.isfinite(value):
        value = float("inf")
    ok = value <= tol
    return PredicateResult(name, ok, value, None if ok else tuple(float(v) for v in points[:, worst]))


class HamiltonianSystem:
    """A Hamiltonian function on a chart together with its cached fields.

    ``dynamics`` is ``X_H`` for symplectic and contact charts and
    ``E_H = X_H + R`` (or ``X_H + R_t``) for the time-dependent kinds.
    """

    def __init__(self, chart: Chart, H: Expr | str, domain: SampleDomain | None = None,
                 tol: Tolerances | None = None):
        self.chart = chart
        self.H = chart.parse(H) if isinstance(H, str) else ex.as_expr(H)
        if ex.max_index(self.H) >= chart.dim:
            raise ValueError("Hamiltonian uses coordinates outside the chart")
        self.domain = domain or chart.default_domain()
        if self.domain.dim != chart.dim:
            raise ValueError(f"sample domain has {self.domain.dim} coordinates, chart has {chart.dim}")
        self.tol = tol or Tolerances()
        self.structure = chart.structure
        self.reeb = () if chart.kind is Geometry.SYMPLECTIC else chart.reeb
        self.XH = hamiltonian_vector_field(chart, self.H)
        self.EH = evolution_field(chart, self.H)
        self.dynamics = self.EH
        # R H for contact, R_z H for cocontact: the dissipation rate
        self.RH = self.reeb[0](self.H) if chart.has_z else None
        self.good = None if self.RH is None else bool(self.compare(self.RH, 0))

    @classmethod
    def from_text(cls, kind: str, n: int, H: str, **kwargs) -> "HamiltonianSystem":
        return cls(Chart(kind, n), H, **kwargs)

    @property
    def kind(self) -> Geometry:
        return self.chart.kind

    @property
    def time_reeb(self) -> VectorField | None:
        return self.reeb[-1] if self.chart.has_t else None

    def parse(self, text: str) -> Expr:
        return self.chart.parse(text)

    def field(self, value) -> VectorField:
        if isinstance(value, VectorField):
            return value
        from .geometry import parse_field

        return parse_field(self.chart, value)

    def function(self, value) -> Expr:
        return self.parse(value) if isinstance(value, str) else ex.as_expr(value)

    def compare(self, a, b, tol: float | None = None) -> Comparison:
        return equal_on_samples(a, b, self.domain, self.tol.exact if tol is None else tol)

    def check(self, name: str, a, b, tol: float | None = None) -> PredicateResult:
        return _from_comparison(name, self.compare(a, b, tol))


# -- functions along the dynamics --------------------------------------------------


def is_constant_of_motion(sys: HamiltonianSystem, f) -> PredicateResult:
    f = sys.function(f)
    return sys.check("constant_of_motion", sys.dynamics(f), 0)


def _require_dissipative(sys: HamiltonianSystem, what: str):
    if not sys.chart.has_z:
        raise UnsupportedGeometryError(f"{what} is defined only on contact and cocontact charts")


def is_dissipated_quantity(sys: HamiltonianSystem, f) -> PredicateResult:
    """``E_H f = -f R_z H`` (``X_H f = -f RH`` in the contact case)."""
    _require_dissipative(sys, "a dissipated quantity")
    f = sys.function(f)
    return sys.check("dissipated_quantity", ex.add(sys.dynamics(f), ex.mul(f, sys.RH)), 0)


@dataclass(frozen=True)
class NoetherResult:
    forward: PredicateResult
    reverse: PredicateResult
    reverse_field: VectorField

    @property
    def agree(self) -> bool:
        return self.forward.verdict == self.reverse.verdict

    def to_dict(self) -> dict:
        return {
            "forward": self.forward.to_dict(),
            "reverse": self.reverse.to_dict(),
            "reverse_field": self.reverse_field.text(),
            "agree": self.agree,
        }


def noether_check(sys: HamiltonianSystem, f) -> NoetherResult:
    """Evaluate both sides of the kind's Noether theorem for the function ``f``.

    ``forward`` is the statement about ``f`` (conserved, or dissipated) and
    ``reverse`` the statement about ``X_f`` (a symmetry of the kind's Noether
    type).  The theorem asserts that they agree.
    """
    f = sys.function(f)
    Xf = hamiltonian_vector_field(sys.chart, f)
    kind = sys.kind
    if kind is Geometry.SYMPLECTIC:
        forward = is_constant_of_motion(sys, f)
        reverse = is_infinitesimal_symmetry(sys, Xf)
    elif kind is Geometry.COSYMPLECTIC:
        # time-independent f only; f + h(t) has the same X_f, so R f = 0 is
        # imposed on both sides
        Rf = sys.check("Rf_zero", sys.reeb[0](f), 0)
        forward = _all("conserved_time_independent", [is_constant_of_motion(sys, f), Rf])
        reverse = _all("infinitesimal_symmetry_time_independent", [is_infinitesimal_symmetry(sys, Xf), Rf])
    elif kind is Geometry.CONTACT:
        forward = is_dissipated_quantity(sys, f)
        reverse = sys.check("noether_symmetry", bracket(sys.chart, f, sys.H), 0)
    else:
        forward = is_dissipated_quantity(sys, f)
        residual = ex.add(bracket(sys.chart, f, sys.H), sys.reeb[1](f))
        reverse = sys.check("noether_symmetry", residual, 0)
    return NoetherResult(forward, reverse, Xf)


# -- vector-field predicates ---------------------------------------------------------


def is_infinitesimal_symmetry(sys: HamiltonianSystem, V) -> PredicateResult:
    V = sys.field(V)
    s = sys.structure
    parts = []
    if sys.chart.has_z:
        parts.append(sys.check("L_V theta = 0", lie_derivative(V, s.theta), 0))
    else:
        parts.append(sys.check("L_V omega = 0", lie_derivative(V, s.two_form), 0))
    parts.append(sys.check("L_V H = 0", V(sys.H), 0))
    if sys.chart.has_t:
        parts.append(sys.check("V _| eta = 0", contract(V, s.eta), 0))
    return _all("infinitesimal_symmetry", parts)


def is_dynamical_symmetry(sys: HamiltonianSystem, W) -> PredicateResult:
    """``[W, dynamics] = 0``; time-dependent kinds also report the two halves."""
    W = sys.field(W)
    main = sys.check("[W, dynamics] = 0", lie_bracket(W, sys.dynamics), 0)
    if not sys.chart.has_t:
        return PredicateResult("dynamical_symmetry", main.verdict, main.max_residual, main.witness)
    extra = (
        sys.check("[W, X_H] = 0", lie_bracket(W, sys.XH), 0),
        sys.check("[W, R_t] = 0", lie_bracket(W, sys.time_reeb), 0),
    )
    return PredicateResult("dynamical_symmetry", main.verdict, main.max_residual, main.witness, (main,) + extra)


@dataclass(frozen=True)
class ScalingResult:
    degree: float | None
    structural: PredicateResult
    spread: float | None = None
    residual: float | None = None

    @property
    def verdict(self) -> bool:
        return self.degree is not None

    def as_predicate(self) -> PredicateResult:
        parts = [self.structural]
        if self.residual is not None:
            parts.append(PredicateResult("L_X H = Lambda H", self.degree is not None, self.residual))
        return _all("scaling_symmetry", parts)


def scaling_structural(sys: HamiltonianSystem, X: VectorField) -> PredicateResult:
    s = sys.structure
    parts = []
    if sys.chart.has_z:
        parts.append(sys.check("L_X theta = theta", lie_derivative(X, s.theta), s.theta))
    else:
        parts.append(sys.check("L_X omega = omega", lie_derivative(X, s.two_form), s.two_form))
    if sys.chart.has_t:
        parts.append(sys.check("X _| eta = 0", contract(X, s.eta), 0))
    return _all("scaling_structure", parts)


def scaling_degree(sys: HamiltonianSystem, X) -> ScalingResult:
    """Degree ``Lambda`` of a scaling symmetry, or ``None`` if ``X`` is not one."""
    X = sys.field(X)
    structural = scaling_structural(sys, X)
    if not structural.verdict:
        return ScalingResult(None, structural)
    LXH = X(sys.H)
    pts = admissible_points((sys.H, LXH), sys.domain)
    (h, lh), _ = ex.evaluate_many((sys.H, LXH), pts)
    keep = np.abs(h) > sys.tol.hamiltonian_floor
    if not keep.any():
        raise DegenerateHamiltonianError("H vanishes at every sample point; the scaling degree is undefined")
    ratios = lh[keep] / h[keep]
    lam = float(np.mean(ratios))
    spread = float(np.std(ratios))
    residual = sys.compare(LXH, ex.mul(ex.Const(lam), sys.H))
    if spread >= sys.tol.scaling_spread or not residual.verdict:
        return ScalingResult(None, structural, spread, residual.max_residual)
    return ScalingResult(lam, structural, spread, residual.max_residual)


# -- Hamiltonian vector fields and canonoid generators ---------------------------------


@dataclass(frozen=True, eq=False)
class RecoveredFunction:
    """Numeric handle ``points (dim, N) -> values (N,)`` for a recovered potential.

    ``gauge`` is ``None`` when the function is determined exactly,
    ``"constant"`` when it is fixed up to an additive constant (zero at
    ``base``), and ``"time"`` when it is fixed up to a function of ``t``
    (zero wherever the ``(q, p)`` coordinates equal ``base``).
    """

    fn: Callable[[np.ndarray], np.ndarray]
    expr: Expr | None = None
    gauge: str | None = None
    base: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def exact(cls, e: Expr) -> "RecoveredFunction":
        return cls(lambda pts: ex.evaluate_many((e,), pts)[0][0], e)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        if pts.ndim == 1:
            return float(self.fn(pts[:, None])[0])
        return self.fn(pts)

    def gauge_points(self, points: np.ndarray) -> np.ndarray:
        """Reference points whose value is subtracted when comparing up to the gauge."""
        ref = np.array(points, float, copy=True)
        if self.gauge == "constant":
            ref[:] = self.base[:, None]
        elif self.gauge == "time":
            qp = len(self.base) - 1
            ref[:qp] = self.base[:qp, None]
        return ref


def _potential(chart: Chart, components, axes, delta) -> RecoveredFunction:
    base = np.ones(chart.dim)
    line = LinePotential(components, base=base, axes=axes, delta=delta)
    gauge = "time" if chart.has_t else "constant"
    return RecoveredFunction(line, None, gauge, base)


@dataclass(frozen=True)
class HamiltonianFieldResult:
    verdict: bool
    g: RecoveredFunction | None
    check: PredicateResult

    @property
    def max_residual(self) -> float:
        return self.check.max_residual


def _closed_on(sys: HamiltonianSystem, name: str, beta: OneForm, axes) -> PredicateResult:
    dbeta = exterior_derivative(beta)
    dim = sys.chart.dim
    axes = set(axes)
    from .geometry import _pairs

    comps = tuple(c for (i, j), c in zip(_pairs(dim), dbeta.components) if i in axes and j in axes)
    if not comps:
        return PredicateResult(name, True, 0.0)
    residual = sys.compare(OneFormLike(comps), OneFormLike((ex.ZERO,) * len(comps)))
    return _from_comparison(name, residual)


@dataclass(frozen=True)
class OneFormLike:
    """Bare component tuple for sampling comparisons of partial forms."""

    components: tuple
    tensor_kind: str = "components"


def is_hamiltonian_field(sys: HamiltonianSystem, Y) -> HamiltonianFieldResult:
    """Decide whether ``Y = X_g`` for some (possibly local) ``g`` and recover ``g``."""
    Y = sys.field(Y)
    chart, s = sys.chart, sys.structure
    if chart.has_z:
        g = ex.neg(contract(Y, s.theta))
        expected = exterior_derivative(g, chart) - s.theta * sys.reeb[0](g)
        parts = []
        if chart.has_t:
            parts.append(sys.check("Y _| eta = 0", contract(Y, s.eta), 0))
            expected = expected - s.eta * sys.reeb[1](g)
        parts.append(sys.check("Y _| dtheta = dg - (Rg) theta", contract(Y, s.two_form), expected))
        result = _all("hamiltonian_field", parts)
        return HamiltonianFieldResult(result.verdict, RecoveredFunction.exact(g) if result.verdict else None, result)

    beta = contract(Y, s.two_form)
    axes = chart.qp_indices
    parts = []
    if chart.has_t:
        parts.append(sys.check("Y _| eta = 0", contract(Y, s.eta), 0))
    parts.append(_closed_on(sys, "d(Y _| omega) = 0", beta, axes))
    if not all(p.verdict for p in parts):
        return HamiltonianFieldResult(False, None, _all("hamiltonian_field", parts))
    g = _potential(chart, beta.components, axes, sys.domain.delta)
    pts = admissible_points(beta.components, sys.domain)
    grad = fd_gradient(g, pts, axes)
    want, _ = ex.evaluate_many(tuple(beta.components[a] for a in axes), pts)
    parts.append(_numeric_result("dg = Y _| omega", grad - want, pts, sys.tol.numeric))
    result = _all("hamiltonian_field", parts)
    return HamiltonianFieldResult(result.verdict, g if result.verdict else None, result)


@dataclass(frozen=True)
class CanonoidResult:
    verdict: bool
    bracket_field: VectorField
    side_conditions: PredicateResult | None
    hamiltonian: HamiltonianFieldResult
    bracket_hamiltonian: RecoveredFunction | None = None
    bracket_hamiltonian_expr: Expr | None = None
    K: RecoveredFunction | None = None
    formula_check: PredicateResult | None = None
    K_invariance: PredicateResult | None = None

    def as_predicate(self) -> PredicateResult:
        parts = [p for p in (self.side_conditions, self.hamiltonian.check) if p is not None]
        return _all("canonoid_generator", parts)

    def to_dict(self, chart: Chart) -> dict:
        out: dict[str, Any] = {"verdict": self.verdict, "bracket_field": self.bracket_field.text()}
        out["new_hamiltonian_of_bracket"] = (
            chart.format(self.bracket_hamiltonian_expr) if self.bracket_hamiltonian_expr is not None else None
        )
        out["K"] = None if self.K is None else "line integral of X_H _| L_X(2-form), zero at base point"
        out["formula_check"] = None if self.formula_check is None else self.formula_check.to_dict()
        out["K_is_invariant_residual"] = None if self.K_invariance is None else self.K_invariance.max_residual
        return out


def _side_conditions(sys: HamiltonianSystem, X: VectorField) -> PredicateResult | None:
    if not sys.chart.has_t:
        return None
    name = "[X, R] = 0" if sys.kind is Geometry.COSYMPLECTIC else "[X, R_t] = 0"
    return sys.check(name, lie_bracket(X, sys.time_reeb), 0)


def canonoid_K(sys: HamiltonianSystem, X: VectorField) -> tuple[PredicateResult, RecoveredFunction | None]:
    """``K`` with ``X_H _| L_X omega = dK`` (``dK - RK eta`` in the cosymplectic case)."""
    chart = sys.chart
    if chart.has_z:
        raise UnsupportedGeometryError("K is recovered only on symplectic and cosymplectic charts")
    alpha = contract(sys.XH, lie_derivative(X, sys.structure.two_form))
    axes = chart.qp_indices
    parts = [_closed_on(sys, "d(X_H _| L_X omega) = 0", alpha, axes)]
    if chart.has_t:
        parts.append(sys.check("(X_H _| L_X Omega)_t = 0", alpha.components[chart.t], 0))
    closed = _all("K_exists", parts)
    if not closed.verdict:
        return closed, None
    return closed, _potential(chart, alpha.components, axes, sys.domain.delta)


def is_canonoid_generator(sys: HamiltonianSystem, X) -> CanonoidResult:
    """Whether ``X`` generates a one-parameter group of canonoid transformations.

    The verdict is the side condition of the kind together with ``[X, X_H]``
    being Hamiltonian.  The theorem's formula for the Hamiltonian of the
    bracket and the invariance of ``K`` are reported separately.
    """
    X = sys.field(X)
    Y = lie_bracket(X, sys.XH)
    side = _side_conditions(sys, X)
    ham = is_hamiltonian_field(sys, Y)
    verdict = ham.verdict and (side is None or side.verdict)
    LXH = X(sys.H)
    if sys.chart.has_z:
        formula = ex.add(LXH, contract(sys.XH, lie_derivative(X, sys.structure.theta)))
        check = None
        if ham.verdict:
            check = sys.check("g = L_X H + X_H _| L_X theta", ham.g.expr, formula)
        return CanonoidResult(verdict, Y, side, ham, ham.g, formula if ham.verdict else None, None, check, None)

    if not ham.verdict:
        return CanonoidResult(verdict, Y, side, ham)
    closed, K = canonoid_K(sys, X)
    if K is None:
        return CanonoidResult(verdict, Y, side, ham, ham.g, None, None, closed, None)
    lxh = RecoveredFunction.exact(LXH)
    pts = admissible_points((LXH,) + sys.XH.components, sys.domain)
    ref = ham.g.gauge_points(pts)
    lhs = ham.g(pts) - ham.g(ref)
    rhs = (lxh(pts) - lxh(ref)) - (K(pts) - K(ref))
    formula_check = _numeric_result("g = L_X H - K", lhs - rhs, pts, sys.tol.numeric)
    xh, _ = ex.evaluate_many(sys.XH.components, pts)
    invariance = _numeric_result("X_H K = 0", fd_derivative(K, pts, xh), pts, sys.tol.numeric)
    return CanonoidResult(verdict, Y, side, ham, ham.g, None, K, formula_check, invariance)


@dataclass(frozen=True)
class NoetherFieldResult:
    symmetry: PredicateResult
    hamiltonian: HamiltonianFieldResult
    conserved: PredicateResult | None

    @property
    def reverse(self) -> bool:
        return self.hamiltonian.verdict and self.conserved is not None and self.conserved.verdict

    @property
    def agree(self) -> bool:
        return self.symmetry.verdict == self.reverse


def noether_field_check(sys: HamiltonianSystem, V) -> NoetherFieldResult:
    """Converse direction of the Noether theorems, starting from a field ``V``.

    ``V`` is an infinitesimal symmetry exactly when ``V = X_f`` for a function
    ``f`` recovered by :func:`is_hamiltonian_field` that is conserved with
    ``Rf = 0`` (symplectic/cosymplectic) or a Noether function with vanishing
    Reeb derivatives (contact/cocontact).
    """
    V = sys.field(V)
    sym = is_infinitesimal_symmetry(sys, V)
    ham = is_hamiltonian_field(sys, V)
    if not ham.verdict:
        return NoetherFieldResult(sym, ham, None)
    g = ham.g
    if g.expr is not None:
        parts = [sys.check("{f, H} = 0", bracket(sys.chart, g.expr, sys.H), 0)]
        parts += [sys.check(f"R{i} f = 0", R(g.expr), 0) for i, R in enumerate(sys.reeb)]
        return NoetherFieldResult(sym, ham, _all("noether_function", parts))
    pts = admissible_points(sys.EH.components, sys.domain)
    eh, _ = ex.evaluate_many(sys.EH.components, pts)
    parts = [_numeric_result("E_H f = 0", fd_derivative(g, pts, eh), pts, sys.tol.numeric)]
    if sys.chart.has_t:
        parts.append(_numeric_result("R f = 0", fd_gradient(g, pts, [sys.chart.t]), pts, sys.tol.numeric))
    return NoetherFieldResult(sym, ham, _all("conserved_function", parts))


# -- cosymplectic primitive -------------------------------------------------------------


@dataclass(frozen=True)
class PrimitiveResult:
    verdict: bool
    check: PredicateResult
    reconstructed: VectorField | None
    scaling: ScalingResult | None = None


def reconstruct_from_primitive(chart: Chart, lam: OneForm) -> VectorField:
    """Invert ``X -> X _| Omega + (X _| eta) eta`` in Darboux coordinates."""
    comps = [ex.ZERO] * chart.dim
    for i in range(chart.n):
        comps[chart.q(i)] = lam.components[chart.p(i)]
        comps[chart.p(i)] = ex.neg(lam.components[chart.q(i)])
    comps[chart.t] = lam.components[chart.t]
    return VectorField(chart, tuple(comps))


def check_scaling_primitive(sys: HamiltonianSystem, lam: OneForm, degree: float) -> PrimitiveResult:
    """Check that ``lam`` is a primitive of ``Omega`` adapted to a scaling of degree ``degree``."""
    if sys.kind is not Geometry.COSYMPLECTIC:
        raise UnsupportedGeometryError("the primitive criterion applies to cosymplectic charts only")
    s = sys.structure
    parts = [
        sys.check("d lambda = Omega", exterior_derivative(lam), s.two_form),
        sys.check("X_H _| lambda = -Lambda H", contract(sys.XH, lam), ex.mul(ex.Const(-degree), sys.H)),
        sys.check("R _| lambda = 0", contract(sys.reeb[0], lam), 0),
    ]
    check = _all("scaling_primitive", parts)
    if not check.verdict:
        return PrimitiveResult(False, check, None)
    X = reconstruct_from_primitive(sys.chart, lam)
    scaling = scaling_degree(sys, X)
    ok = scaling.degree is not None and abs(scaling.degree - degree) <= sys.tol.exact * max(1.0, abs(degree))
    parts.append(
        PredicateResult(
            "scaling degree of reconstructed X",
            ok,
            abs(scaling.degree - degree) if scaling.degree is not None else float("inf"),
        )
    )
    return PrimitiveResult(ok, _all("scaling_primitive", parts), X, scaling)


# -- classification report ----------------------------------------------------------------


@dataclass
class ClassificationReport:
    geometry: str
    n: int
    hamiltonian: str
    field: str
    predicates: list[PredicateResult]
    scaling_degree: float | None
    canonoid: dict | None
    notes: list[str] = field(default_factory=list)

    def predicate(self, name: str) -> PredicateResult:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry,
            "n": self.n,
            "hamiltonian": self.hamiltonian,
            "field": self.field,
            "predicates": [p.to_dict() for p in self.predicates],
            "scaling_degree": self.scaling_degree,
            "canonoid": self.canonoid,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def classify(sys: HamiltonianSystem, X) -> ClassificationReport:
    """Run every field predicate on ``X`` and collect the results."""
    X = sys.field(X)
    scaling = scaling_degree(sys, X)
    canonoid = is_canonoid_generator(sys, X)
    predicates = [
        is_infinitesimal_symmetry(sys, X),
        is_dynamical_symmetry(sys, X),
        scaling.as_predicate(),
        canonoid.as_predicate(),
        PredicateResult(
            "hamiltonian_field",
            *_ham_summary(is_hamiltonian_field(sys, X)),
        ),
    ]
    notes = [f"coordinates: {', '.join(sys.chart.names)}"]
    if not sys.chart.has_z:
        notes.append("recovered potentials are local: verified on the sample box only")
    if sys.good is not None:
        notes.append(f"good system: {sys.good}")
    return ClassificationReport(
        geometry=sys.kind.value,
        n=sys.chart.n,
        hamiltonian=sys.chart.format(sys.H),
        field=X.text(),
        predicates=predicates,
        scaling_degree=scaling.degree,
        canonoid=canonoid.to_dict(sys.chart),
        notes=notes,
    )


def _ham_summary(result: HamiltonianFieldResult):
    return result.verdict, result.check.max_residual, result.check.witness, result.check.parts
