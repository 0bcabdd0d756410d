"""Symplectic, cosymplectic, contact and cocontact structures in Darboux charts.

Coordinate order is fixed tool-wide:

=============  ==========================
symplectic     q1..qn, p1..pn
cosymplectic   q1..qn, p1..pn, t
contact        q1..qn, p1..pn, z
cocontact      q1..qn, p1..pn, z, t
=============  ==========================

Vector fields and forms hold one expression per component.  A 2-form stores
only its strictly upper triangular coefficients ``a_ij`` (``i < j``) of
``sum a_ij dx^i ^ dx^j``; 3-forms exist only as an intermediate of the
Cartan formula.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from typing import ClassVar, Sequence, Union

import numpy as np

from . import expr as ex
from .errors import NoReebError, ParseError
from .expr import Expr
from .parser import parse
from .sampling import SampleDomain


class Geometry(str, Enum):
    SYMPLECTIC = "symplectic"
    COSYMPLECTIC = "cosymplectic"
    CONTACT = "contact"
    COCONTACT = "cocontact"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Chart:
    kind: Geometry
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", Geometry(self.kind))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("degrees of freedom must be a positive integer")
        object.__setattr__(self, "n", int(self.n))

    @property
    def has_z(self) -> bool:
        return self.kind in (Geometry.CONTACT, Geometry.COCONTACT)

    @property
    def has_t(self) -> bool:
        return self.kind in (Geometry.COSYMPLECTIC, Geometry.COCONTACT)

    @property
    def dim(self) -> int:
        return 2 * self.n + self.has_z + self.has_t

    @property
    def z(self) -> int | None:
        return 2 * self.n if self.has_z else None

    @property
    def t(self) -> int | None:
        return self.dim - 1 if self.has_t else None

    def q(self, i: int) -> int:
        """Index of q_(i+1), zero based."""
        return i

    def p(self, i: int) -> int:
        return self.n + i

    @property
    def qp_indices(self) -> tuple[int, ...]:
        return tuple(range(2 * self.n))

    @cached_property
    def names(self) -> tuple[str, ...]:
        names = [f"q{i + 1}" for i in range(self.n)] + [f"p{i + 1}" for i in range(self.n)]
        if self.has_z:
            names.append("z")
        if self.has_t:
            names.append("t")
        return tuple(names)

    def coordinate_index(self, name: str) -> int | None:
        if self.n == 1 and name in ("q", "p"):
            name += "1"
        try:
            return self.names.index(name)
        except ValueError:
            return None

    def coord(self, name: str) -> Expr:
        index = self.coordinate_index(name)
        if index is None:
            raise KeyError(name)
        return ex.Coord(index)

    def parse(self, text: str) -> Expr:
        return parse(text, self)

    def format(self, e: Expr) -> str:
        return ex.to_text(e, self.names)

    def default_domain(self, **overrides) -> SampleDomain:
        return SampleDomain.default(self.dim, **overrides)

    @cached_property
    def structure(self) -> "Structure":
        return _build_structure(self)

    @cached_property
    def reeb(self) -> tuple["VectorField", ...]:
        if self.kind is Geometry.SYMPLECTIC:
            raise NoReebError("a symplectic chart has no Reeb field")
        if self.kind is Geometry.COSYMPLECTIC:
            return (VectorField.basis(self, self.t),)
        if self.kind is Geometry.CONTACT:
            return (VectorField.basis(self, self.z),)
        return (VectorField.basis(self, self.z), VectorField.basis(self, self.t))


# -- fields and forms -------------------------------------------------------------


@lru_cache(maxsize=None)
def _pairs(dim: int) -> tuple[tuple[int, int], ...]:
    return tuple(itertools.combinations(range(dim), 2))


@lru_cache(maxsize=None)
def _pair_index(dim: int) -> dict:
    return {pair: k for k, pair in enumerate(_pairs(dim))}


@lru_cache(maxsize=None)
def _triples(dim: int) -> tuple[tuple[int, int, int], ...]:
    return tuple(itertools.combinations(range(dim), 3))


@lru_cache(maxsize=None)
def _triple_index(dim: int) -> dict:
    return {t: k for k, t in enumerate(_triples(dim))}


def _coerce(value) -> Expr:
    return ex.as_expr(value)


class _Tensor:
    """Shared componentwise arithmetic."""

    chart: Chart
    components: tuple[Expr, ...]

    def _check(self, other):
        if type(other) is not type(self) or other.chart != self.chart:
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")

    def _map(self, fn):
        return type(self)(self.chart, tuple(fn(c) for c in self.components))

    def __add__(self, other):
        self._check(other)
        return type(self)(self.chart, tuple(ex.add(a, b) for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        self._check(other)
        return type(self)(self.chart, tuple(ex.sub(a, b) for a, b in zip(self.components, other.components)))

    def __neg__(self):
        return self._map(ex.neg)

    def __mul__(self, scalar):
        s = _coerce(scalar)
        return self._map(lambda c: ex.mul(s, c))

    __rmul__ = __mul__

    def __len__(self):
        return len(self.components)

    def text(self) -> str:
        return "; ".join(self.chart.format(c) for c in self.components)


@dataclass(frozen=True, eq=False)
class VectorField(_Tensor):
    chart: Chart
    components: tuple[Expr, ...]
    tensor_kind: ClassVar[str] = "vector"

    def __post_init__(self):
        comps = tuple(_coerce(c) for c in self.components)
        if len(comps) != self.chart.dim:
            raise ValueError(f"vector field needs {self.chart.dim} components, got {len(comps)}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls(chart, (ex.ZERO,) * chart.dim)

    @classmethod
    def basis(cls, chart: Chart, index: int) -> "VectorField":
        comps = [ex.ZERO] * chart.dim
        comps[index] = ex.ONE
        return cls(chart, tuple(comps))

    def __call__(self, f: Expr) -> Expr:
        """Directional derivative ``X f``."""
        return ex.total(
            ex.mul(c, ex.differentiate(f, i)) for i, c in enumerate(self.components) if not ex.is_const(c, 0.0)
        )


@dataclass(frozen=True, eq=False)
class OneForm(_Tensor):
    chart: Chart
    components: tuple[Expr, ...]
    tensor_kind: ClassVar[str] = "1-form"
    degree: ClassVar[int] = 1

    def __post_init__(self):
        comps = tuple(_coerce(c) for c in self.components)
        if len(comps) != self.chart.dim:
            raise ValueError(f"1-form needs {self.chart.dim} components, got {len(comps)}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero(cls, chart: Chart) -> "OneForm":
        return cls(chart, (ex.ZERO,) * chart.dim)

    @classmethod
    def basis(cls, chart: Chart, index: int) -> "OneForm":
        comps = [ex.ZERO] * chart.dim
        comps[index] = ex.ONE
        return cls(chart, tuple(comps))


@dataclass(frozen=True, eq=False)
class TwoForm(_Tensor):
    chart: Chart
    components: tuple[Expr, ...]
    tensor_kind: ClassVar[str] = "2-form"
    degree: ClassVar[int] = 2

    def __post_init__(self):
        comps = tuple(_coerce(c) for c in self.components)
        if len(comps) != len(_pairs(self.chart.dim)):
            raise ValueError("2-form needs one coefficient per pair i < j")
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero(cls, chart: Chart) -> "TwoForm":
        return cls(chart, (ex.ZERO,) * len(_pairs(chart.dim)))

    @classmethod
    def from_coefficients(cls, chart: Chart, coeffs: dict) -> "TwoForm":
        """Build from ``{(i, j): a}``; pairs with ``i > j`` are folded in with a sign flip."""
        comps = [ex.ZERO] * len(_pairs(chart.dim))
        index = _pair_index(chart.dim)
        for (i, j), value in coeffs.items():
            if i == j:
                raise ValueError("a 2-form has no diagonal coefficients")
            value = _coerce(value)
            if i > j:
                i, j, value = j, i, ex.neg(value)
            k = index[(i, j)]
            comps[k] = ex.add(comps[k], value)
        return cls(chart, tuple(comps))

    def coefficient(self, i: int, j: int) -> Expr:
        """Antisymmetric coefficient ``A_ij``."""
        if i == j:
            return ex.ZERO
        if i < j:
            return self.components[_pair_index(self.chart.dim)[(i, j)]]
        return ex.neg(self.components[_pair_index(self.chart.dim)[(j, i)]])

    def matrix(self, point) -> np.ndarray:
        """Full antisymmetric coefficient matrix at one point."""
        d = self.chart.dim
        values, _ = ex.evaluate_many(self.components, np.asarray(point, float)[:, None]) if self.components else (np.zeros((0, 1)), None)
        m = np.zeros((d, d))
        for k, (i, j) in enumerate(_pairs(d)):
            m[i, j] = values[k, 0]
            m[j, i] = -values[k, 0]
        return m


@dataclass(frozen=True, eq=False)
class ThreeForm(_Tensor):
    chart: Chart
    components: tuple[Expr, ...]
    tensor_kind: ClassVar[str] = "3-form"
    degree: ClassVar[int] = 3

    def __post_init__(self):
        comps = tuple(_coerce(c) for c in self.components)
        if len(comps) != len(_triples(self.chart.dim)):
            raise ValueError("3-form needs one coefficient per triple i < j < k")
        object.__setattr__(self, "components", comps)

    def coefficient(self, i: int, j: int, k: int) -> Expr:
        if len({i, j, k}) < 3:
            return ex.ZERO
        order = sorted((i, j, k))
        perm = [order.index(v) for v in (i, j, k)]
        inversions = sum(1 for a in range(3) for b in range(a + 1, 3) if perm[a] > perm[b])
        value = self.components[_triple_index(self.chart.dim)[tuple(order)]]
        return ex.neg(value) if inversions % 2 else value


Form = Union[OneForm, TwoForm, ThreeForm]


def wedge(a: OneForm, b: OneForm) -> TwoForm:
    if a.chart != b.chart:
        raise TypeError("forms live on different charts")
    comps = tuple(
        ex.sub(ex.mul(a.components[i], b.components[j]), ex.mul(a.components[j], b.components[i]))
        for i, j in _pairs(a.chart.dim)
    )
    return TwoForm(a.chart, comps)


# -- coordinate exterior calculus ---------------------------------------------------


def exterior_derivative(alpha, chart: Chart | None = None):
    """``d`` of a function (needs ``chart``), 1-form or 2-form."""
    if isinstance(alpha, (int, float)):
        alpha = ex.Const(float(alpha))
    if isinstance(alpha, Expr):
        if chart is None:
            raise TypeError("the chart is required to differentiate a bare expression")
        return OneForm(chart, ex.gradient(alpha, chart.dim))
    if isinstance(alpha, OneForm):
        a = alpha.components
        comps = tuple(
            ex.sub(ex.differentiate(a[j], i), ex.differentiate(a[i], j)) for i, j in _pairs(alpha.chart.dim)
        )
        return TwoForm(alpha.chart, comps)
    if isinstance(alpha, TwoForm):
        comps = []
        for i, j, k in _triples(alpha.chart.dim):
            term = ex.sub(
                ex.differentiate(alpha.coefficient(j, k), i), ex.differentiate(alpha.coefficient(i, k), j)
            )
            comps.append(ex.add(term, ex.differentiate(alpha.coefficient(i, j), k)))
        return ThreeForm(alpha.chart, tuple(comps))
    raise TypeError(f"cannot differentiate {type(alpha).__name__}")


d = exterior_derivative


def contract(X: VectorField, alpha):
    """Interior product ``X ⌟ alpha``; for 2-forms ``(X⌟a)_i = sum_j X^j a_ji``."""
    if X.chart != alpha.chart:
        raise TypeError("field and form live on different charts")
    dim = X.chart.dim
    xs = X.components
    if isinstance(alpha, OneForm):
        return ex.total(ex.mul(x, a) for x, a in zip(xs, alpha.components))
    if isinstance(alpha, TwoForm):
        return OneForm(X.chart, tuple(ex.total(ex.mul(xs[j], alpha.coefficient(j, i)) for j in range(dim)) for i in range(dim)))
    if isinstance(alpha, ThreeForm):
        comps = tuple(
            ex.total(ex.mul(xs[c], alpha.coefficient(c, a, b)) for c in range(dim)) for a, b in _pairs(dim)
        )
        return TwoForm(X.chart, comps)
    raise TypeError(f"cannot contract into {type(alpha).__name__}")


def lie_derivative(X: VectorField, alpha):
    """Lie derivative of a function or form, forms via ``X⌟d(a) + d(X⌟a)``."""
    if isinstance(alpha, (int, float)):
        return ex.ZERO
    if isinstance(alpha, Expr):
        return X(alpha)
    if isinstance(alpha, OneForm):
        return contract(X, exterior_derivative(alpha)) + exterior_derivative(contract(X, alpha), X.chart)
    if isinstance(alpha, TwoForm):
        return contract(X, exterior_derivative(alpha)) + exterior_derivative(contract(X, alpha))
    raise TypeError(f"cannot take the Lie derivative of {type(alpha).__name__}")


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """``[X, Y]^k = X(Y^k) - Y(X^k)``."""
    if X.chart != Y.chart:
        raise TypeError("fields live on different charts")
    return VectorField(X.chart, tuple(ex.sub(X(y), Y(x)) for x, y in zip(X.components, Y.components)))


# -- the four structures --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Structure:
    """Structure forms of a chart: the 2-form plus the kind's 1-forms."""

    chart: Chart
    two_form: TwoForm
    theta: OneForm | None = None
    eta: OneForm | None = None

    @property
    def one_forms(self) -> list[OneForm]:
        return [f for f in (self.theta, self.eta) if f is not None]

    @property
    def dtheta(self) -> TwoForm | None:
        return self.two_form if self.theta is not None else None

    def forms(self) -> dict[str, Form]:
        """Named structure forms, the ones a canonical transformation preserves."""
        kind = self.chart.kind
        if kind is Geometry.SYMPLECTIC:
            return {"omega": self.two_form}
        if kind is Geometry.COSYMPLECTIC:
            return {"Omega": self.two_form, "eta": self.eta}
        if kind is Geometry.CONTACT:
            return {"theta": self.theta}
        return {"theta": self.theta, "eta": self.eta}


@lru_cache(maxsize=None)
def _build_structure(chart: Chart) -> Structure:
    n = chart.n
    omega = TwoForm.from_coefficients(chart, {(chart.q(i), chart.p(i)): 1.0 for i in range(n)})
    if chart.kind is Geometry.SYMPLECTIC:
        return Structure(chart, omega)
    eta = OneForm.basis(chart, chart.t) if chart.has_t else None
    if chart.kind is Geometry.COSYMPLECTIC:
        return Structure(chart, omega, eta=eta)
    comps = [ex.ZERO] * chart.dim
    for i in range(n):
        comps[chart.q(i)] = ex.neg(ex.Coord(chart.p(i)))
    comps[chart.z] = ex.ONE
    theta = OneForm(chart, tuple(comps))
    return Structure(chart, exterior_derivative(theta), theta=theta, eta=eta)


def structure(chart: Chart) -> Structure:
    return chart.structure


def reeb(chart: Chart) -> tuple[VectorField, ...]:
    return chart.reeb


def hamiltonian_vector_field(chart: Chart, f: Expr) -> VectorField:
    """Hamiltonian vector field of ``f`` by the Darboux formula of the chart's kind."""
    f = ex.as_expr(f)
    n = chart.n
    comps = [ex.ZERO] * chart.dim
    fp = [ex.differentiate(f, chart.p(i)) for i in range(n)]
    fq = [ex.differentiate(f, chart.q(i)) for i in range(n)]
    if chart.has_z:
        fz = ex.differentiate(f, chart.z)
        for i in range(n):
            p_i = ex.Coord(chart.p(i))
            comps[chart.q(i)] = fp[i]
            comps[chart.p(i)] = ex.neg(ex.add(fq[i], ex.mul(p_i, fz)))
        comps[chart.z] = ex.sub(ex.total(ex.mul(ex.Coord(chart.p(i)), fp[i]) for i in range(n)), f)
    else:
        for i in range(n):
            comps[chart.q(i)] = fp[i]
            comps[chart.p(i)] = ex.neg(fq[i])
    return VectorField(chart, tuple(comps))


def evolution_field(chart: Chart, H: Expr) -> VectorField:
    """The dynamics: ``X_H``, plus the (time) Reeb field when the chart has ``t``."""
    XH = hamiltonian_vector_field(chart, H)
    if chart.has_t:
        return XH + VectorField.basis(chart, chart.t)
    return XH


def bracket(chart: Chart, f: Expr, g: Expr) -> Expr:
    """Poisson bracket (symplectic/cosymplectic) or Jacobi bracket (contact/cocontact)."""
    f, g = ex.as_expr(f), ex.as_expr(g)
    n = chart.n
    terms = []
    for i in range(n):
        qi, pi = chart.q(i), chart.p(i)
        terms.append(ex.mul(ex.differentiate(f, qi), ex.differentiate(g, pi)))
        terms.append(ex.neg(ex.mul(ex.differentiate(f, pi), ex.differentiate(g, qi))))
    result = ex.total(terms)
    if chart.has_z:

        def euler(h):
            return ex.sub(ex.total(ex.mul(ex.Coord(chart.p(i)), ex.differentiate(h, chart.p(i))) for i in range(n)), h)

        result = ex.add(result, ex.mul(ex.differentiate(f, chart.z), euler(g)))
        result = ex.sub(result, ex.mul(ex.differentiate(g, chart.z), euler(f)))
    return result


def flat(X: VectorField) -> OneForm:
    """Musical isomorphism ``X -> X⌟two_form + sum (X⌟a) a`` over the 1-forms."""
    s = X.chart.structure
    out = contract(X, s.two_form)
    for alpha in s.one_forms:
        out = out + alpha * contract(X, alpha)
    return out


def nondegeneracy(chart: Chart, dom: SampleDomain | None = None) -> float:
    """Smallest ``|det|`` of the musical isomorphism over sample points.

    Non-zero exactly when the top power (``omega^n``, ``eta ^ Omega^n``,
    ``theta ^ dtheta^n`` or ``eta ^ theta ^ dtheta^n``) does not vanish.
    """
    dom = dom or chart.default_domain()
    columns = [flat(VectorField.basis(chart, j)).components for j in range(chart.dim)]
    exprs = tuple(c for col in columns for c in col)
    pts = dom.candidates(0, dom.samples)
    values, _ = ex.evaluate_many(exprs, pts)
    d_ = chart.dim
    mats = values.reshape(d_, d_, -1).transpose(2, 1, 0)
    return float(np.min(np.abs(np.linalg.det(mats))))


def parse_field(chart: Chart, text: str) -> VectorField:
    """Parse ``"e1; e2; ..."`` into a vector field in chart coordinate order."""
    parts = [p for p in text.split(";")]
    if len(parts) == 1 and not parts[0].strip():
        raise ParseError("empty vector field")
    if len(parts) != chart.dim:
        raise ParseError(
            f"a {chart.kind.value} field with n={chart.n} needs {chart.dim} components "
            f"({', '.join(chart.names)}), got {len(parts)}"
        )
    return VectorField(chart, tuple(parse(p, chart) for p in parts))


def parse_one_form(chart: Chart, text: str) -> OneForm:
    field_ = parse_field(chart, text)
    return OneForm(chart, field_.components)


def vector_values(components: Sequence[Expr], points: np.ndarray, delta: float = 0.0):
    """Evaluate components at points ``(dim, N)``; returns ``(values, bad)``."""
    return ex.evaluate_many(tuple(components), points, delta)
