import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamsym import expr as ex
from hamsym.errors import DomainError, ParseError, SamplingExhaustedError, UnknownIdentifierError
from hamsym.geometry import Chart, OneForm, TwoForm, contract, lie_derivative, parse_field, structure
from hamsym.sampling import SampleDomain, equal_on_samples

from strategies import expressions

CONTACT = Chart("contact", 1)
SYMPLECTIC = Chart("symplectic", 1)


def value(text, chart, point):
    return ex.evaluate(chart.parse(text), point)


class TestParse:
    def test_contact_hamiltonian_value(self):
        assert value("p^2/2 - 1/q - 1/z^2", CONTACT, [1, 1, 1]) == pytest.approx(-1.5, abs=1e-15)

    def test_zero_is_constant(self):
        for kind in ("symplectic", "cosymplectic", "contact", "cocontact"):
            e = Chart(kind, 2).parse("0")
            assert isinstance(e, ex.Const) and e.value == 0.0

    def test_out_of_range_identifier(self):
        with pytest.raises(UnknownIdentifierError) as info:
            Chart("symplectic", 2).parse("p3")
        assert info.value.name == "p3"

    def test_aliases_only_for_n1(self):
        assert value("q + 2*p", SYMPLECTIC, [3, 5]) == 13
        with pytest.raises(UnknownIdentifierError):
            Chart("symplectic", 2).parse("q")

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError) as info:
            CONTACT.parse("q + * p")
        assert info.value.position == 4

    @pytest.mark.parametrize("text", ["", "q +", "(q", "q)", "sin q", "q^p", "2 3", "2^3^2"])
    def test_rejects(self, text):
        with pytest.raises(ParseError):
            CONTACT.parse(text)

    @pytest.mark.parametrize(
        "text, expected",
        [
            ("-q^2", -4.0),
            ("-2*q", -4.0),
            ("q - p - z", 2 - 3 - 5),
            ("q/p/z", 2 / 3 / 5),
            ("exp(log(q)) + sqrt(z*5)", 2 + 5),
            ("1.5e1 * .5", 7.5),
            ("p^-1", 1 / 3),
        ],
    )
    def test_arithmetic_meaning(self, text, expected):
        assert value(text, CONTACT, [2, 3, 5]) == pytest.approx(expected, rel=1e-15)


class TestDifferentiate:
    def check(self, text, index, expected, point):
        d = ex.differentiate(CONTACT.parse(text), index)
        assert ex.evaluate(d, point) == pytest.approx(value(expected, CONTACT, point), rel=1e-14)

    def test_examples(self):
        pt = [1.3, 0.7, 1.9]
        self.check("q^2", 0, "2*q", pt)
        self.check("-1/z^2", 2, "2/z^3", pt)
        self.check("p*q + z", 1, "q", pt)

    def test_constant_folds_to_zero(self):
        assert ex.differentiate(CONTACT.parse("p*z"), 0) == ex.ZERO

    @settings(max_examples=60, deadline=None)
    @given(expressions(3), st.integers(0, 2))
    def test_matches_central_differences(self, e, index):
        # independent oracle: 4th-order finite differences
        rng = np.random.default_rng(7)
        pts = rng.uniform(0.5, 2.0, (3, 20))
        step = 1e-3
        shifted = []
        for k in (2, 1, -1, -2):
            y = pts.copy()
            y[index] += k * step
            shifted.append(ex.evaluate_many((e,), y)[0][0])
        fd = (-shifted[0] + 8 * shifted[1] - 8 * shifted[2] + shifted[3]) / (12 * step)
        exact = ex.evaluate_many((ex.differentiate(e, index),), pts)[0][0]
        scale = 1 + np.max(np.abs(exact))
        assert np.max(np.abs(fd - exact)) < 1e-5 * scale

    @settings(max_examples=60, deadline=None)
    @given(expressions(3), expressions(3), st.integers(0, 2))
    def test_product_rule(self, f, g, i):
        pts = np.random.default_rng(1).uniform(0.5, 2.0, (3, 200))
        lhs = ex.differentiate(ex.mul(f, g), i)
        rhs = ex.add(ex.mul(ex.differentiate(f, i), g), ex.mul(f, ex.differentiate(g, i)))
        a = ex.evaluate_many((lhs, rhs), pts)[0]
        assert np.max(np.abs(a[0] - a[1])) < 1e-9 * (1 + np.max(np.abs(a)))

    @settings(max_examples=40, deadline=None)
    @given(expressions(3), expressions(3), st.integers(-3, 3), st.integers(0, 2))
    def test_linearity(self, f, g, c, i):
        pts = np.random.default_rng(2).uniform(0.5, 2.0, (3, 50))
        lhs = ex.differentiate(ex.add(f, ex.mul(ex.Const(c), g)), i)
        rhs = ex.add(ex.differentiate(f, i), ex.mul(ex.Const(c), ex.differentiate(g, i)))
        a = ex.evaluate_many((lhs, rhs), pts)[0]
        assert np.max(np.abs(a[0] - a[1])) < 1e-9 * (1 + np.max(np.abs(a)))


class TestEvaluate:
    def test_zero(self):
        assert ex.evaluate(ex.ZERO, [3.0, -1.0, 2.0]) == 0.0

    def test_division_by_zero_carries_point(self):
        with pytest.raises(DomainError) as info:
            value("1/q", CONTACT, [0.0, 1.0, 1.0])
        assert info.value.point == (0.0, 1.0, 1.0)

    @pytest.mark.parametrize("text", ["log(q - 2)", "sqrt(-q)", "q^0.5 * (q - 3)^0.5"])
    def test_domain_errors(self, text):
        with pytest.raises(DomainError):
            value(text, CONTACT, [1.0, 1.0, 1.0])

    def test_fractional_power_needs_positive_base(self):
        with pytest.raises(DomainError):
            value("(q - 2)^1.5", CONTACT, [1.0, 1.0, 1.0])
        assert value("(q - 2)^3", CONTACT, [1.0, 1.0, 1.0]) == -1.0

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            ex.evaluate(CONTACT.parse("z"), [1.0, 2.0])


class TestRoundTrip:
    @settings(max_examples=80, deadline=None)
    @given(expressions(3))
    def test_print_parse(self, e):
        pts = np.random.default_rng(3).uniform(0.5, 2.0, (3, 100))
        again = CONTACT.parse(CONTACT.format(CONTACT.parse(CONTACT.format(e))))
        a = ex.evaluate_many((e, again), pts)[0]
        assert np.max(np.abs(a[0] - a[1])) < 1e-12 * (1 + np.max(np.abs(a)))

    def test_negative_constants_print_parenthesised(self):
        e = ex.power(ex.neg(ex.Coord(0)), 2.0)
        assert value(CONTACT.format(e), CONTACT, [3, 0, 0]) == 9.0


class TestEqualOnSamples:
    def test_omega(self):
        dq, dp = OneForm.basis(SYMPLECTIC, 0), OneForm.basis(SYMPLECTIC, 1)
        from hamsym.geometry import wedge

        r = equal_on_samples(wedge(dq, dp), structure(SYMPLECTIC).two_form, SYMPLECTIC.default_domain())
        assert r.verdict and r.max_residual == 0.0

    def test_scaling_lie_derivative(self):
        X = parse_field(CONTACT, "2*q; -p; z")
        theta = structure(CONTACT).theta
        assert equal_on_samples(lie_derivative(X, theta), theta, CONTACT.default_domain())

    def test_witness(self):
        a = OneForm(SYMPLECTIC, (ex.ZERO, SYMPLECTIC.parse("q")))
        b = OneForm.basis(SYMPLECTIC, 1)
        r = equal_on_samples(a, b, SYMPLECTIC.default_domain())
        assert not r.verdict
        assert r.witness is not None and abs(r.witness[0] - 1) > 0
        assert r.max_residual == pytest.approx(abs(r.witness[0] - 1))

    def test_kind_mismatch(self):
        with pytest.raises(TypeError):
            equal_on_samples(OneForm.basis(SYMPLECTIC, 0), structure(SYMPLECTIC).two_form,
                             SYMPLECTIC.default_domain())

    def test_sampling_exhausted(self):
        dom = SampleDomain.default(1, samples=10)
        with pytest.raises(SamplingExhaustedError):
            equal_on_samples(ex.div(ex.ONE, ex.sub(ex.Coord(0), ex.Coord(0))), 0, dom)

    def test_domain_is_reproducible(self):
        dom = CONTACT.default_domain()
        e = CONTACT.parse("q*p - z")
        r1, r2 = equal_on_samples(e, 0, dom), equal_on_samples(e, 0, dom)
        assert np.array_equal(r1.points, r2.points)
        other = equal_on_samples(e, 0, dom.with_(seed=43))
        assert not np.array_equal(r1.points, other.points)

    @settings(max_examples=40, deadline=None)
    @given(expressions(3), expressions(3), st.floats(1e-12, 1.0), st.floats(1.0, 1e3))
    def test_symmetric_and_monotone(self, a, b, tol, factor):
        dom = CONTACT.default_domain(samples=30)
        ab, ba = equal_on_samples(a, b, dom, tol), equal_on_samples(b, a, dom, tol)
        assert ab.verdict == ba.verdict and ab.max_residual == ba.max_residual
        if ab.verdict:
            assert equal_on_samples(a, b, dom, tol * factor).verdict

    def test_contraction_vanishing(self):
        R = Chart("cosymplectic", 1).reeb[0]
        assert equal_on_samples(contract(R, structure(R.chart).two_form), 0, R.chart.default_domain())


def test_two_form_storage_is_upper_triangular():
    w = TwoForm.from_coefficients(CONTACT, {(2, 0): ex.ONE})
    assert w.coefficient(0, 2) == ex.Const(-1.0)
    assert w.coefficient(2, 0) == ex.ONE
    assert w.coefficient(1, 1) == ex.ZERO
    assert math.isclose(w.matrix([0, 0, 0])[0, 2], -1.0)
