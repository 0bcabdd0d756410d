import numpy as np
import pytest

from hamsym import expr as ex
from hamsym.errors import DegenerateHamiltonianError, UnsupportedGeometryError
from hamsym.geometry import Chart, OneForm, contract, flat, lie_bracket, parse_one_form
from hamsym.symmetry import (
    HamiltonianSystem,
    check_scaling_primitive,
    classify,
    is_canonoid_generator,
    is_constant_of_motion,
    is_dissipated_quantity,
    is_dynamical_symmetry,
    is_hamiltonian_field,
    is_infinitesimal_symmetry,
    noether_check,
    noether_field_check,
    scaling_degree,
)

from strategies import KINDS, random_polynomial

EX2 = ("cosymplectic", 2, "(p1^2+p2^2)/2 + t*q1")
CONTACT_H = "p^2/2 - 1/q - 1/z^2"
CONTACT_X = "2*q; -p; z"


def system(kind, n, H):
    return HamiltonianSystem.from_text(kind, n, H)


@pytest.fixture(scope="module")
def ex2():
    return system(*EX2)


@pytest.fixture(scope="module")
def contact():
    return system("contact", 1, CONTACT_H)


@pytest.fixture(scope="module")
def linear_contact():
    return system("contact", 1, "p*q + z")


class TestFunctions:
    def test_ex2_constant(self, ex2):
        r = is_constant_of_motion(ex2, "p2")
        assert r.verdict and r.max_residual == 0.0

    def test_symplectic_hamiltonian_conserved(self):
        s = system("symplectic", 2, "p1^2/2 + p2^2/2 - 1/sqrt(q1^2 + q2^2)")
        assert is_constant_of_motion(s, s.H).verdict

    def test_ex2_p1_not_constant(self, ex2):
        r = is_constant_of_motion(ex2, "p1")
        assert not r.verdict
        # E_H p1 = -t at the witness
        assert r.max_residual == pytest.approx(max(abs(r.witness[-1]), r.max_residual))
        assert r.witness is not None

    def test_hamiltonian_dissipated(self, contact, linear_contact):
        assert is_dissipated_quantity(contact, contact.H).verdict
        assert is_dissipated_quantity(linear_contact, linear_contact.H).verdict

    def test_q_not_dissipated(self, contact):
        assert not is_dissipated_quantity(contact, "q").verdict

    def test_time_dependent_cocontact_hamiltonian(self):
        s = system("cocontact", 1, "p^2/2 + t*q + z")
        assert not is_dissipated_quantity(s, s.H).verdict
        assert is_dissipated_quantity(system("cocontact", 1, "p^2/2 + z"), "p^2/2 + z").verdict

    def test_dissipation_needs_reeb(self, ex2):
        with pytest.raises(UnsupportedGeometryError):
            is_dissipated_quantity(ex2, "p2")


class TestNoether:
    def test_contact_minus_z(self, linear_contact):
        r = noether_check(linear_contact, "-z")
        assert r.forward.verdict and r.reverse.verdict

    def test_ex2(self, ex2):
        r = noether_check(ex2, "p2")
        assert r.forward.verdict and r.reverse.verdict and r.agree

    def test_symplectic_q(self):
        r = noether_check(system("symplectic", 1, "(q^2+p^2)/2"), "q")
        assert not r.forward.verdict and not r.reverse.verdict

    @pytest.mark.parametrize("kind", KINDS)
    def test_biconditional_random(self, kind):
        rng = np.random.default_rng(KINDS.index(kind))
        chart = Chart(kind, 1)
        time_free = [i for i in range(chart.dim) if i != chart.t]
        agreed = 0
        for k in range(10):
            H = random_polynomial(rng, chart.dim)
            if k % 2:
                # drop t so that H itself is a candidate conserved/dissipated function
                H = ex.total([random_polynomial(rng, len(time_free))])
                H = _relabel(H, time_free)
            sys_ = HamiltonianSystem(chart, H)
            for f in (random_polynomial(rng, chart.dim), H, ex.mul(ex.Const(2.0), H)):
                r = noether_check(sys_, f)
                assert r.agree, (kind, chart.format(H), chart.format(f), r.to_dict())
                agreed += r.forward.verdict
        assert agreed >= 5

    def test_field_converse(self, ex2):
        assert noether_field_check(ex2, "0; 1; 0; 0; 0").agree
        assert noether_field_check(ex2, "1; 0; 0; 0; 0").agree


def _relabel(e, targets):
    # rename Coord(i) -> Coord(targets[i])
    mapping = {i: ex.Coord(t) for i, t in enumerate(targets)}

    def walk(node):
        if isinstance(node, ex.Coord):
            return mapping[node.index]
        if isinstance(node, ex.Const):
            return node
        if isinstance(node, ex.Pow):
            return ex.power(walk(node.base), node.exponent)
        if isinstance(node, ex.Neg):
            return ex.neg(walk(node.arg))
        if isinstance(node, ex.Func):
            return ex.func(node.name, walk(node.arg))
        op = {ex.Add: ex.add, ex.Sub: ex.sub, ex.Mul: ex.mul, ex.Div: ex.div}[type(node)]
        return op(walk(node.left), walk(node.right))

    return walk(e)


class TestFieldPredicates:
    def test_ex2_translation(self, ex2):
        assert is_infinitesimal_symmetry(ex2, "0; 1; 0; 0; 0").verdict

    def test_contact_scaling_not_infinitesimal(self, contact):
        assert not is_infinitesimal_symmetry(contact, CONTACT_X).verdict

    @pytest.mark.parametrize("kind", KINDS)
    def test_zero_field(self, kind):
        s = HamiltonianSystem(Chart(kind, 1), random_polynomial(np.random.default_rng(1), Chart(kind, 1).dim))
        zero = "; ".join(["0"] * s.chart.dim)
        assert is_infinitesimal_symmetry(s, zero).verdict
        assert is_dynamical_symmetry(s, zero).verdict

    def test_dynamics_is_dynamical_symmetry(self, contact, ex2):
        assert is_dynamical_symmetry(contact, contact.XH).verdict
        assert is_dynamical_symmetry(ex2, ex2.EH).verdict

    def test_linear_scaling_dynamical(self, linear_contact):
        assert is_dynamical_symmetry(linear_contact, "0; p; z").verdict

    def test_contact_scaling_not_dynamical(self, contact):
        assert not is_dynamical_symmetry(contact, CONTACT_X).verdict

    def test_time_kinds_report_halves(self, ex2):
        r = is_dynamical_symmetry(ex2, "0; 1; 0; 0; 0")
        assert [p.name for p in r.parts] == ["[W, dynamics] = 0", "[W, X_H] = 0", "[W, R_t] = 0"]


class TestScaling:
    def test_contact_degree(self, contact):
        r = scaling_degree(contact, CONTACT_X)
        assert abs(r.degree + 2) < 1e-9

    def test_linear_degree(self, linear_contact):
        assert abs(scaling_degree(linear_contact, "0; p; z").degree - 1) < 1e-9

    def test_kepler_degree(self):
        s = system("symplectic", 1, "p^2/2 - 1/q")
        assert abs(scaling_degree(s, "2*q; -p").degree + 2) < 1e-9

    def test_not_scaling(self, contact):
        assert scaling_degree(contact, "1; 0; 0").degree is None

    def test_structural_but_not_homogeneous(self):
        s = system("symplectic", 1, "p^2/2 + q")
        r = scaling_degree(s, "q/2; p/2")
        assert r.structural.verdict and r.degree is None

    def test_degenerate(self):
        s = system("symplectic", 1, "0")
        with pytest.raises(DegenerateHamiltonianError):
            scaling_degree(s, "q/2; p/2")

    SCALINGS = [
        ("symplectic", 1, "p^2/2 - 1/q", "2*q; -p"),
        ("symplectic", 2, "p1*p2 + q1*q2 + p1^2", "q1/2; q2/2; p1/2; p2/2"),
        ("cosymplectic", 1, "p^2/2 - t/q", "2*q; -p; 0"),
        ("contact", 1, CONTACT_H, CONTACT_X),
        ("contact", 1, "p*q + z", "0; p; z"),
        ("contact", 2, "p1*q1 + p2*q2^2 + z", "0; 0; p1; p2; z"),
        ("cocontact", 1, "p*q*t + z", "0; p; z; 0"),
        ("cocontact", 1, "p^2*z^2 + t*q*z", "q; 0; z; 0"),
    ]

    @pytest.mark.parametrize("kind, n, H, X", SCALINGS)
    def test_lemma_and_corollary(self, kind, n, H, X):
        s = system(kind, n, H)
        Xf = s.field(X)
        lam = scaling_degree(s, Xf).degree
        assert lam is not None
        assert s.compare(lie_bracket(Xf, s.XH), s.XH * (lam - 1), 1e-8).verdict
        assert not is_infinitesimal_symmetry(s, Xf).verdict
        c = is_canonoid_generator(s, Xf)
        assert c.verdict
        pts = np.random.default_rng(0).uniform(0.6, 1.9, (s.chart.dim, 20))
        want = (lam - 1) * ex.evaluate_many((s.H,), pts)[0][0]
        got = c.bracket_hamiltonian(pts)
        if c.bracket_hamiltonian.gauge is not None:
            ref = c.bracket_hamiltonian.gauge_points(pts)
            got = got - c.bracket_hamiltonian(ref)
            want = want - (lam - 1) * ex.evaluate_many((s.H,), ref)[0][0]
        assert np.max(np.abs(got - want)) < 1e-6
        if s.chart.has_t:
            Rz = s.reeb[0]
            if s.chart.has_z:
                assert s.compare(lie_bracket(Xf, Rz), -Rz).verdict
            assert s.compare(lie_bracket(Xf, s.time_reeb), 0).verdict


class TestHamiltonianField:
    @pytest.mark.parametrize("kind, n, H", [
        ("symplectic", 1, "p^2/2 - 1/q"),
        ("cosymplectic", 2, EX2[2]),
        ("contact", 1, CONTACT_H),
        ("cocontact", 1, "p^2/2 + t*q*z"),
    ])
    def test_recovers_hamiltonian(self, kind, n, H):
        s = system(kind, n, H)
        r = is_hamiltonian_field(s, s.XH)
        assert r.verdict
        pts = np.random.default_rng(3).uniform(0.6, 1.9, (s.chart.dim, 10))
        h = ex.evaluate_many((s.H,), pts)[0][0]
        g = r.g(pts)
        if r.g.gauge is None:
            assert np.max(np.abs(g - h)) < 1e-9
        else:
            ref = r.g.gauge_points(pts)
            d = (g - r.g(ref)) - (h - ex.evaluate_many((s.H,), ref)[0][0])
            assert np.max(np.abs(d)) < 1e-6

    def test_translation_potential(self):
        s = system("symplectic", 1, "p^2/2")
        r = is_hamiltonian_field(s, "1; 0")
        assert r.verdict
        pts = np.array([[0.7, 1.2, 1.8], [0.5, 1.5, 1.9]])
        g = r.g(pts) - r.g(np.ones((2, 1)))
        assert np.allclose(g, pts[1] - 1, atol=1e-9)

    def test_not_closed(self):
        s = system("symplectic", 1, "p^2/2")
        r = is_hamiltonian_field(s, "q; 0")
        assert not r.verdict and r.g is None
        assert r.check.witness is not None

    def test_linear_contact_minus_z(self, linear_contact):
        r = is_hamiltonian_field(linear_contact, "0; p; z")
        pts = np.random.default_rng(4).uniform(0.5, 2.0, (3, 100))
        assert r.verdict and np.max(np.abs(r.g(pts) + pts[2])) < 1e-9


class TestCanonoid:
    def test_contact_scaling(self, contact):
        c = is_canonoid_generator(contact, CONTACT_X)
        assert c.verdict and c.formula_check.verdict
        assert contact.compare(c.bracket_hamiltonian_expr, ex.mul(ex.Const(-3.0), contact.H), 1e-6).verdict

    def test_kepler_K_is_H(self):
        s = system("symplectic", 1, "p^2/2 - 1/q")
        c = is_canonoid_generator(s, "2*q; -p")
        assert c.verdict and c.formula_check.verdict and c.K_invariance.verdict
        pts = np.random.default_rng(5).uniform(0.6, 1.9, (2, 20))
        ref = c.K.gauge_points(pts)
        h = ex.evaluate_many((s.H,), np.concatenate([pts, ref], axis=1))[0][0]
        d = (c.K(pts) - c.K(ref)) - (h[:20] - h[20:])
        assert np.max(np.abs(d)) < 1e-6

    def test_non_hamiltonian_bracket(self):
        s = system("symplectic", 1, "p^2/2")
        c = is_canonoid_generator(s, "q^2; 0")
        assert not c.verdict
        assert s.compare(c.bracket_field, s.field("-2*q*p; 0")).verdict

    def test_cosymplectic_side_condition(self, ex2):
        c = is_canonoid_generator(ex2, "t; 0; 0; 0; 0")
        assert not c.verdict and not c.side_conditions.verdict


@pytest.fixture(scope="module")
def kepler_t():
    return system("cosymplectic", 1, "p^2/2 - 1/q")


class TestPrimitive:
    def test_forward_construction(self, kepler_t):
        X = kepler_t.field("2*q; -p; 0")
        lam = flat(X)
        r = check_scaling_primitive(kepler_t, lam, -2.0)
        assert r.verdict
        assert kepler_t.compare(r.reconstructed, X).max_residual < 1e-9

    def test_reeb_mutation(self, kepler_t):
        lam = flat(kepler_t.field("2*q; -p; 0")) + OneForm.basis(kepler_t.chart, kepler_t.chart.t)
        r = check_scaling_primitive(kepler_t, lam, -2.0)
        assert not r.verdict
        failed = [p for p in r.check.parts if not p.verdict]
        assert [p.name for p in failed] == ["R _| lambda = 0"] and failed[0].witness is not None

    def test_wrong_degree(self, kepler_t):
        lam = parse_one_form(kepler_t.chart, "0; q; 0")
        r = check_scaling_primitive(kepler_t, lam, 3.0)
        assert not r.verdict
        assert not r.check.parts[1].verdict

    def test_only_cosymplectic(self, contact):
        with pytest.raises(UnsupportedGeometryError):
            check_scaling_primitive(contact, OneForm.zero(contact.chart), 1.0)


class TestImplications:
    @pytest.mark.parametrize("kind", KINDS)
    def test_infinitesimal_implies_dynamical(self, kind):
        rng = np.random.default_rng(21)
        chart = Chart(kind, 1)
        for _ in range(10):
            s = HamiltonianSystem(chart, random_polynomial(rng, chart.dim))
            candidates = [s.XH, s.EH, s.field("; ".join(["0"] * chart.dim))]
            candidates.append(s.field("; ".join(chart.format(random_polynomial(rng, chart.dim))
                                                for _ in range(chart.dim))))
            for X in candidates:
                if is_infinitesimal_symmetry(s, X).verdict:
                    assert is_dynamical_symmetry(s, X).verdict

    def test_quotient_of_dissipated(self, linear_contact):
        f, g = linear_contact.H, linear_contact.parse("-z")
        assert is_dissipated_quantity(linear_contact, f).verdict
        assert is_dissipated_quantity(linear_contact, g).verdict
        assert is_constant_of_motion(linear_contact, ex.div(f, g)).verdict

    def test_cocontact_quotient(self):
        s = system("cocontact", 1, "p*q + z")
        assert is_constant_of_motion(s, ex.div(s.H, s.parse("-z"))).verdict

    def test_good_system(self):
        s = system("contact", 1, "p^2/2 + q^2")
        assert s.good
        for f in ("p^2/2 + q^2", "3*(p^2/2 + q^2)"):
            assert is_dissipated_quantity(s, f).verdict and is_constant_of_motion(s, f).verdict
        assert not system("contact", 1, "p*q + z").good


class TestClassify:
    def test_contact_example(self, contact):
        r = classify(contact, CONTACT_X)
        assert r.scaling_degree == pytest.approx(-2, abs=1e-9)
        assert r.predicate("canonoid_generator").verdict
        assert not r.predicate("infinitesimal_symmetry").verdict
        assert r.to_json() == classify(contact, CONTACT_X).to_json()

    def test_report_invariants(self, ex2):
        r = classify(ex2, "0; 1; 0; 0; 0")
        assert r.predicate("infinitesimal_symmetry").verdict
        for p in r.predicates:
            if p.verdict:
                assert p.max_residual <= 1e-6
        assert r.scaling_degree is None
        assert not r.predicate("scaling_symmetry").verdict

    def test_contraction_value(self, contact):
        # X_H _| theta = -H holds pointwise for the fixture as well
        assert contact.compare(contract(contact.XH, contact.structure.theta), ex.neg(contact.H)).verdict
