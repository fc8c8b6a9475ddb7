"""Tests for polynomial algebra and the ACOPF polynomial programs."""

import numpy as np
import pytest

from polyopf.errors import VariableSpaceMismatchError
from polyopf.network import objective_value
from polyopf.poly import Monomial, Polynomial, PolyProgram, build_op2, build_op4, lift_point, monomials_up_to


def naive_product(p: Polynomial, q: Polynomial):
    """Term-by-term product over exponent vectors."""
    out = {}
    for m1, c1 in p.terms.items():
        for m2, c2 in q.terms.items():
            exps = m1.exponents()
            for i, e in m2.exponents().items():
                exps[i] = exps.get(i, 0) + e
            key = tuple(sorted(exps.items()))
            out[key] = out.get(key, 0.0) + c1 * c2
    return {k: v for k, v in out.items() if v != 0.0}


def random_poly(rng, nvars, degree, nterms):
    terms = {}
    for _ in range(nterms):
        d = int(rng.integers(0, degree + 1))
        mono = Monomial.from_indices(rng.integers(0, nvars, size=d).tolist())
        terms[mono] = float(rng.normal())
    return Polynomial(nvars, terms)


class TestMonomial:
    def test_product_and_degree(self):
        m = Monomial.var(0) * Monomial.var(2, 2) * Monomial.var(0)
        assert m.powers == ((0, 2), (2, 2))
        assert m.degree == 4
        assert m.variables == (0, 2)

    def test_one_is_identity(self):
        m = Monomial.from_indices([1, 1, 3])
        assert m * Monomial.one() == m
        assert Monomial.var(5, 0) == Monomial.one()

    def test_graded_lex_order(self):
        basis = monomials_up_to([0, 1], 2)
        assert [m.render() for m in basis] == ["1", "x0", "x1", "x0^2", "x0*x1", "x1^2"]
        assert sorted(reversed(basis)) == basis

    def test_basis_size(self):
        assert len(monomials_up_to(range(4), 2)) == 15
        assert len(monomials_up_to(range(4), 0)) == 1

    def test_divides(self):
        assert Monomial.var(1).divides(Monomial.from_indices([1, 2]))
        assert not Monomial.var(1, 2).divides(Monomial.from_indices([1, 2]))


class TestPolynomial:
    def test_zero_terms_dropped(self):
        x0 = Polynomial.variable(2, 0)
        assert (x0 - x0).is_zero()
        assert len(x0 + 0.0) == 1

    def test_product_matches_naive_convolution(self, rng):
        for _ in range(5):
            p = random_poly(rng, 3, 3, 6)
            q = random_poly(rng, 3, 3, 6)
            product = p * q
            expected = naive_product(p, q)
            got = {m.powers: c for m, c in product.terms.items()}
            assert set(got) == set(expected)
            for key, value in expected.items():
                assert got[key] == pytest.approx(value)

    def test_evaluate(self):
        x = Polynomial.variable(2, 0)
        y = Polynomial.variable(2, 1)
        p = 3.0 * x * x * y - 2.0 * y + 1.0
        assert p.evaluate([2.0, 0.5]) == pytest.approx(3.0 * 4 * 0.5 - 1.0 + 1.0)
        assert p([2.0, 0.5]) == p.evaluate([2.0, 0.5])
        assert p.degree == 3
        assert p.support() == (0, 1)
        assert p.constant_term() == 1.0

    def test_power(self):
        x = Polynomial.variable(1, 0)
        assert (x + 1.0) ** 2 == x * x + 2.0 * x + 1.0

    def test_quadratic_form_matches_matrix(self, rng):
        a = rng.normal(size=(3, 3))
        a = a + a.T
        p = Polynomial.quadratic_form(3, a)
        x = rng.normal(size=3)
        assert p.evaluate(x) == pytest.approx(x @ a @ x)

    def test_numpy_scalar_on_the_left(self):
        x = Polynomial.variable(1, 0)
        p = np.float64(2.0) * x
        assert isinstance(p, Polynomial)
        assert p.coefficient(Monomial.var(0)) == 2.0

    def test_variable_space_mismatch(self):
        with pytest.raises(VariableSpaceMismatchError):
            Polynomial.variable(2, 0) + Polynomial.variable(3, 0)
        with pytest.raises(VariableSpaceMismatchError):
            Polynomial(2, {Monomial.var(4): 1.0})
        with pytest.raises(VariableSpaceMismatchError):
            Polynomial.variable(2, 0).evaluate([1.0, 2.0, 3.0])


class TestPolyProgram:
    def test_default_labels_and_feasibility(self):
        x = Polynomial.variable(1, 0)
        pp = PolyProgram(nvars=1, objective=x, inequalities=[1.0 - x * x])
        pp.add_equality(x - 0.5)
        assert pp.inequality_labels == ["g0"]
        assert pp.equality_labels == ["h0"]
        assert pp.is_feasible([0.5])
        assert not pp.is_feasible([0.4])
        assert pp.degree == 2

    def test_with_inequalities_copies(self):
        x = Polynomial.variable(1, 0)
        pp = PolyProgram(nvars=1, objective=x, inequalities=[1.0 - x * x])
        more = pp.with_inequalities([x + 1.0], ["lower"])
        assert more.inequality_labels == ["g0", "lower"]
        assert len(pp.inequalities) == 1

    def test_mismatched_constraint(self):
        with pytest.raises(VariableSpaceMismatchError):
            PolyProgram(nvars=1, objective=Polynomial.variable(2, 1))


class TestFormulations:
    def test_wb2_op4_shape(self, wb2_net):
        net, mats = wb2_net
        pp = build_op4(net, mats)
        assert pp.nvars == 4
        assert pp.var_names == ["ReV[1]", "ReV[2]", "ImV[1]", "ImV[2]"]
        # bus 2 has no generator: fixed injections become equalities
        assert pp.equality_labels == ["P[2]_fix", "Q[2]_fix"]
        assert len(pp.inequalities) == 9
        assert pp.inequality_labels[-1] == "ball"
        # c2 = 0 and no flow limits: nothing quartic survives
        assert pp.degree == 2
        assert pp.nominal_degree == 4

    def test_lmbm3_degrees(self, lmbm3_net):
        net, mats = lmbm3_net
        op4 = build_op4(net, mats)
        op2 = build_op2(net, mats)
        assert op4.degree == 4
        assert op2.degree == 2
        # two quadratic-cost generators and both ends of one limited branch
        assert op2.nvars == 2 * net.n + 2 + 4
        for label in ("S[3-2]_max", "S[2-3]_max"):
            assert label in op2.inequality_labels
            assert label in op4.inequality_labels

    def test_lifted_point_agrees_across_formulations(self, lmbm3_net, rng):
        net, mats = lmbm3_net
        op4 = build_op4(net, mats)
        op2 = build_op2(net, mats)
        v = rng.uniform(0.95, 1.05, net.n) * np.exp(1j * rng.uniform(-0.2, 0.2, net.n))
        x = np.concatenate([v.real, v.imag])
        full = lift_point(op2, net, x, mats)
        for label, h in zip(op2.equality_labels, op2.equalities):
            if label.endswith("_def"):
                assert h.evaluate(full) == pytest.approx(0.0, abs=1e-10)
        cost = objective_value(net, x, mats)
        assert op4.objective.evaluate(x) == pytest.approx(cost)
        assert op2.objective.evaluate(full) == pytest.approx(cost)
        for label in ("S[3-2]_max", "S[2-3]_max"):
            s2 = dict(zip(op2.inequality_labels, op2.inequalities))[label].evaluate(full)
            s4 = dict(zip(op4.inequality_labels, op4.inequalities))[label].evaluate(x)
            assert s2 == pytest.approx(s4)

    def test_dump_is_deterministic(self, lmbm3_net):
        net, mats = lmbm3_net
        first = build_op2(net, mats).dump()
        assert first == build_op2(net, mats).dump()
        assert first.startswith("# LMBM3/op2: 12 variables, degree 2")
        assert "eq Pg[1]_def:" in first

