from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relnls.algebra import (
    I,
    GaussianRational,
    MultiPoly,
    NotExactDerivative,
    ParseError,
    conjugate,
    dispersion_make,
    formal_integrate,
    jet,
    parse,
    sym,
    total_x_derivative,
)
from relnls.algebra.diffpoly import leibniz, nonlocal_marker
from relnls.algebra.gaussian import format_coefficient
from relnls.algebra.poly import ZERO_POLY

psi, pb = jet("psi"), jet("psibar")
x, t = sym("x"), sym("t")


# Gaussian rationals -----------------------------------------------------------


def test_gaussian_arithmetic_is_exact():
    a = GaussianRational(Fraction(1, 3), 2)
    b = GaussianRational(-1, Fraction(1, 2))
    assert a * b == GaussianRational(Fraction(-1, 3) - 1, Fraction(1, 6) - 2)
    assert (a / b) * b == a
    assert I * I == -1
    assert a.conjugate() == GaussianRational(Fraction(1, 3), -2)


def test_gaussian_canonical_denominator():
    a = GaussianRational(Fraction(2, -4), Fraction(3, 9))
    assert a.re == Fraction(-1, 2) and a.re.denominator > 0
    assert a.im == Fraction(1, 3)


def test_gaussian_rejects_floats():
    with pytest.raises(TypeError):
        GaussianRational(0.5)


@pytest.mark.parametrize(
    "value, text",
    [(GaussianRational(Fraction(1, 2)), "1/2"), (GaussianRational(0, 3), "3*i"),
     (GaussianRational(1, -1), "1-i"), (I, "i"), (-I, "-i")],
)
def test_coefficient_format(value, text):
    assert format_coefficient(value) == text


# polynomials ------------------------------------------------------------------


def test_conjugate_pair_product():
    assert (x + I * t) * (x - I * t) == x ** 2 + t ** 2


def test_additive_identity_and_exponents():
    a = x ** 2 * sym("hbar") + 3
    assert a + 0 == a
    assert x ** 2 * x ** 3 == x ** 5


def test_only_m_is_laurent():
    assert (sym("m") ** -1 * sym("m")) == MultiPoly.const(1)
    with pytest.raises(ValueError):
        sym("hbar") ** -1


def test_canonical_text_and_parse():
    f = x ** 2 + I * sym("hbar") * sym("m") ** -1 * t
    assert str(f) == "x^2 + (i)*t*hbar*m^-1"
    assert parse(str(f)) == f
    assert str(parse("(1/2)*psi[1]*Int(psi[0]*psibar[0])")) == "(1/2)*psi[1]*Int(psi[0]*psibar[0])"


def test_parse_errors():
    with pytest.raises(ParseError):
        parse("x^^2")


def test_evaluate_and_subs():
    f = x ** 2 * sym("m") ** -1 + I * t
    assert f.evaluate({"x": 2, "m": 4, "t": 1}) == 1 + 1j
    assert f.subs({"m": 1}) == x ** 2 + I * t
    assert f.subs({"x": t}) == t ** 2 * sym("m") ** -1 + I * t


_gens = st.sampled_from(["x", "t", "hbar", "psi[0]", "psi[1]", "psibar[0]", "psibar[2]"])
_coeffs = st.builds(GaussianRational, st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5)),
                    st.integers(-3, 3))
_monos = st.dictionaries(_gens, st.integers(1, 2), max_size=3)
polys = st.lists(st.tuples(_coeffs, _monos), max_size=4).map(
    lambda items: sum((MultiPoly.monomial(c, m) for c, m in items), ZERO_POLY))


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a - a == ZERO_POLY


@settings(max_examples=60, deadline=None)
@given(polys)
def test_serialize_round_trip(a):
    text = str(a)
    assert str(parse(text)) == text


# differential polynomials -----------------------------------------------------


def test_total_derivative_examples():
    assert total_x_derivative(psi * pb) == jet("psi", 1) * pb + psi * jet("psibar", 1)
    assert total_x_derivative(nonlocal_marker(psi * pb)) == psi * pb
    assert total_x_derivative(sym("hbar") * 3).is_zero()
    assert total_x_derivative(x ** 2) == 2 * x


def test_formal_integrate_examples():
    assert formal_integrate(jet("psi", 1) * pb + psi * jet("psibar", 1)) == psi * pb
    with pytest.raises(NotExactDerivative):
        formal_integrate(psi * pb)
    f = pb * jet("psi", 2) + jet("psibar", 1) * jet("psi", 1)
    assert formal_integrate(f) == pb * jet("psi", 1)


def test_formal_integrate_symbolic_mode():
    g = formal_integrate(psi * pb + jet("psi", 1), "symbolic")
    assert total_x_derivative(g) == psi * pb + jet("psi", 1)
    assert any(name.startswith("Int(") for name in g.gens)


_jets = st.sampled_from([f"{f}[{k}]" for f in ("psi", "psibar") for k in range(5)])
local_polys = st.lists(
    st.tuples(_coeffs, st.dictionaries(_jets, st.integers(1, 2), min_size=1, max_size=3)),
    min_size=1, max_size=4,
).map(lambda items: sum((MultiPoly.monomial(c, m) for c, m in items), ZERO_POLY))


@settings(max_examples=60, deadline=None)
@given(local_polys)
def test_integrate_inverts_derivative(f):
    # antiderivatives are unique up to constants, and f has no constant term
    assert formal_integrate(total_x_derivative(f)) == f


@settings(max_examples=30, deadline=None)
@given(local_polys, local_polys)
def test_leibniz_rule(a, b):
    assert leibniz(a, b, 2) == total_x_derivative(total_x_derivative(a * b))


def test_conjugation():
    f = I * psi * jet("psibar", 1) + sym("kappa2")
    assert conjugate(f) == -I * pb * jet("psi", 1) + sym("kappa2")
    assert conjugate(conjugate(f)) == f


# dispersion series ------------------------------------------------------------


def test_dispersion_coefficients():
    m, eps = sym("m"), sym("eps")
    assert dispersion_make("nonrelativistic").coeffs == {2: m ** -1 / 2}
    sr1 = dispersion_make("semirelativistic", 1, 4)
    assert sr1.coeffs == {2: m ** -1 / 2, 4: -eps * m ** -3 / 8}
    sr2 = dispersion_make("semirelativistic", 2, 6)
    assert sr2.coeffs[6] == eps ** 2 * m ** -5 / 16


@pytest.mark.parametrize("order", [0, 1, 2, 3])
def test_eps_zero_reduces_to_nonrelativistic(order):
    sr = dispersion_make("sr", order).specialize({"eps": 0})
    assert sr.coeffs == dispersion_make("nr").coeffs


def test_dispersion_validation():
    with pytest.raises(ValueError):
        dispersion_make("sr", -1)
    with pytest.raises(ValueError):
        dispersion_make("sr", 1, 1)
    with pytest.raises(ValueError):
        dispersion_make("ultra")
