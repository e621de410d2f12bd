import pytest

from relnls import akns
from relnls.algebra import I, DispersionSeries, MultiPoly, dispersion_make, jet, sym
from relnls.algebra.poly import ZERO_POLY

psi, pb = jet("psi"), jet("psibar")
k2, p, m, eps = sym("kappa2"), sym("p"), sym("m"), sym("eps")


def test_first_recursion_step():
    v = akns.recursion_apply(akns.FieldPair.seed())
    assert v.upper == I * jet("psi", 1)
    assert v.lower == -I * jet("psibar", 1)


def test_cubic_nls():
    flow = akns.hierarchy_flow(2)
    assert flow.rhs.upper == -jet("psi", 2) - 2 * k2 * psi ** 2 * pb
    assert akns.hierarchy_flow(2, 0).rhs.upper == -jet("psi", 2)


def test_transport_flow():
    assert akns.hierarchy_flow(1).rhs.upper == I * jet("psi", 1)


@pytest.mark.parametrize("n", range(1, 7))
def test_linear_limit(n):
    assert akns.hierarchy_flow(n, 0).rhs == akns.linear_limit_flow(n)


@pytest.mark.parametrize("n", range(1, 6))
def test_flows_are_conjugation_symmetric(n):
    assert akns.hierarchy_flow(n).rhs.is_conjugation_symmetric()


def test_conjugation_error():
    with pytest.raises(akns.ConjugationError):
        akns.FieldPair(psi, psi).check_conjugation()


def test_a_constant():
    assert [akns.a_constant(n) for n in range(1, 5)] == [1, -2, 4, -8]


def test_lax_coefficient_examples():
    c1 = akns.lax_coefficients(1)
    assert c1.C.upper == psi and c1.A == -p / 2
    c2 = akns.lax_coefficients(2)
    assert c2.C.upper == p * psi + I * jet("psi", 1)
    assert c2.A == -p ** 2 / 2 + k2 * psi * pb
    lin = akns.lax_coefficients(2, 0)
    assert lin.A == -p ** 2 / 2


def test_q_bracket_expansion():
    n = 3
    powers = akns.recursion_powers(n - 1)
    expected = akns.FieldPair(ZERO_POLY, ZERO_POLY)
    for k in range(1, n + 1):
        expected = expected + powers[k - 1] * p ** (n - k)
    assert akns.lax_coefficients(n).C == expected


@pytest.mark.parametrize("n", range(1, 6))
def test_recurrence_route_agrees(n):
    assert akns.lax_coefficients_recurrence(n) == akns.lax_coefficients(n)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_zero_curvature(n):
    rep = akns.verify_zero_curvature(n)
    assert rep.is_zero(), rep.failures()


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_zero_curvature_linear(n):
    assert akns.verify_zero_curvature(n, 0).is_zero()


@pytest.mark.parametrize("order", [1, 2])
def test_general_zero_curvature(order):
    rep = akns.verify_general_zero_curvature(dispersion_make("sr", order))
    assert rep.is_zero(), rep.failures()


def test_literal_sign_convention_fails():
    lax = akns.LaxPair.build(akns.lax_coefficients(2), literal=True)
    rep = akns.zero_curvature_residual(lax, akns.hierarchy_flow(2))
    assert not rep.is_zero()
    failure = rep.failures()[0]
    assert set(failure) == {"entry", "p_power", "terms"}


def test_mismatched_flow_reports_failures():
    lax = akns.LaxPair.build(akns.lax_coefficients(2))
    rep = akns.zero_curvature_residual(lax, akns.hierarchy_flow(3))
    assert rep.failures()


def test_lax_general_examples():
    nr = akns.lax_general(dispersion_make("nr"))
    assert nr.C == akns.lax_coefficients(2).C * (m ** -1 / 2)
    linear = DispersionSeries({1: MultiPoly.const(1)}, 1)
    c = akns.lax_general(linear)
    assert c.C == akns.FieldPair.seed() and c.A == -p / 2


def test_lax_general_semirelativistic_combination():
    got = akns.lax_general(dispersion_make("sr", 1)).C
    expected = akns.lax_coefficients(2).C * (m ** -1 / 2) + akns.lax_coefficients(4).C * (-eps * m ** -3 / 8)
    assert got == expected


def test_lax_general_is_linear():
    a = DispersionSeries({2: sym("alpha"), 3: MultiPoly.const(2)}, 3)
    b = DispersionSeries({1: sym("beta"), 2: MultiPoly.const(5)}, 2)
    left = akns.lax_general(a + b)
    right = akns.lax_general(a) + akns.lax_general(b)
    assert left.C == right.C
    assert left.A == right.A


def test_general_flow_bookkeeping():
    nr = akns.general_flow(dispersion_make("nr"))
    assert nr.rhs == akns.hierarchy_flow(2).rhs * (m ** -1 / 2)
    sr0 = akns.general_flow(dispersion_make("sr", 0))
    assert sr0.rhs.upper == sym("E0") * psi + akns.hierarchy_flow(2).rhs.upper * (m ** -1 / 2)
    sr1 = akns.general_flow(dispersion_make("sr", 1))
    diff = sr1.rhs - sr0.rhs
    assert diff == akns.hierarchy_flow(4).rhs * (-eps * m ** -3 / 8)


def test_relativistic_nonlinearity():
    assert akns.relativistic_nonlinearity(0) == m ** -1 / 2 * (-2 * k2 * psi ** 2 * pb)
    assert akns.relativistic_nonlinearity(1) == akns.reference_nonlinearity(1)
    for k in (0, 1, 2):
        assert akns.relativistic_nonlinearity(k).subs({"kappa2": 0}).is_zero()
    with pytest.raises(ValueError):
        akns.relativistic_nonlinearity(3)
