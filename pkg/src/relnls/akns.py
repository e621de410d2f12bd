"""AKNS recursion operator, NLS hierarchy flows and their Lax pairs.

Fields are the jets ``psi[k]`` and ``psibar[k]``; ``kappa2`` is the coupling
and ``p`` the spectral parameter. The recursion operator acts on a column
``(a, b)`` as

    R (a, b) = i sigma_3 (a_x + 2 kappa2 psi W,  b_x - 2 kappa2 psibar W),
    W = Int(psibar a - psi b),

i.e. the usual matrix operator with the two antiderivatives in each
row combined into one exact integral.

Sign conventions. The zero-curvature condition
``J1_t - J0_x + [J1, J0] = 0`` holds with

    J1 = [[ i p/2, -kappa2 psibar], [psi, -i p/2]]
    J0 = [[-i A,   -kappa2 Cbar  ], [C,    i A  ]]

for ``C_N = p^(N-1) [N]_(R/p) (psi, psibar)`` and
``A_N = -p^N/2 - i kappa2 p^(N-1) (Int psibar, -Int psi) [N]_(R/p) (psi, psibar)``.
``LaxPair.build(..., literal=True)`` keeps the printed diagonal signs
(``-i p/2`` first in ``J1``, ``-i A`` twice in ``J0``) for comparison; that
variant does not satisfy zero curvature.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterator

from .algebra.diffpoly import conjugate, formal_integrate, jet, total_x_derivative
from .algebra.dispersion import DispersionSeries, dispersion_make
from .algebra.gaussian import I
from .algebra.poly import ZERO_POLY, MultiPoly, sym

KAPPA2 = sym("kappa2")
P = sym("p")
PSI = jet("psi")
PSIBAR = jet("psibar")


def a_constant(n: int) -> int:
    """Normalization ``a_N = (-2)^(N-1)`` of the top Lax coefficient."""
    return (-2) ** (n - 1)


class ConjugationError(AssertionError):
    """A field pair lost its ``lower = conj(upper)`` symmetry."""


@dataclass(frozen=True)
class FieldPair:
    upper: MultiPoly
    lower: MultiPoly

    @classmethod
    def seed(cls) -> "FieldPair":
        return cls(PSI, PSIBAR)

    @classmethod
    def from_upper(cls, upper: MultiPoly) -> "FieldPair":
        return cls(upper, conjugate(upper))

    def __add__(self, other: "FieldPair") -> "FieldPair":
        return FieldPair(self.upper + other.upper, self.lower + other.lower)

    def __sub__(self, other: "FieldPair") -> "FieldPair":
        return FieldPair(self.upper - other.upper, self.lower - other.lower)

    def __mul__(self, c) -> "FieldPair":
        return FieldPair(self.upper * c, self.lower * c)

    __rmul__ = __mul__

    def __iter__(self) -> Iterator[MultiPoly]:
        return iter((self.upper, self.lower))

    def is_zero(self) -> bool:
        return self.upper.is_zero() and self.lower.is_zero()

    def is_conjugation_symmetric(self) -> bool:
        return conjugate(self.upper) == self.lower

    def check_conjugation(self) -> "FieldPair":
        if not self.is_conjugation_symmetric():
            raise ConjugationError(f"lower component is not conj(upper): {self.upper} | {self.lower}")
        return self

    def subs(self, values) -> "FieldPair":
        return FieldPair(self.upper.subs(values), self.lower.subs(values))

    def pairing(self) -> MultiPoly:
        """``psibar * upper - psi * lower``, the integrand of the nonlocal terms."""
        return PSIBAR * self.upper - PSI * self.lower


def _is_zero_coupling(kappa2) -> bool:
    return not (kappa2 if isinstance(kappa2, MultiPoly) else MultiPoly.const(kappa2))


def recursion_apply(v: FieldPair, kappa2=KAPPA2, check: bool = True) -> FieldPair:
    """One application of the recursion operator; antiderivatives are strict."""
    a, b = v.upper, v.lower
    up = total_x_derivative(a)
    lo = total_x_derivative(b)
    if not _is_zero_coupling(kappa2):
        w = formal_integrate(v.pairing(), "strict")
        up = up + PSI * w * kappa2 * 2
        lo = lo - PSIBAR * w * kappa2 * 2
    out = FieldPair(up * I, lo * (-I))
    if check:
        out.check_conjugation()
    return out


@functools.lru_cache(maxsize=None)
def _recursion_powers(n: int, kappa2: MultiPoly) -> tuple[FieldPair, ...]:
    if n == 0:
        return (FieldPair.seed(),)
    prev = _recursion_powers(n - 1, kappa2)
    return prev + (recursion_apply(prev[-1], kappa2),)


def recursion_powers(n: int, kappa2=KAPPA2) -> tuple[FieldPair, ...]:
    """``(R^0 v, R^1 v, ..., R^n v)`` for the seed ``v = (psi, psibar)``."""
    if not isinstance(kappa2, MultiPoly):
        kappa2 = MultiPoly.const(kappa2)
    return _recursion_powers(n, kappa2)


@dataclass(frozen=True)
class Flow:
    """An evolution ``i sigma_3 (psi, psibar)_t = rhs``."""

    rhs: FieldPair

    @property
    def velocity(self) -> FieldPair:
        """``(psi_t, psibar_t)``."""
        return FieldPair(self.rhs.upper * (-I), self.rhs.lower * I)

    def __str__(self):
        return f"i psi_t = {self.rhs.upper}"


def hierarchy_flow(n: int, kappa2=KAPPA2) -> Flow:
    """N-th member: ``i sigma_3 (psi, psibar)_{t_N} = R^N (psi, psibar)``."""
    if n < 1:
        raise ValueError("N must be >= 1")
    return Flow(recursion_powers(n, kappa2)[n])


def truncate_eps(f: MultiPoly, order: int | None) -> MultiPoly:
    if order is None or "eps" not in f.gens:
        return f
    total = ZERO_POLY
    eps = sym("eps")
    for k, c in f.collect("eps").items():
        if k <= order:
            total = total + c * eps ** k
    return total


def general_flow(dispersion: DispersionSeries, kappa2=KAPPA2) -> Flow:
    """``i sigma_3 v_t = (E0 + sum_N E_N R^N) v`` truncated at the series' eps order."""
    top = max(dispersion.coeffs, default=0)
    powers = recursion_powers(top, kappa2)
    rhs = powers[0] * dispersion.rest_energy
    for n, c in dispersion.coeffs.items():
        rhs = rhs + powers[n] * c
    rhs = FieldPair(truncate_eps(rhs.upper, dispersion.eps_order),
                    truncate_eps(rhs.lower, dispersion.eps_order))
    return Flow(rhs)


@dataclass(frozen=True)
class LaxCoefficients:
    """``C`` (with its conjugate row) and ``A``, polynomial in ``p``."""

    C: FieldPair
    A: MultiPoly

    def __add__(self, other: "LaxCoefficients") -> "LaxCoefficients":
        return LaxCoefficients(self.C + other.C, self.A + other.A)

    def __mul__(self, c) -> "LaxCoefficients":
        return LaxCoefficients(self.C * c, self.A * c)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, LaxCoefficients) and self.C == other.C and self.A == other.A

    __hash__ = None


def _q_bracket(n: int, kappa2) -> FieldPair:
    """``p^(N-1) [N]_(R/p) v = sum_{k=1..N} p^(N-k) R^(k-1) v``."""
    powers = recursion_powers(n - 1, kappa2)
    total = FieldPair(ZERO_POLY, ZERO_POLY)
    for k in range(1, n + 1):
        total = total + powers[k - 1] * P ** (n - k)
    return total


def _a_from_c(c: FieldPair, energy: MultiPoly, kappa2) -> MultiPoly:
    a = energy * (-1) / 2
    if _is_zero_coupling(kappa2):
        return a
    return a - formal_integrate(c.pairing(), "strict") * kappa2 * I


def lax_coefficients(n: int, kappa2=KAPPA2) -> LaxCoefficients:
    """``C_N`` and ``A_N`` from the q-bracket formulas."""
    if n < 1:
        raise ValueError("N must be >= 1")
    c = _q_bracket(n, kappa2)
    return LaxCoefficients(c, _a_from_c(c, P ** n, kappa2))


def lax_coefficients_recurrence(n: int, kappa2=KAPPA2) -> LaxCoefficients:
    """Same coefficients from the descending recurrence
    ``C^(k) = (1/2i) D C^(k+1) + A^(k+1) psi``,
    ``A^(k) = -i kappa2 Int(psibar C^(k) - psi Cbar^(k))``,
    starting at ``C^(N) = 0``, ``A^(N) = a_N``, summed against ``(-p/2)^k``."""
    if n < 1:
        raise ValueError("N must be >= 1")
    c_next = FieldPair(ZERO_POLY, ZERO_POLY)
    a_next = MultiPoly.const(a_constant(n))
    weight = (P * (-1) / 2)
    c_total = FieldPair(ZERO_POLY, ZERO_POLY)
    a_total = a_next * weight ** n
    half_over_i = I * (-1) / 2
    for k in range(n - 1, -1, -1):
        upper = total_x_derivative(c_next.upper) * half_over_i + a_next * PSI
        ck = FieldPair.from_upper(upper)
        ak = ZERO_POLY
        if not _is_zero_coupling(kappa2):
            ak = formal_integrate(ck.pairing(), "strict") * kappa2 * (-I)
        c_total = c_total + ck * weight ** k
        a_total = a_total + ak * weight ** k
        c_next, a_next = ck, ak
    return LaxCoefficients(c_total, a_total)


def lax_general(dispersion: DispersionSeries, kappa2=KAPPA2) -> LaxCoefficients:
    """Divided-difference form ``C = [(E(R) - E(p))/(R - p)] v`` and
    ``A = -E(p)/2 - i kappa2 (Int psibar, -Int psi) C``."""
    c = FieldPair(ZERO_POLY, ZERO_POLY)
    for n, coeff in dispersion.coeffs.items():
        c = c + _q_bracket(n, kappa2) * coeff
    energy = dispersion.rest_energy + dispersion.as_polynomial("p")
    return LaxCoefficients(c, _a_from_c(c, energy, kappa2))


Matrix = tuple[tuple[MultiPoly, MultiPoly], tuple[MultiPoly, MultiPoly]]


@dataclass(frozen=True)
class LaxPair:
    J1: Matrix
    J0: Matrix
    kappa2: MultiPoly

    @classmethod
    def build(cls, coeffs: LaxCoefficients, kappa2=KAPPA2, literal: bool = False) -> "LaxPair":
        if not isinstance(kappa2, MultiPoly):
            kappa2 = MultiPoly.const(kappa2)
        half_ip = P * I / 2
        a = coeffs.A
        if literal:
            j1 = ((-half_ip, -kappa2 * PSIBAR), (PSI, half_ip))
            j0 = ((a * (-I), -kappa2 * coeffs.C.lower), (coeffs.C.upper, a * (-I)))
        else:
            j1 = ((half_ip, -kappa2 * PSIBAR), (PSI, -half_ip))
            j0 = ((a * (-I), -kappa2 * coeffs.C.lower), (coeffs.C.upper, a * I))
        return cls(j1, j0, kappa2)


def _matmul(x: Matrix, y: Matrix) -> Matrix:
    return tuple(
        tuple(x[i][0] * y[0][j] + x[i][1] * y[1][j] for j in range(2)) for i in range(2)
    )


@dataclass(frozen=True)
class ZeroCurvatureReport:
    residual: Matrix

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.residual for e in row)

    def failures(self) -> list[dict]:
        """One record per nonzero (entry, power of p)."""
        out = []
        for i in range(2):
            for j in range(2):
                for power, coeff in self.residual[i][j].collect("p").items():
                    if not coeff.is_zero():
                        out.append({"entry": [i, j], "p_power": power, "terms": str(coeff)})
        return out


def zero_curvature_residual(lax: LaxPair, flow: Flow) -> ZeroCurvatureReport:
    """``J1_t - J0_x + [J1, J0]`` with ``psi_t, psibar_t`` from ``flow``."""
    vel = flow.velocity
    j1t = ((ZERO_POLY, -lax.kappa2 * vel.lower), (vel.upper, ZERO_POLY))
    ab = _matmul(lax.J1, lax.J0)
    ba = _matmul(lax.J0, lax.J1)
    res = tuple(
        tuple(
            j1t[i][j] - total_x_derivative(lax.J0[i][j]) + ab[i][j] - ba[i][j]
            for j in range(2)
        )
        for i in range(2)
    )
    return ZeroCurvatureReport(res)


def verify_zero_curvature(n: int, kappa2=KAPPA2) -> ZeroCurvatureReport:
    return zero_curvature_residual(LaxPair.build(lax_coefficients(n, kappa2), kappa2),
                                   hierarchy_flow(n, kappa2))


def verify_general_zero_curvature(dispersion: DispersionSeries, kappa2=KAPPA2) -> ZeroCurvatureReport:
    return zero_curvature_residual(LaxPair.build(lax_general(dispersion, kappa2), kappa2),
                                   general_flow(dispersion, kappa2))


def relativistic_nonlinearity(eps_order: int) -> MultiPoly:
    """Coefficient of ``eps^k`` in ``F(psi)``: the relativistic flow minus its
    linear (``kappa2 = 0``) part, upper row, in the ``i psi_t`` normalization."""
    if eps_order not in (0, 1, 2):
        raise ValueError("eps_order must be 0, 1 or 2")
    disp = dispersion_make("semirelativistic", eps_order)
    full = general_flow(disp).rhs.upper
    linear = general_flow(disp, 0).rhs.upper
    return (full - linear).coeff("eps", eps_order)


def reference_nonlinearity(eps_order: int) -> MultiPoly:
    """Closed-form reference bracket for ``F(psi)`` at ``eps^0`` and ``eps^1``."""
    m = sym("m")
    psi, pb = PSI, PSIBAR
    px, pxx = jet("psi", 1), jet("psi", 2)
    pbx, pbxx = jet("psibar", 1), jet("psibar", 2)
    if eps_order == 0:
        return m ** -1 / 2 * (KAPPA2 * (-2) * psi * pb * psi)
    if eps_order == 1:
        bracket = (KAPPA2 * 2 * (px * pbx * psi * 2 + psi * pb * pxx * 4 + pbxx * psi ** 2
                                 + pb * px ** 2 * 3)
                   + KAPPA2 ** 2 * 6 * (psi * pb) ** 2 * psi)
        return m ** -3 * bracket * (-1) / 8
    raise ValueError("only orders 0 and 1 are printed")


def linear_limit_flow(n: int) -> FieldPair:
    """``kappa2 = 0`` reference: ``R_0^N v = (i^N psi[N], (-i)^N psibar[N])``."""
    return FieldPair(jet("psi", n) * I ** n, jet("psibar", n) * (-I) ** n)
