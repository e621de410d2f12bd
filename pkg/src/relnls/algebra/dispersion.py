"""Truncated dispersion series ``E(p) = E0 + sum_N E_N p^N``."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .poly import ZERO_POLY, MultiPoly, sym

NONRELATIVISTIC = "nonrelativistic"
SEMIRELATIVISTIC = "semirelativistic"
_KIND_ALIASES = {
    "nr": NONRELATIVISTIC,
    "nonrel": NONRELATIVISTIC,
    NONRELATIVISTIC: NONRELATIVISTIC,
    "sr": SEMIRELATIVISTIC,
    "semirel": SEMIRELATIVISTIC,
    SEMIRELATIVISTIC: SEMIRELATIVISTIC,
}


@dataclass(frozen=True)
class DispersionSeries:
    """Shifted dispersion ``E(p) - E0`` with polynomial coefficients.

    ``coeffs[N]`` depends only on ``hbar, m, eps`` (and user symbols), never
    on ``x, t, p``. ``rest_energy`` is kept apart; for the relativistic
    dispersion it is the formal symbol ``E0`` standing for ``m c^2``.
    """

    coeffs: Mapping[int, MultiPoly]
    max_degree: int
    rest_energy: MultiPoly = ZERO_POLY
    eps_order: int | None = None
    kind: str = "custom"
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        clean = {}
        for n, c in sorted(self.coeffs.items()):
            c = c if isinstance(c, MultiPoly) else MultiPoly.const(c)
            if n < 1:
                raise ValueError("coeffs must start at degree 1; use rest_energy for E0")
            if n > self.max_degree:
                raise ValueError(f"coefficient of degree {n} exceeds max_degree")
            bad = {"x", "t", "p"} & set(c.gens)
            if bad:
                raise ValueError(f"dispersion coefficient depends on {sorted(bad)}")
            if not c.is_zero():
                clean[n] = c
        object.__setattr__(self, "coeffs", clean)

    @property
    def degrees(self):
        return sorted(self.coeffs)

    def coefficient(self, n: int) -> MultiPoly:
        return self.coeffs.get(n, ZERO_POLY)

    def derivative(self) -> "DispersionSeries":
        """Term-wise ``E'(p)``; keeps its own constant term at key 0."""
        return DerivativeSeries({n - 1: c * n for n, c in self.coeffs.items()})

    def as_polynomial(self, var: str = "p", shifted: bool = True) -> MultiPoly:
        p = sym(var)
        total = ZERO_POLY if shifted else self.rest_energy
        for n, c in self.coeffs.items():
            total = total + c * p ** n
        return total

    def apply(self, op: Callable, seed):
        """``sum_N E_N op^N(seed)`` for a linear operator ``op``."""
        return apply_series(self.coeffs, op, seed)

    def specialize(self, values: Mapping[str, object]) -> "DispersionSeries":
        return DispersionSeries(
            {n: c.subs(values) for n, c in self.coeffs.items()},
            self.max_degree,
            self.rest_energy.subs(values),
            self.eps_order,
            self.kind,
        )

    def scaled(self, factor) -> "DispersionSeries":
        return DispersionSeries(
            {n: c * factor for n, c in self.coeffs.items()},
            self.max_degree,
            self.rest_energy * factor,
            self.eps_order,
            "custom",
        )

    def __add__(self, other: "DispersionSeries") -> "DispersionSeries":
        keys = set(self.coeffs) | set(other.coeffs)
        return DispersionSeries(
            {n: self.coefficient(n) + other.coefficient(n) for n in keys},
            max(self.max_degree, other.max_degree),
            self.rest_energy + other.rest_energy,
            None,
            "custom",
        )

    def numeric(self, values: Mapping[str, complex]) -> dict[int, complex]:
        return {n: c.evaluate(values) for n, c in self.coeffs.items()}


@dataclass(frozen=True)
class DerivativeSeries:
    """Coefficients of ``E'(p)`` (may include a constant term)."""

    coeffs: Mapping[int, MultiPoly]

    def apply(self, op: Callable, seed):
        return apply_series(self.coeffs, op, seed)

    def numeric(self, values: Mapping[str, complex]) -> dict[int, complex]:
        return {n: c.evaluate(values) for n, c in self.coeffs.items()}


def apply_series(coeffs: Mapping[int, object], op: Callable, seed):
    """``sum_N c_N op^N(seed)``, reusing successive powers of ``op``."""
    if not coeffs:
        return seed * 0
    top = max(coeffs)
    total = None
    current = seed
    for n in range(top + 1):
        if n:
            current = op(current)
        c = coeffs.get(n)
        if c is not None:
            term = current * c
            total = term if total is None else total + term
    return total


def binomial_half(j: int) -> Fraction:
    """Generalized binomial coefficient ``binom(1/2, j)``."""
    out = Fraction(1)
    for i in range(j):
        out *= (Fraction(1, 2) - i) / (i + 1)
    return out


def dispersion_make(kind: str, eps_order: int = 0, degree_cap: int | None = None) -> DispersionSeries:
    """Non-relativistic ``p^2/2m`` or the expanded relativistic root.

    The semi-relativistic series is ``m c^2 (sqrt(1 + eps p^2/m^2) - 1)`` with
    ``eps = 1/c^2``: ``sum_j binom(1/2, j) eps^(j-1) p^(2j) / m^(2j-1)``,
    keeping ``eps`` order ``<= eps_order`` and ``p`` degree ``<= degree_cap``.
    """
    try:
        kind = _KIND_ALIASES[kind]
    except KeyError:
        raise ValueError(f"unknown dispersion kind {kind!r}") from None
    if eps_order < 0:
        raise ValueError("eps_order must be >= 0")
    if degree_cap is None:
        degree_cap = 2 if kind == NONRELATIVISTIC else 2 * eps_order + 2
    if degree_cap < 2:
        raise ValueError("degree_cap must be >= 2")
    m = sym("m")
    if kind == NONRELATIVISTIC:
        return DispersionSeries({2: m ** -1 * Fraction(1, 2)}, degree_cap, ZERO_POLY, eps_order, kind)
    coeffs = {}
    eps = sym("eps")
    for j in range(1, eps_order + 2):
        if 2 * j > degree_cap:
            break
        coeffs[2 * j] = eps ** (j - 1) * m ** (1 - 2 * j) * binomial_half(j)
    return DispersionSeries(coeffs, degree_cap, sym("E0"), eps_order, kind)
