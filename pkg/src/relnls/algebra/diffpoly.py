"""Differential polynomials: jet prolongation and formal x-integration.

A differential polynomial is a :class:`MultiPoly` whose generators include
jet symbols ``u[k]`` (k-th x-derivative of field ``u``) and, optionally,
depth-1 nonlocal markers ``Int(g)`` standing for a formal antiderivative of
the local differential polynomial ``g``.
"""

from __future__ import annotations

import functools
from math import comb

from .poly import (
    ONE_POLY,
    ZERO_POLY,
    MultiPoly,
    is_jet,
    is_nonlocal,
    parse,
    split_jet,
)

DiffPoly = MultiPoly

CONJUGATE_FIELDS = {"psi": "psibar", "psibar": "psi"}


class NotExactDerivative(ValueError):
    """The integrand has no local antiderivative."""


def jet(field: str, order: int = 0) -> DiffPoly:
    return MultiPoly.symbol(f"{field}[{order}]")


def nonlocal_marker(g: DiffPoly) -> DiffPoly:
    """``Int(g)``, the unevaluated antiderivative of a local ``g``."""
    if not is_local(g):
        raise ValueError("nonlocal markers may only wrap local differential polynomials")
    if g.is_zero():
        return ZERO_POLY
    return MultiPoly.symbol(f"Int({g})")


def is_local(f: DiffPoly) -> bool:
    return not any(is_nonlocal(g) for g in f.gens)


def jet_order(f: DiffPoly) -> int:
    """Highest derivative order among jet generators (-1 if there are none)."""
    orders = [split_jet(g)[1] for g in f.gens if is_jet(g)]
    return max(orders, default=-1)


@functools.lru_cache(maxsize=4096)
def _generator_derivative(name: str) -> DiffPoly:
    if name == "x":
        return ONE_POLY
    if is_nonlocal(name):
        return parse(name[4:-1])
    if is_jet(name):
        field, k = split_jet(name)
        return jet(field, k + 1)
    return ZERO_POLY


def total_x_derivative(f: DiffPoly) -> DiffPoly:
    """Total derivative ``D_x``: jet prolongation plus ``D_x Int(g) = g``."""
    total = ZERO_POLY
    for g in f.gens:
        dg = _generator_derivative(g)
        if dg.is_zero():
            continue
        total = total + f.diff(g) * dg
    return total


def dx_power(f: DiffPoly, n: int) -> DiffPoly:
    for _ in range(n):
        f = total_x_derivative(f)
    return f


def formal_integrate(f: DiffPoly, mode: str = "strict") -> DiffPoly:
    """Antiderivative with zero integration constant.

    ``strict``: returns ``g`` with ``D_x g = f`` or raises
    :class:`NotExactDerivative`. ``symbolic``: the non-exact remainder ``r``
    is kept as ``Int(r)`` so the result still differentiates back to ``f``.

    The local part is found with the homotopy operator
    ``sum_u sum_k sum_{j<k} u[j] (-D)^(k-j-1) df/du[k]`` weighted by the
    inverse jet degree of each homogeneous component; jet-free terms are
    integrated directly in ``x``.
    """
    if mode not in ("strict", "symbolic"):
        raise ValueError(f"unknown integration mode {mode!r}")
    if not is_local(f):
        raise (NotExactDerivative if mode == "strict" else ValueError)(
            "integrand contains nonlocal markers; only depth-1 nesting is supported"
        )
    jet_free, with_jets = _split_jet_free(f)
    g = _integrate_in_x(jet_free) + _homotopy(with_jets)
    residue = f - total_x_derivative(g)
    if residue.is_zero():
        return g
    if mode == "strict":
        raise NotExactDerivative(f"not a total x-derivative: {f}")
    return g + nonlocal_marker(residue)


def _split_jet_free(f: DiffPoly):
    jets = [j for j, g in enumerate(f.gens) if is_jet(g)]
    free, rest = {}, {}
    for e, c in f.terms.items():
        (rest if any(e[j] for j in jets) else free)[e] = c
    return MultiPoly._raw(f.gens, free), MultiPoly._raw(f.gens, rest)


def _integrate_in_x(f: DiffPoly) -> DiffPoly:
    if f.is_zero():
        return f
    x = MultiPoly.symbol("x")
    total = ZERO_POLY
    for k, c in f.collect("x").items():
        total = total + c * x ** (k + 1) / (k + 1)
    return total


def _jet_degree_parts(f: DiffPoly) -> dict[int, DiffPoly]:
    jets = [j for j, g in enumerate(f.gens) if is_jet(g)]
    parts: dict[int, dict] = {}
    for e, c in f.terms.items():
        parts.setdefault(sum(e[j] for j in jets), {})[e] = c
    return {d: MultiPoly._raw(f.gens, t) for d, t in parts.items()}


def _homotopy(f: DiffPoly) -> DiffPoly:
    total = ZERO_POLY
    for degree, part in _jet_degree_parts(f).items():
        acc = ZERO_POLY
        for name in part.gens:
            if not is_jet(name):
                continue
            field, k = split_jet(name)
            if k == 0:
                continue
            partial = part.diff(name)
            for j in range(k):
                term = partial
                for _ in range(k - j - 1):
                    term = -total_x_derivative(term)
                acc = acc + jet(field, j) * term
        total = total + acc / degree
    return total


def conjugate(f: DiffPoly, pairs: dict[str, str] | None = None) -> DiffPoly:
    """Formal complex conjugate: ``i -> -i`` and ``psi <-> psibar``.

    Parameters (``x, t, hbar, m, eps, kappa2, p, E0``) are real.
    """
    pairs = CONJUGATE_FIELDS if pairs is None else pairs
    mapping = {}
    for g in f.gens:
        if is_jet(g):
            field, k = split_jet(g)
            if field in pairs:
                mapping[g] = f"{pairs[field]}[{k}]"
        elif is_nonlocal(g):
            mapping[g] = f"Int({conjugate(parse(g[4:-1]), pairs)})"
    return f.rename(mapping).map_coefficients(lambda c: c.conjugate())


def leibniz(a: DiffPoly, b: DiffPoly, n: int) -> DiffPoly:
    """``D^n (a b)`` by the Leibniz rule (used as an independent check)."""
    total = ZERO_POLY
    for k in range(n + 1):
        total = total + dx_power(a, k) * dx_power(b, n - k) * comb(n, k)
    return total
