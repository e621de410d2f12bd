"""Sparse multivariate polynomials over the Gaussian rationals.

A :class:`MultiPoly` is a map from exponent vectors to
:class:`~relnls.algebra.gaussian.GaussianRational` coefficients. Every
instance carries its own sorted generator table ``gens``; binary operations
first embed both operands into the union table. Only generators that occur
with a nonzero exponent are kept, so equality is structural.

Generators are plain strings:

* parameters ``x, t, hbar, m, eps, kappa2, p, E0`` (in that order);
* any other identifier (user-declared symbols), ordered alphabetically;
* jet symbols ``field[k]`` for the k-th x-derivative of a field;
* nonlocal markers ``Int(<canonical text>)`` for a formal antiderivative.

``m`` is the only generator allowed a negative exponent (dispersion
coefficients carry powers of ``1/m``).
"""

from __future__ import annotations

import functools
import re
from fractions import Fraction
from typing import Iterable, Mapping

from .._backend import add_terms, embed_terms, mul_terms
from .gaussian import ONE, ZERO, GaussianRational, format_coefficient

PARAMETERS = ("x", "t", "hbar", "m", "eps", "kappa2", "p", "E0")
LAURENT_GENERATORS = frozenset({"m"})

_JET_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]$")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ParseError(ValueError):
    pass


@functools.lru_cache(maxsize=None)
def generator_key(name: str):
    """Global total order on generator names."""
    if name in PARAMETERS:
        return (0, PARAMETERS.index(name), "", 0)
    if name.startswith("Int("):
        return (3, 0, name, 0)
    m = _JET_RE.match(name)
    if m:
        return (2, 0, m.group(1), int(m.group(2)))
    return (1, 0, name, 0)


def is_jet(name: str) -> bool:
    return _JET_RE.match(name) is not None


def split_jet(name: str) -> tuple[str, int]:
    m = _JET_RE.match(name)
    if m is None:
        raise ValueError(f"{name!r} is not a jet symbol")
    return m.group(1), int(m.group(2))


def is_nonlocal(name: str) -> bool:
    return name.startswith("Int(")


def _coefficient(value) -> GaussianRational:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


class MultiPoly:
    """Immutable sparse polynomial; see the module docstring."""

    __slots__ = ("gens", "terms", "_hash")

    def __init__(self, gens: Iterable[str] = (), terms: Mapping | None = None):
        gens = tuple(gens)
        terms = {} if terms is None else {tuple(e): _coefficient(c) for e, c in terms.items()}
        for e in terms:
            if len(e) != len(gens):
                raise ValueError("exponent vector length does not match generator table")
        order = sorted(range(len(gens)), key=lambda j: generator_key(gens[j]))
        if order != list(range(len(gens))):
            if len(set(gens)) != len(gens):
                raise ValueError("duplicate generators")
            gens = tuple(gens[j] for j in order)
            terms = {tuple(e[j] for j in order): c for e, c in terms.items()}
        self._set(*_prune(gens, {e: c for e, c in terms.items() if c}))
        for j, g in enumerate(self.gens):
            if g not in LAURENT_GENERATORS and any(e[j] < 0 for e in self.terms):
                raise ValueError(f"negative exponent for generator {g!r}")

    def _set(self, gens, terms):
        object.__setattr__(self, "gens", gens)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    @classmethod
    def _raw(cls, gens, terms) -> "MultiPoly":
        obj = object.__new__(cls)
        obj._set(*_prune(gens, terms))
        return obj

    # constructors -------------------------------------------------------

    @classmethod
    def const(cls, value) -> "MultiPoly":
        c = _coefficient(value)
        return cls._raw((), {(): c} if c else {})

    @classmethod
    def symbol(cls, name: str, power: int = 1) -> "MultiPoly":
        _check_name(name)
        if power < 0 and name not in LAURENT_GENERATORS:
            raise ValueError(f"negative exponent for generator {name!r}")
        if power == 0:
            return cls.const(1)
        return cls._raw((name,), {(power,): ONE})

    @classmethod
    def monomial(cls, coeff, powers: Mapping[str, int]) -> "MultiPoly":
        gens = tuple(powers)
        return cls(gens, {tuple(powers[g] for g in gens): coeff})

    # structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.gens

    def constant_value(self) -> GaussianRational:
        if self.gens:
            raise ValueError("polynomial is not constant")
        return self.terms.get((), ZERO)

    def __len__(self):
        return len(self.terms)

    def degree(self, gen: str) -> int:
        if gen not in self.gens:
            return 0
        j = self.gens.index(gen)
        return max(e[j] for e in self.terms)

    def collect(self, gen: str) -> dict[int, "MultiPoly"]:
        """Split into ``{exponent of gen: coefficient polynomial}``."""
        if gen not in self.gens:
            return {0: self} if self.terms else {}
        j = self.gens.index(gen)
        rest = self.gens[:j] + self.gens[j + 1:]
        parts: dict[int, dict] = {}
        for e, c in self.terms.items():
            parts.setdefault(e[j], {})[e[:j] + e[j + 1:]] = c
        return {k: MultiPoly._raw(rest, v) for k, v in sorted(parts.items())}

    def coeff(self, gen: str, power: int) -> "MultiPoly":
        return self.collect(gen).get(power, ZERO_POLY)

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return MultiPoly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        gens, ta, tb = _unify(self, other)
        return MultiPoly._raw(gens, add_terms(ta, tb, False))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        gens, ta, tb = _unify(self, other)
        return MultiPoly._raw(gens, add_terms(ta, tb, True))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return MultiPoly._raw(self.gens, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            c = _coefficient(other)
            if not c:
                return ZERO_POLY
            return MultiPoly._raw(self.gens, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        gens, ta, tb = _unify(self, other)
        return MultiPoly._raw(gens, mul_terms(ta, tb))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            inv = ONE / _coefficient(other)
            return self * inv
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            if len(self.terms) == 1 and isinstance(n, int):
                (e, c), = self.terms.items()
                return MultiPoly(self.gens, {tuple(k * n for k in e): c ** n})
            raise ValueError("only non-negative integer powers of non-monomials")
        result = ONE_POLY
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # calculus / substitution -------------------------------------------

    def diff(self, gen: str) -> "MultiPoly":
        """Partial derivative with respect to a generator."""
        if gen not in self.gens:
            return ZERO_POLY
        j = self.gens.index(gen)
        out = {}
        for e, c in self.terms.items():
            k = e[j]
            if k:
                out[e[:j] + (k - 1,) + e[j + 1:]] = c * k
        return MultiPoly._raw(self.gens, out)

    def subs(self, values: Mapping[str, object]) -> "MultiPoly":
        """Substitute generators by exact scalars or polynomials."""
        keep = [j for j, g in enumerate(self.gens) if g not in values]
        hit = [j for j, g in enumerate(self.gens) if g in values]
        if not hit:
            return self
        scalar = all(not isinstance(values[self.gens[j]], MultiPoly) for j in hit)
        if scalar:
            vals = [_coefficient(values[self.gens[j]]) for j in hit]
            gens = tuple(self.gens[j] for j in keep)
            out: dict = {}
            for e, c in self.terms.items():
                for j, v in zip(hit, vals):
                    k = e[j]
                    if k:
                        if not v:
                            if k < 0:
                                raise ZeroDivisionError(f"{self.gens[j]} -> 0 with negative power")
                            c = ZERO
                            break
                        c = c * v ** k
                if c:
                    key = tuple(e[j] for j in keep)
                    prev = out.get(key)
                    out[key] = c if prev is None else prev + c
            return MultiPoly._raw(gens, {k: v for k, v in out.items() if v})
        polys = {self.gens[j]: values[self.gens[j]] for j in hit}
        total = ZERO_POLY
        gens = tuple(self.gens[j] for j in keep)
        for e, c in self.terms.items():
            term = MultiPoly._raw(gens, {tuple(e[j] for j in keep): c})
            for j in hit:
                if e[j]:
                    v = polys[self.gens[j]]
                    if not isinstance(v, MultiPoly):
                        v = MultiPoly.const(v)
                    term = term * v ** e[j]
            total = total + term
        return total

    def rename(self, mapping: Mapping[str, str]) -> "MultiPoly":
        """Rename generators; colliding targets have exponents merged."""
        targets = [mapping.get(g, g) for g in self.gens]
        if len(set(targets)) == len(targets):
            return MultiPoly(targets, self.terms)
        gens = tuple(sorted(set(targets), key=generator_key))
        idx = [gens.index(t) for t in targets]
        out: dict = {}
        for e, c in self.terms.items():
            new = [0] * len(gens)
            for j, k in zip(idx, e):
                new[j] += k
            key = tuple(new)
            out[key] = out.get(key, ZERO) + c
        return MultiPoly(gens, out)

    def map_coefficients(self, fn) -> "MultiPoly":
        return MultiPoly._raw(self.gens, {e: fn(c) for e, c in self.terms.items()})

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        """Numeric value; every generator must be given."""
        missing = [g for g in self.gens if g not in values]
        if missing:
            raise KeyError(f"no numeric value for {missing}")
        vals = [complex(values[g]) for g in self.gens]
        total = 0j
        for e, c in self.terms.items():
            term = complex(c)
            for v, k in zip(vals, e):
                if k:
                    term *= v ** k
            total += term
        return total

    def is_real(self) -> bool:
        return all(c.is_real for c in self.terms.values())

    # text ---------------------------------------------------------------

    def sorted_terms(self):
        """Terms in graded-lex order (highest total degree first)."""
        return sorted(self.terms.items(), key=lambda ec: (-sum(ec[0]), tuple(-k for k in ec[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            factors = []
            for g, k in zip(self.gens, e):
                if k == 1:
                    factors.append(g)
                elif k:
                    factors.append(f"{g}^{k}")
            if not factors:
                parts.append(f"({format_coefficient(c)})")
            elif c == ONE:
                parts.append("*".join(factors))
            else:
                parts.append(f"({format_coefficient(c)})*" + "*".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"MultiPoly({str(self)!r})"

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = MultiPoly.const(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.gens == other.gens and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.gens, frozenset(self.terms.items()))))
        return self._hash

    @classmethod
    def parse(cls, text: str) -> "MultiPoly":
        return parse(text)


def _check_name(name: str):
    if not (_NAME_RE.match(name) or _JET_RE.match(name) or name.startswith("Int(")):
        raise ValueError(f"invalid generator name {name!r}")


def _prune(gens, terms):
    if not gens:
        return gens, terms
    used = [False] * len(gens)
    for e in terms:
        for j, k in enumerate(e):
            if k:
                used[j] = True
    if all(used):
        return gens, terms
    keep = [j for j, u in enumerate(used) if u]
    new_gens = tuple(gens[j] for j in keep)
    return new_gens, {tuple(e[j] for j in keep): c for e, c in terms.items()}


def _unify(a: MultiPoly, b: MultiPoly):
    if a.gens == b.gens:
        return a.gens, a.terms, b.terms
    gens = tuple(sorted(set(a.gens) | set(b.gens), key=generator_key))
    index = {g: j for j, g in enumerate(gens)}
    ta = a.terms if a.gens == gens else embed_terms(a.terms, [index[g] for g in a.gens], len(gens))
    tb = b.terms if b.gens == gens else embed_terms(b.terms, [index[g] for g in b.gens], len(gens))
    return gens, ta, tb


ZERO_POLY = MultiPoly()
ONE_POLY = MultiPoly.const(1)


def sym(name: str, power: int = 1) -> MultiPoly:
    return MultiPoly.symbol(name, power)


def const(value) -> MultiPoly:
    return MultiPoly.const(value)


# parsing ------------------------------------------------------------------


def parse(text: str) -> MultiPoly:
    """Parse the canonical text form produced by ``str(MultiPoly)``."""
    text = text.strip()
    if text == "0":
        return ZERO_POLY
    total_gens: dict[str, None] = {}
    rows = []
    for term in _split_top(text, " + "):
        coeff, powers = _parse_term(term)
        for g in powers:
            total_gens.setdefault(g, None)
        rows.append((coeff, powers))
    gens = tuple(sorted(total_gens, key=generator_key))
    terms: dict = {}
    for coeff, powers in rows:
        key = tuple(powers.get(g, 0) for g in gens)
        terms[key] = terms.get(key, ZERO) + coeff
    return MultiPoly(gens, terms)


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, start, i = [], 0, 0, 0
    while i < len(text):
        ch = text[i]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise ParseError(f"unbalanced parentheses in {text!r}")
        elif depth == 0 and text.startswith(sep, i):
            parts.append(text[start:i])
            i += len(sep)
            start = i
            continue
        i += 1
    if depth:
        raise ParseError(f"unbalanced parentheses in {text!r}")
    parts.append(text[start:])
    return [p.strip() for p in parts]


def _parse_term(term: str):
    coeff = ONE
    factors = _split_top(term, "*")
    if factors and factors[0].startswith("("):
        head = factors[0]
        if not head.endswith(")"):
            raise ParseError(f"bad coefficient in {term!r}")
        coeff = parse_coefficient(head[1:-1])
        factors = factors[1:]
    powers: dict[str, int] = {}
    for f in factors:
        name, k = _parse_factor(f)
        powers[name] = powers.get(name, 0) + k
    return coeff, powers


def _parse_factor(f: str) -> tuple[str, int]:
    power = 1
    if f.startswith("Int("):
        depth = 0
        for i, ch in enumerate(f):
            depth += ch == "("
            depth -= ch == ")"
            if depth == 0 and ch == ")":
                break
        else:
            raise ParseError(f"unbalanced marker {f!r}")
        inner, rest = f[4:i], f[i + 1:]
        name = f"Int({parse(inner)})"
    else:
        name, _, rest = f.partition("^")
        rest = "^" + rest if rest else ""
        _check_name(name)
    if rest:
        if not rest.startswith("^"):
            raise ParseError(f"bad factor {f!r}")
        try:
            power = int(rest[1:])
        except ValueError:
            raise ParseError(f"bad exponent in {f!r}") from None
    return name, power


def parse_coefficient(s: str) -> GaussianRational:
    try:
        return _parse_coefficient(s.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad coefficient {s!r}") from None


def _parse_coefficient(s: str) -> GaussianRational:
    if not s.endswith("i"):
        return GaussianRational(Fraction(s))
    body = s[:-1]
    if body.endswith("*"):
        body = body[:-1]
    split = max(body.rfind("+"), body.rfind("-"))
    if split > 0:
        re_part, im_part = body[:split], body[split:]
    else:
        re_part, im_part = "0", body
    if im_part in ("", "+"):
        im_part = "1"
    elif im_part == "-":
        im_part = "-1"
    return GaussianRational(Fraction(re_part), Fraction(im_part))
