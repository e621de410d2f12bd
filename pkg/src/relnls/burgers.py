"""Complex Burgers-Schrodinger velocity fields.

``V = -i (hbar/m) psi_x / psi`` links linear Schrodinger solutions to the
Burgers-Schrodinger equation ``i hbar V_t + (hbar^2/2m) V_xx + i hbar V V_x = 0``.
Numeric fields carry their x-jets ``(V, V_x, V_xx, ...)`` so that fields with
poles (Backlund outputs) can be evaluated on non-periodic windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .algebra import diffpoly as dp
from .algebra.dispersion import DispersionSeries
from .algebra.gaussian import I
from .algebra.poly import MultiPoly, sym
from .spectral import WaveState, spectral_derivatives


class NearZeroAmplitude(ValueError):
    """psi (nearly) vanishes on the evaluation window."""


class SingularLocus(ValueError):
    """The Backlund denominator vanishes on the evaluation window."""


class ShockReached(ValueError):
    """Requested time is at or past the shock time."""


class NoBracket(ValueError):
    """The implicit equation has no sign change on the profile's range."""


# numeric velocity fields ---------------------------------------------------


@dataclass(frozen=True)
class VelocityField:
    """Samples of ``V`` and its x-derivatives on an axis.

    ``jets[k]`` holds ``d^k V / dx^k``; ``mask`` marks the points where the
    field is trusted (the evaluation window).
    """

    x: np.ndarray
    jets: tuple
    time: float = 0.0
    hbar: float = 1.0
    m: float = 1.0
    eps: float = 0.0
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 16:
            raise ValueError("a velocity field needs at least 16 samples")
        jets = tuple(np.asarray(j, dtype=np.complex128) for j in self.jets)
        if not jets or any(j.shape != x.shape for j in jets):
            raise ValueError("jets must match the sample axis")
        mask = np.ones(x.shape, bool) if self.mask is None else np.asarray(self.mask, bool)
        for j in jets:
            if not np.all(np.isfinite(j[mask])):
                raise ValueError("non-finite velocity samples")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "jets", jets)
        object.__setattr__(self, "mask", mask)

    @property
    def values(self) -> np.ndarray:
        return self.jets[0]

    @property
    def classical(self) -> np.ndarray:
        return self.values.real

    @property
    def quantum(self) -> np.ndarray:
        return self.values.imag

    @property
    def log_amplitude_x(self) -> np.ndarray:
        """``d/dx ln|psi| = -(m/hbar) Im V``."""
        return -(self.m / self.hbar) * self.values.imag

    @property
    def order(self) -> int:
        return len(self.jets) - 1


def log_derivative_jets(g: Sequence[np.ndarray], order: int) -> list[np.ndarray]:
    """Jets of ``u = g'/g`` from jets of ``g`` (needs ``order + 2`` entries).

    Uses ``g^(k+1) = sum_j C(k, j) u^(j) g^(k-j)`` solved for ``u^(k)``.
    """
    if len(g) < order + 2:
        raise ValueError("not enough jets of g")
    u: list[np.ndarray] = []
    for k in range(order + 1):
        acc = g[k + 1].copy()
        for j in range(k):
            acc = acc - comb(k, j) * u[j] * g[k - j]
        u.append(acc / g[0])
    return u


def _window_mask(x: np.ndarray, window) -> np.ndarray:
    if window is None:
        return np.ones(x.shape, bool)
    if isinstance(window, tuple):
        a, b = window
        return (x >= a) & (x <= b)
    mask = np.asarray(window, bool)
    if mask.shape != x.shape:
        raise ValueError("window mask does not match the grid")
    return mask


def cole_hopf(psi: WaveState, hbar: float | None = None, m: float | None = None,
              order: int = 3, window=None, threshold: float | None = None) -> VelocityField:
    """``V = -i (hbar/m) psi_x/psi`` with spectral x-derivatives of ``psi``.

    ``window`` is ``None`` (whole grid), an interval ``(a, b)`` or a mask;
    ``threshold`` instead keeps the points where ``|psi| >= threshold max|psi|``.
    """
    hbar = psi.hbar if hbar is None else hbar
    m = psi.m if m is None else m
    grid = psi.grid
    x = grid.x
    amp = np.abs(psi.values)
    mask = _window_mask(x, window)
    if threshold is not None:
        mask = mask & (amp >= threshold * amp.max())
    if not mask.any() or amp[mask].min() <= 1e-8 * amp.max():
        raise NearZeroAmplitude("psi vanishes on the evaluation window")
    d = spectral_derivatives(grid, np.fft.fft(psi.values), range(1, order + 2))
    g = [psi.values] + [d[k] for k in range(1, order + 2)]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = log_derivative_jets(g, order)
        jets = [np.where(mask, -1j * hbar / m * uk, 0) for uk in u]
    return VelocityField(x, tuple(jets), psi.time, hbar, m, psi.eps, mask)


@dataclass(frozen=True)
class ResidualField:
    x: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    time: float

    @property
    def max_abs(self) -> float:
        # fixed-order reduction over the window
        return float(np.max(np.abs(self.values[self.mask]))) if self.mask.any() else 0.0


_STENCILS = {3: (np.array([-0.5, 0.0, 0.5]), 1), 5: (np.array([1, -8, 0, 8, -1]) / 12.0, 2)}


def nbs_residual(series: Sequence[VelocityField], hbar: float | None = None,
                 m: float | None = None) -> ResidualField:
    """``i hbar V_t + (hbar^2/2m) V_xx + i hbar V V_x`` at the middle slice.

    Time derivatives use centred differences (5-point when at least five
    equally spaced slices are given, else 3-point). Space derivatives come
    from the stored jets, or spectrally when only values are stored.
    """
    n = len(series)
    if n < 3:
        raise ValueError("need at least 3 time slices")
    width = 5 if n >= 5 else 3
    mid = n // 2
    slices = list(series[mid - width // 2: mid + width // 2 + 1])
    times = np.array([s.time for s in slices])
    steps = np.diff(times)
    dt = steps[0]
    if dt <= 0 or not np.allclose(steps, dt, rtol=1e-9, atol=0):
        raise ValueError("time slices must be equally spaced and increasing")
    centre = slices[width // 2]
    hbar = centre.hbar if hbar is None else hbar
    m = centre.m if m is None else m
    weights, _ = _STENCILS[width]
    v_t = sum(w * s.values for w, s in zip(weights, slices)) / dt
    if centre.order >= 2:
        v, v_x, v_xx = centre.jets[:3]
    else:
        v = centre.values
        k = 2 * np.pi * np.fft.fftfreq(v.size, d=centre.x[1] - centre.x[0])
        spec = np.fft.fft(v)
        v_x = np.fft.ifft(1j * k * spec)
        v_xx = np.fft.ifft(-(k ** 2) * spec)
    res = 1j * hbar * v_t + hbar ** 2 / (2 * m) * v_xx + 1j * hbar * v * v_x
    mask = np.logical_and.reduce([s.mask for s in slices])
    return ResidualField(centre.x, np.where(mask, res, 0), mask, centre.time)


# symbolic Madelung forms ---------------------------------------------------

V_FIELD = "V"
V_T = "V_t"


def velocity_operator(f: MultiPoly, v: MultiPoly | None = None) -> MultiPoly:
    """``(-i hbar D + m V) f``."""
    v = dp.jet(V_FIELD) if v is None else v
    return dp.total_x_derivative(f) * (-I) * sym("hbar") + sym("m") * v * f


def general_madelung_residual(dispersion: DispersionSeries) -> MultiPoly:
    """``i hbar V_t + i (hbar/m) D[E(-i hbar D + m V) 1]`` in the field ``V``."""
    inner = dispersion.apply(velocity_operator, MultiPoly.const(1))
    hbar, m = sym("hbar"), sym("m")
    return I * hbar * dp.jet(V_T) + I * hbar * m ** -1 * dp.total_x_derivative(inner)


def _divide_monomial(f: MultiPoly, gen: str) -> MultiPoly:
    parts = f.collect(gen)
    if 0 in parts and not parts[0].is_zero():
        raise ValueError(f"polynomial is not divisible by {gen}")
    return sum((c * sym(gen) ** (k - 1) for k, c in parts.items() if k), MultiPoly.const(0))


def velocity_form(dispersion: DispersionSeries) -> MultiPoly:
    """Residual divided by ``i hbar``: ``V_t + (1/m) D[E(-i hbar D + m V) 1]``."""
    return _divide_monomial(general_madelung_residual(dispersion), "hbar") * (-I)


def hydrodynamic_limit(dispersion: DispersionSeries) -> MultiPoly:
    """``hbar = 0`` of :func:`velocity_form`, i.e. ``V_t + E'(m V) V_x``."""
    return velocity_form(dispersion).subs({"hbar": 0})


def printed_ncbs_correction() -> MultiPoly:
    """The O(eps) part of the residual as the printed correction reads:
    ``-(eps/8m^3)[-hbar^4 V_xxxx - i m hbar^3 (10 V_x V_xx + 4 V V_xxx)
    + m^2 hbar^2 (12 V V_x^2 + 6 V^2 V_xx) + 4 i m^3 hbar V^3 V_x]``."""
    V = [dp.jet(V_FIELD, k) for k in range(5)]
    hbar, m, eps = sym("hbar"), sym("m"), sym("eps")
    bracket = (
        -(hbar ** 4) * V[4]
        - I * m * hbar ** 3 * (10 * V[1] * V[2] + 4 * V[0] * V[3])
        + m ** 2 * hbar ** 2 * (12 * V[0] * V[1] ** 2 + 6 * V[0] ** 2 * V[2])
        + 4 * I * m ** 3 * hbar * V[0] ** 3 * V[1]
    )
    return -(eps * m ** -3 * bracket) / 8


@dataclass(frozen=True)
class TermDiff:
    monomial: str
    derived: str
    printed: str


def ncbs_diff(dispersion: DispersionSeries | None = None) -> list[TermDiff]:
    """Term-by-term comparison of the derived O(eps) correction with the
    printed one. An empty list means they agree exactly."""
    from .algebra.dispersion import dispersion_make

    dispersion = dispersion_make("sr", 1) if dispersion is None else dispersion
    derived = general_madelung_residual(dispersion).coeff("eps", 1) * sym("eps")
    printed = printed_ncbs_correction()
    out = []
    keys = {str(_monomial_of(e, derived.gens)) for e in derived.terms}
    keys |= {str(_monomial_of(e, printed.gens)) for e in printed.terms}
    dterms = _by_monomial(derived)
    pterms = _by_monomial(printed)
    for key in sorted(keys):
        a, b = dterms.get(key), pterms.get(key)
        if a != b:
            out.append(TermDiff(key, str(a) if a is not None else "0", str(b) if b is not None else "0"))
    return out


def _monomial_of(exps, gens) -> MultiPoly:
    return MultiPoly.monomial(1, {g: e for g, e in zip(gens, exps) if e})


def _by_monomial(f: MultiPoly) -> dict[str, object]:
    return {str(_monomial_of(e, f.gens)): c for e, c in f.terms.items()}


# Backlund transformations ----------------------------------------------------


@dataclass(frozen=True)
class SymbolicBacklund:
    """``V2 = V1 - i (hbar/m) Q_x / Q`` kept as the pair ``(V1, Q)``."""

    v1: MultiPoly
    q: MultiPoly
    numerator: MultiPoly = None

    def __post_init__(self):
        if self.numerator is None:
            num = -I * sym("hbar") * sym("m") ** -1 * dp.total_x_derivative(self.q)
            object.__setattr__(self, "numerator", num)

    @property
    def q_x(self) -> MultiPoly:
        return dp.total_x_derivative(self.q)

    @property
    def correction_numerator(self) -> MultiPoly:
        """``-i (hbar/m) Q_x``; ``V2 = V1 + numerator / Q``."""
        return self.numerator

    def subs(self, values) -> "SymbolicBacklund":
        return SymbolicBacklund(self.v1.subs(values), self.q.subs(values), self.numerator.subs(values))

    def is_identity(self) -> bool:
        return self.correction_numerator.is_zero()

    def evaluate(self, values) -> complex:
        """Numeric ``V2`` at a point; raises :class:`SingularLocus` if ``Q = 0``."""
        q = self.q.evaluate(values)
        if q == 0:
            raise SingularLocus("Q vanishes")
        return self.v1.evaluate(values) + self.correction_numerator.evaluate(values) / q

    def __str__(self):
        return f"V2 = {self.v1} + ({self.correction_numerator}) / ({self.q})"


def backlund_semirel(dispersion: DispersionSeries, v1: MultiPoly | None = None) -> SymbolicBacklund:
    """``Q = x - t E'(-i hbar D + m V1) 1`` for a symbolic seed ``V1``."""
    v1 = dp.jet(V_FIELD) if v1 is None else v1
    speed = dispersion.derivative().apply(lambda f: velocity_operator(f, v1), MultiPoly.const(1))
    return SymbolicBacklund(v1, sym("x") - sym("t") * speed)


def _nr():
    from .algebra.dispersion import dispersion_make

    return dispersion_make("nr")


def backlund_nonrel(v1, t: float | None = None, exclude: float = 0.1):
    """``V2 = V1 - i (hbar/m)(1 - V1_x t)/(x - V1 t)``.

    Symbolic seeds (a :class:`MultiPoly`) give a :class:`SymbolicBacklund`;
    a :class:`VelocityField` gives a field whose window drops points within
    ``exclude`` of a zero of the denominator.
    """
    if isinstance(v1, MultiPoly):
        return backlund_semirel(_nr(), v1)
    t = v1.time if t is None else t
    if v1.order < 1:
        raise ValueError("seed needs at least its first x-derivative")
    x = v1.x
    d = [x - t * v1.jets[0], 1 - t * v1.jets[1]] + [-t * j for j in v1.jets[2:]]
    return _apply_backlund(v1, d, exclude)


def _apply_backlund(v1: VelocityField, d: list[np.ndarray], exclude: float) -> VelocityField:
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = np.abs(d[0]) / np.maximum(np.abs(d[1]), 1e-300)
    mask = v1.mask & (dist >= exclude) & (np.abs(d[0]) > 0)
    if not mask.any():
        raise SingularLocus("the whole window lies on the singular locus")
    safe = [np.where(mask, dk, 1.0) for dk in d]
    lj = log_derivative_jets(safe, len(d) - 2)
    scale = -1j * v1.hbar / v1.m
    jets = [np.where(mask, v + scale * l, 0) for v, l in zip(v1.jets, lj)]
    return VelocityField(v1.x, tuple(jets), v1.time, v1.hbar, v1.m, v1.eps, mask)


def backlund_field(sym_bt: SymbolicBacklund, v1: VelocityField, params: dict,
                   exclude: float = 0.1) -> VelocityField:
    """Evaluate a symbolic transformation on a numeric seed field.

    ``Q`` and its x-derivatives are formed symbolically and sampled using the
    seed's jets (``V[k]``) together with ``x``, ``t`` and ``params``.
    """
    q_jets = [sym_bt.q]
    for _ in range(v1.order):
        q_jets.append(dp.total_x_derivative(q_jets[-1]))
    env = dict(params)
    env.update({"x": v1.x, "t": v1.time, "hbar": v1.hbar, "m": v1.m})
    env.update({f"{V_FIELD}[{k}]": j for k, j in enumerate(v1.jets)})
    d = [_sample(q, env, v1.x.shape) for q in q_jets]
    return _apply_backlund(v1, d, exclude)


def _sample(f: MultiPoly, env: dict, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=np.complex128)
    for exps, c in f.terms.items():
        term = np.full(shape, complex(c))
        for g, e in zip(f.gens, exps):
            if e:
                term = term * np.asarray(env[g]) ** e
        out += term
    return out


# dispersionless characteristics ----------------------------------------------


def speed_nonrel(v):
    return v


def speed_relativistic(c: float) -> Callable:
    """Exact ``v / sqrt(1 + v^2/c^2)``."""
    return lambda v: v / np.sqrt(1 + (v / c) ** 2)


def speed_relativistic_prime(c: float) -> Callable:
    return lambda v: (1 + (v / c) ** 2) ** -1.5


def speed_from_dispersion(dispersion: DispersionSeries, values: dict) -> tuple[Callable, Callable]:
    """``v -> E'(m v)`` and its v-derivative from a truncated series."""
    m = complex(values["m"]).real
    coeffs = {n: complex(c).real for n, c in dispersion.numeric(values).items()}

    def speed(v):
        return sum(n * c * (m * v) ** (n - 1) for n, c in coeffs.items())

    def speed_prime(v):
        return sum(n * (n - 1) * c * m * (m * v) ** (n - 2) for n, c in coeffs.items() if n > 1)

    return speed, speed_prime


@dataclass(frozen=True)
class CharacteristicProfile:
    """Initial classical velocity ``f`` and characteristic speed ``v -> E'(m v)``."""

    f: Callable
    speed: Callable
    domain: tuple[float, float] = (-20.0, 20.0)
    f_prime: Callable | None = None
    speed_prime: Callable | None = None
    check: bool = True

    def __post_init__(self):
        a, b = self.domain
        if not a < b:
            raise ValueError("empty domain")
        if self.check:
            kinks = []
            for n in (2001, 4001):
                xs = np.linspace(a, b, n)
                fx = np.asarray(self.f(xs), dtype=float)
                if not np.all(np.isfinite(fx)):
                    raise ValueError("profile is not finite on its domain")
                kinks.append(float(np.max(np.abs(np.diff(np.diff(fx) / (xs[1] - xs[0]))))))
            # slope increments shrink like h for a C^1 profile; a kink or a
            # jump keeps them constant or makes them grow
            if kinks[1] > 1e-8 and kinks[1] > 0.75 * kinks[0]:
                raise ValueError("profile is not continuously differentiable")

    def fp(self, x):
        if self.f_prime is not None:
            return self.f_prime(x)
        h = 1e-5
        return (self.f(x + h) - self.f(x - h)) / (2 * h)

    def sp(self, v):
        if self.speed_prime is not None:
            return self.speed_prime(v)
        h = 1e-6 * max(1.0, float(np.max(np.abs(v))))
        return (self.speed(v + h) - self.speed(v - h)) / (2 * h)

    def slope(self, x0):
        """``d/dx0 speed(f(x0))``."""
        return self.sp(self.f(x0)) * self.fp(x0)


def tanh_profile(kind: str = "minus", c: float = math.inf, domain=(-20.0, 20.0)) -> CharacteristicProfile:
    """``-tanh``, ``+tanh`` or ``1 - tanh`` with nonrel or exact relativistic speed."""
    table = {
        "minus": (lambda x: -np.tanh(x), lambda x: -1 / np.cosh(x) ** 2),
        "plus": (lambda x: np.tanh(x), lambda x: 1 / np.cosh(x) ** 2),
        "one-minus": (lambda x: 1 - np.tanh(x), lambda x: -1 / np.cosh(x) ** 2),
    }
    f, fp = table[kind]
    if math.isinf(c):
        return CharacteristicProfile(f, speed_nonrel, domain, fp, lambda v: np.ones_like(np.asarray(v, float)))
    return CharacteristicProfile(f, speed_relativistic(c), domain, fp, speed_relativistic_prime(c))


def shock_time(prof: CharacteristicProfile, samples: int = 20001) -> float | None:
    """``-1 / min d/dx0 speed(f(x0))`` by a dense scan and bounded refinement."""
    a, b = prof.domain
    xs = np.linspace(a, b, samples)
    g = np.asarray(prof.slope(xs), dtype=float)
    j = int(np.argmin(g))
    if g[j] >= 0:
        return None
    lo, hi = xs[max(j - 1, 0)], xs[min(j + 1, samples - 1)]
    best = g[j]
    if hi > lo:
        res = minimize_scalar(lambda s: float(prof.slope(s)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        best = min(best, float(res.fun))
    return -1.0 / best


def shock_time_crossing(prof: CharacteristicProfile, samples: int = 200001,
                        spacing: float = 1e-5) -> float | None:
    """Earliest crossing of neighbouring characteristics ``x0 + speed(f(x0)) t``.

    Independent of :func:`shock_time`: uses only values of ``f`` and
    ``speed``. A coarse pass locates the first crossing, a second pass with
    ray spacing ``spacing`` resolves it (finer spacing only adds rounding).
    """

    def first_crossing(a, b, n):
        x0 = np.linspace(a, b, n)
        s = np.asarray(prof.speed(prof.f(x0)), dtype=float)
        ds = np.diff(s)
        with np.errstate(divide="ignore"):
            tc = np.where(ds < 0, -np.diff(x0) / ds, np.inf)
        j = int(np.argmin(tc))
        return x0[j], float(tc[j])

    a, b = prof.domain
    xj, tc = first_crossing(a, b, samples)
    if not np.isfinite(tc):
        return None
    half = 50 * (b - a) / samples
    a, b = max(xj - half, a), min(xj + half, b)
    return first_crossing(a, b, int((b - a) / spacing) + 1)[1]


def characteristics_solve(prof: CharacteristicProfile, x: float, t: float,
                          t_shock: float | None = ...) -> float:
    """Solve ``V = f(x - speed(V) t)`` for the pre-shock classical velocity."""
    if t_shock is ...:
        t_shock = shock_time(prof)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t_shock is not None and t >= t_shock:
        raise ShockReached(f"t = {t} >= t* = {t_shock}")
    if t == 0:
        return float(prof.f(x))
    xs = np.linspace(*prof.domain, 4001)
    fx = np.asarray(prof.f(xs), dtype=float)
    lo, hi = float(fx.min()), float(fx.max())
    pad = 1e-9 * max(1.0, hi - lo)
    lo, hi = lo - pad, hi + pad

    def resid(v):
        return v - float(prof.f(x - float(prof.speed(v)) * t))

    r_lo, r_hi = resid(lo), resid(hi)
    if r_lo == 0:
        return lo
    if r_hi == 0:
        return hi
    if r_lo * r_hi > 0:
        raise NoBracket(f"no sign change of the implicit equation on [{lo}, {hi}]")
    return brentq(resid, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
