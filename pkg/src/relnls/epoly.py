"""E-polynomials, the boost recursion and point-vortex dynamics.

``H_n(x, t) = exp(-(i/hbar) E~(-i hbar d/dx) t) x^n`` for a shifted
dispersion ``E~``. Zeros of ``H_n`` in the complex x-plane move as point
vortices whose velocities are residues of ``E~`` applied to the logarithmic
derivative of ``prod_l (x - x_l)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import linear_sum_assignment

from .algebra.dispersion import DispersionSeries, apply_series
from .algebra.gaussian import I
from .algebra.poly import ZERO_POLY, MultiPoly, sym


class CoalescedVortices(ValueError):
    """Two vortex positions are closer than the separation threshold."""


# alternate spelling, kept as an alias
ColaescedVortices = CoalescedVortices


class RootTrackingAmbiguous(RuntimeError):
    """Two roots came within the matching tolerance; labels would be a guess."""


MIN_SEPARATION = 1e-9


@dataclass(frozen=True)
class EPolynomial:
    n: int
    dispersion: DispersionSeries
    poly: MultiPoly

    def __str__(self):
        return str(self.poly)

    def x_coefficients(self, values: Mapping[str, complex]) -> np.ndarray:
        """Numeric coefficients in x, highest power first (numpy.roots order)."""
        parts = self.poly.collect("x")
        coeffs = np.zeros(self.n + 1, dtype=complex)
        for k, c in parts.items():
            coeffs[self.n - k] = c.evaluate(values)
        return coeffs

    def __call__(self, x, values: Mapping[str, complex]):
        return np.polyval(self.x_coefficients(values), x)


def _momentum_op(f: MultiPoly) -> MultiPoly:
    """``P = -i hbar d/dx`` on polynomials in x."""
    return f.diff("x") * sym("hbar") * (-I)


def hamiltonian_apply(dispersion: DispersionSeries, f: MultiPoly) -> MultiPoly:
    """``E~(-i hbar d/dx) f``."""
    return apply_series(dispersion.coeffs, _momentum_op, f)


def _propagator_step(dispersion: DispersionSeries, f: MultiPoly) -> MultiPoly:
    # -(i/hbar) E~(P) f with the 1/hbar absorbed: each E_N P^N carries hbar^N
    hbar = sym("hbar")
    total = ZERO_POLY
    for n, c in dispersion.coeffs.items():
        d = f
        for _ in range(n):
            d = d.diff("x")
        if d.is_zero():
            continue
        total = total + d * c * hbar ** (n - 1) * (-I) ** (n + 1)
    return total


def epoly_generate(dispersion: DispersionSeries, n: int) -> EPolynomial:
    """Expand the propagator on ``x^n``; the series stops after ``n//2`` terms
    when ``E~`` has no linear part."""
    if n < 0:
        raise ValueError("n must be >= 0")
    t = sym("t")
    term = sym("x") ** n
    total = term
    k = 0
    while True:
        k += 1
        term = _propagator_step(dispersion, term)
        if term.is_zero():
            break
        total = total + term * t ** k / factorial(k)
    return EPolynomial(n, dispersion, total)


def schrodinger_residual(hp: EPolynomial) -> MultiPoly:
    """``i hbar dH/dt - E~(-i hbar d/dx) H``; exactly zero for an E-polynomial."""
    return hp.poly.diff("t") * sym("hbar") * I - hamiltonian_apply(hp.dispersion, hp.poly)


def boost_apply(dispersion: DispersionSeries, hp: EPolynomial) -> EPolynomial:
    """``K H = [x - t E~'(-i hbar d/dx)] H``."""
    deriv = dispersion.derivative()
    shifted = apply_series(deriv.coeffs, _momentum_op, hp.poly)
    return EPolynomial(hp.n + 1, dispersion, sym("x") * hp.poly - sym("t") * shifted)


def hermite(n: int, y):
    """Physicists' Hermite polynomial by the three-term recurrence."""
    y = np.asarray(y, dtype=complex)
    h_prev, h = np.ones_like(y), 2 * y
    if n == 0:
        return h_prev
    for k in range(1, n):
        h_prev, h = h, 2 * y * h - 2 * k * h_prev
    return h


def hermite_crosscheck(n: int, hbar: float = 1.0, m: float = 1.0, t: float = 1.0,
                       samples=None, rng=None) -> float:
    """Max deviation between ``H_n^(S)`` and the scaled Hermite closed form.

    ``H_n^(S)(x,t) = s^(n/2) He_n(x / (2 sqrt(s)))`` with ``s = -i hbar t/2m``;
    the same branch of ``sqrt(s)`` is used on both factors.
    """
    from .algebra.dispersion import dispersion_make

    if n > 10:
        raise ValueError("cross-check limited to n <= 10")
    if t == 0:
        raise ValueError("t must be nonzero")
    if samples is None:
        rng = np.random.default_rng(0) if rng is None else rng
        samples = rng.uniform(-2, 2, 16) + 1j * rng.uniform(-2, 2, 16)
    samples = np.asarray(samples, dtype=complex)
    hp = epoly_generate(dispersion_make("nonrelativistic"), n)
    direct = hp(samples, {"hbar": hbar, "m": m, "t": t})
    root = np.sqrt(-1j * hbar * t / (2 * m))
    closed = root ** n * hermite(n, samples / (2 * root))
    return float(np.max(np.abs(direct - closed)))


# point vortices -----------------------------------------------------------


class _PoleExpansion:
    """Rational function ``sum_j a_j x^j + sum_{l,r} b_{l,r} (x - x_l)^-r``."""

    __slots__ = ("positions", "poly", "poles")

    def __init__(self, positions, poly=None, poles=None):
        self.positions = positions
        self.poly = poly or {}
        self.poles = poles or {}

    def copy_scaled(self, c):
        return _PoleExpansion(self.positions,
                              {k: v * c for k, v in self.poly.items()},
                              {k: v * c for k, v in self.poles.items()})

    def __add__(self, other):
        poly = dict(self.poly)
        for k, v in other.poly.items():
            poly[k] = poly.get(k, 0) + v
        poles = dict(self.poles)
        for k, v in other.poles.items():
            poles[k] = poles.get(k, 0) + v
        return _PoleExpansion(self.positions, poly, poles)

    def __mul__(self, c):
        return self.copy_scaled(c)

    def derivative(self):
        poly = {k - 1: k * v for k, v in self.poly.items() if k}
        poles = {(l, r + 1): -r * v for (l, r), v in self.poles.items()}
        return _PoleExpansion(self.positions, poly, poles)

    def over_linear(self, q):
        """Multiply by ``1/(x - x_q)`` and re-expand in partial fractions."""
        b = self.positions[q]
        poly, poles = {}, {}

        def bump(key, v):
            poles[key] = poles.get(key, 0) + v

        for j, v in self.poly.items():
            for i in range(j):
                poly[i] = poly.get(i, 0) + v * b ** (j - 1 - i)
            bump((q, 1), v * b ** j)
        for (l, r), v in self.poles.items():
            if l == q:
                bump((q, r + 1), v)
                continue
            d = b - self.positions[l]
            bump((q, 1), v / d ** r)
            for s in range(1, r + 1):
                bump((l, s), -v / d ** (r - s + 1))
        return _PoleExpansion(self.positions, poly, poles)

    def residue(self, k):
        return self.poles.get((k, 1), 0)


@dataclass(frozen=True)
class VortexConfig:
    positions: tuple
    dispersion: DispersionSeries
    hbar: float = 1.0
    m: float = 1.0
    eps: float = 0.0

    def __post_init__(self):
        pos = tuple(complex(z) for z in self.positions)
        object.__setattr__(self, "positions", pos)
        for a in range(len(pos)):
            for b in range(a + 1, len(pos)):
                if abs(pos[a] - pos[b]) <= MIN_SEPARATION:
                    raise CoalescedVortices(
                        f"vortices {a} and {b} are closer than {MIN_SEPARATION:g}")

    def with_positions(self, positions) -> "VortexConfig":
        return VortexConfig(tuple(positions), self.dispersion, self.hbar, self.m, self.eps)

    def numeric_dispersion(self) -> dict[int, complex]:
        return self.dispersion.numeric({"m": self.m, "eps": self.eps, "hbar": self.hbar})


def vortex_rhs(cfg: VortexConfig) -> np.ndarray:
    """``dx_k/dt = (i/hbar) Res_{x=x_k} E~((hbar/i)(d/dx + sum_l 1/(x-x_l))) 1``.

    The operator power series is expanded into partial fractions over the
    vortex positions and the simple-pole coefficient at each ``x_k`` read off.
    """
    pos = cfg.positions
    nv = len(pos)
    coeffs = cfg.numeric_dispersion()
    scale = -1j * cfg.hbar

    def op(f: _PoleExpansion) -> _PoleExpansion:
        out = f.derivative()
        for q in range(nv):
            out = out + f.over_linear(q)
        return out * scale

    one = _PoleExpansion(pos, {0: 1.0 + 0j})
    total = _PoleExpansion(pos)
    current = one
    for n in range(1, max(coeffs, default=0) + 1):
        current = op(current)
        c = coeffs.get(n)
        if c:
            total = total + current * c
    return np.array([1j / cfg.hbar * total.residue(k) for k in range(nv)], dtype=complex)


def vortex_rhs_direct(cfg: VortexConfig) -> np.ndarray:
    """Independent route: ``(i/hbar) [E~(P) Psi](x_k) / Psi'(x_k)`` with
    ``Psi = prod (x - x_l)``."""
    psi = np.poly(np.array(cfg.positions))
    coeffs = cfg.numeric_dispersion()
    hpsi = np.zeros(1, dtype=complex)
    d = psi.astype(complex)
    for n in range(1, max(coeffs, default=0) + 1):
        d = np.polyder(d) * (-1j * cfg.hbar) if len(d) > 1 else np.zeros(1, dtype=complex)
        if n in coeffs:
            hpsi = np.polyadd(hpsi, coeffs[n] * d)
    dpsi = np.polyder(psi)
    x = np.array(cfg.positions)
    return 1j / cfg.hbar * np.polyval(hpsi, x) / np.polyval(dpsi, x)


def _match(prev: np.ndarray, new: np.ndarray) -> np.ndarray:
    cost = np.abs(prev[:, None] - new[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty_like(new)
    out[rows] = new[cols]
    return out


def zero_trajectories(dispersion: DispersionSeries, n: int, times: Sequence[float],
                      hbar: float = 1.0, m: float = 1.0, eps: float = 0.0,
                      tol: float = 1e-4) -> np.ndarray:
    """Roots of ``H_n(., t)`` for each time, labelled continuously.

    Returns an array of shape ``(len(times), n)``. Raises
    :class:`RootTrackingAmbiguous` when two roots at one time are closer
    than ``tol`` times the domain scale.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    hp = epoly_generate(dispersion, n)
    out = np.empty((len(times), n), dtype=complex)
    prev = None
    for i, t in enumerate(times):
        roots = np.roots(hp.x_coefficients({"hbar": hbar, "m": m, "eps": eps, "t": t}))
        if len(roots) < n:
            roots = np.concatenate([roots, np.zeros(n - len(roots), dtype=complex)])
        scale = max(1.0, float(np.max(np.abs(roots))))
        if n > 1:
            gaps = np.abs(roots[:, None] - roots[None, :])
            gaps[np.diag_indices(n)] = np.inf
            if gaps.min() < tol * scale:
                raise RootTrackingAmbiguous(f"roots closer than {tol * scale:g} at t={t}")
        if prev is None:
            roots = np.sort_complex(roots)
        else:
            roots = _match(prev, roots)
        out[i] = roots
        prev = roots
    return out


def integrate_vortices(cfg: VortexConfig, t0: float, t1: float, t_eval,
                       rtol: float = 1e-9, atol: float = 1e-12) -> np.ndarray:
    """Integrate the vortex ODE with DOP853; returns ``(len(t_eval), N)``."""
    nv = len(cfg.positions)

    def rhs(t, y):
        z = y[:nv] + 1j * y[nv:]
        v = vortex_rhs(cfg.with_positions(z))
        return np.concatenate([v.real, v.imag])

    z0 = np.array(cfg.positions)
    sol = solve_ivp(rhs, (t0, t1), np.concatenate([z0.real, z0.imag]), method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(sol.message)
    return (sol.y[:nv] + 1j * sol.y[nv:]).T


def vortex_crosscheck(dispersion: DispersionSeries, n: int, t0: float = 0.1, t1: float = 1.0,
                      samples: int = 50, hbar: float = 1.0, m: float = 1.0,
                      eps: float = 0.0) -> float:
    """Max distance between tracked zeros of ``H_n`` and the integrated ODE."""
    times = np.linspace(t0, t1, samples)
    tracks = zero_trajectories(dispersion, n, times, hbar, m, eps)
    cfg = VortexConfig(tuple(tracks[0]), dispersion, hbar, m, eps)
    ode = integrate_vortices(cfg, t0, t1, times)
    return float(np.max(np.abs(ode - tracks)))
