"""Pseudospectral evolution on a periodic 1-D grid.

Linear dispersion is applied exactly as a Fourier multiplier; the nonlinear
part of the relativistic NLS is taken from the symbolic ``F(psi)`` of
:mod:`relnls.akns`, compiled to a pointwise kernel and integrated with RK4
inside a Strang splitting. Numerical runs use units with ``hbar = 1`` for
the nonlinear equation (the recursion operator carries no ``hbar``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ._backend import eval_monomials
from .algebra.dispersion import binomial_half
from .algebra.poly import MultiPoly, is_jet, split_jet


class StabilityGuard(ValueError):
    """Time step too large for the explicit nonlinear substep."""


class BlowUp(RuntimeError):
    """Amplitude grew beyond 1e6 times its initial maximum."""


@dataclass(frozen=True)
class Grid1D:
    length: float
    n: int

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError("n must be a power of two >= 8")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.length / 2 + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def dealias_mask(self) -> np.ndarray:
        """2/3-rule: keep modes with ``|j| < n/3``."""
        j = np.fft.fftfreq(self.n) * self.n
        return np.abs(j) < self.n / 3

    def derivative(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        return spectral_derivatives(self, np.fft.fft(values), [order])[order]


def spectral_derivatives(grid: Grid1D, spectrum: np.ndarray, orders) -> dict[int, np.ndarray]:
    """Derivatives of a field given its FFT; odd orders drop the Nyquist mode."""
    ik = 1j * grid.k
    out = {}
    for order in orders:
        if order == 0:
            out[0] = np.fft.ifft(spectrum)
            continue
        mult = ik ** order
        if order % 2:
            mult[grid.n // 2] = 0
        out[order] = np.fft.ifft(spectrum * mult)
    return out


@dataclass(frozen=True)
class WaveState:
    grid: Grid1D
    values: np.ndarray
    time: float = 0.0
    hbar: float = 1.0
    m: float = 1.0
    c: float = math.inf
    kappa2: float = 0.0
    norm0: float = field(default=None)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128)
        if vals.shape != (self.grid.n,):
            raise ValueError("values do not match the grid")
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite samples")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.norm0 is None:
            object.__setattr__(self, "norm0", norm(self.grid, vals))

    @property
    def eps(self) -> float:
        return 0.0 if math.isinf(self.c) else 1.0 / self.c ** 2

    def evolved(self, values: np.ndarray, time: float) -> "WaveState":
        return WaveState(self.grid, values, time, self.hbar, self.m, self.c, self.kappa2, self.norm0)


def norm(grid: Grid1D, values: np.ndarray) -> float:
    return float(np.sum(np.abs(values) ** 2) * grid.dx)


# initial conditions --------------------------------------------------------


def soliton_profile(grid: Grid1D, eta: float = 1.0, kappa2: float = 1.0, m: float = 0.5,
                    t: float = 0.0, x0: float = 0.0) -> np.ndarray:
    """Bright soliton of ``i psi_t = (1/2m)(-psi_xx - 2 kappa2 |psi|^2 psi)``:
    ``(eta/kappa) sech(eta (x - x0)) exp(i eta^2 t / 2m)``."""
    kappa = math.sqrt(kappa2)
    return eta / kappa / np.cosh(eta * (grid.x - x0)) * np.exp(1j * eta ** 2 * t / (2 * m))


def gaussian_profile(grid: Grid1D, sigma: float = 1.0, x0: float = 0.0, k0: float = 0.0) -> np.ndarray:
    """Unit-norm Gaussian packet ``exp(-(x-x0)^2/4 sigma^2 + i k0 x)``."""
    x = grid.x
    return (2 * np.pi * sigma ** 2) ** -0.25 * np.exp(-((x - x0) ** 2) / (4 * sigma ** 2) + 1j * k0 * x)


def plane_profile(grid: Grid1D, mode: int = 1) -> np.ndarray:
    return np.exp(1j * 2 * np.pi * mode / grid.length * (grid.x + grid.length / 2))


# linear part ---------------------------------------------------------------


def dispersion_rate(k: np.ndarray, hbar: float, m: float, c: float,
                    kind: str = "semirel-exact", order: int | None = None) -> np.ndarray:
    """``(E(hbar k) - E0)/hbar`` for the requested dispersion."""
    k = np.asarray(k, dtype=float)
    p = hbar * k
    if kind == "nonrel" or (kind.startswith("semirel") and math.isinf(c)):
        return p ** 2 / (2 * m) / hbar
    if kind == "semirel-exact":
        q = (p / (m * c)) ** 2
        # m c^2 (sqrt(1+q) - 1) without cancellation
        return m * c ** 2 * q / (np.sqrt(1 + q) + 1) / hbar
    if kind == "semirel-truncated":
        if order is None or order < 0:
            raise ValueError("semirel-truncated needs an eps order K >= 0")
        eps = 1.0 / c ** 2
        total = np.zeros_like(p)
        for j in range(1, order + 2):
            total = total + float(binomial_half(j)) * eps ** (j - 1) * p ** (2 * j) / m ** (2 * j - 1)
        return total / hbar
    raise ValueError(f"unknown dispersion kind {kind!r}")


def linear_propagate(state: WaveState, dt: float, kind: str = "semirel-exact",
                     order: int | None = None) -> WaveState:
    """Exact linear step ``psi^(k) <- psi^(k) exp(-i dt (E(hbar k) - E0)/hbar)``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    omega = dispersion_rate(state.grid.k, state.hbar, state.m, state.c, kind, order)
    out = np.fft.ifft(np.fft.fft(state.values) * np.exp(-1j * dt * omega))
    return state.evolved(out, state.time + dt)


# compiled differential polynomials ----------------------------------------


class CompiledDiffPoly:
    """Numeric evaluator for a differential polynomial in ``psi``/``psibar``.

    Parameters are substituted numerically; ``psibar[k]`` is taken as the
    complex conjugate of ``psi[k]``.
    """

    def __init__(self, poly: MultiPoly, params: Mapping[str, float]):
        jets = [g for g in poly.gens if is_jet(g)]
        others = [g for g in poly.gens if not is_jet(g)]
        missing = [g for g in others if g not in params]
        if missing:
            raise KeyError(f"no numeric value for {missing}")
        for g in jets:
            if split_jet(g)[0] not in ("psi", "psibar"):
                raise ValueError(f"unsupported field in {g}")
        self.jets = [split_jet(g) for g in jets]
        self.orders = sorted({k for _, k in self.jets})
        jidx = [poly.gens.index(g) for g in jets]
        oidx = [poly.gens.index(g) for g in others]
        rows, coeffs = [], []
        for e, c in poly.sorted_terms():
            val = complex(c)
            for j, g in zip(oidx, others):
                val *= complex(params[g]) ** e[j]
            rows.append([e[j] for j in jidx])
            coeffs.append(val)
        self.exps = np.array(rows, dtype=np.int_).reshape(len(rows), len(jets))
        self.coeffs = np.array(coeffs, dtype=np.complex128)
        self.degrees = self.exps.sum(axis=1)
        self.derivative_orders = np.array(
            [sum(k * e for (_, k), e in zip(self.jets, row)) for row in self.exps], dtype=int)

    def __call__(self, derivs: Mapping[int, np.ndarray]) -> np.ndarray:
        stack = np.empty((len(self.jets), len(derivs[self.orders[0]])), dtype=np.complex128)
        for j, (field_name, k) in enumerate(self.jets):
            stack[j] = derivs[k] if field_name == "psi" else np.conj(derivs[k])
        return eval_monomials(stack, self.exps, self.coeffs)

    def rate_bound(self, amplitude: float, kmax: float) -> float:
        """Crude bound on the linearized rate of ``psi_t = -i F(psi)``."""
        deg = np.maximum(self.degrees - 1, 0)
        return float(np.sum(np.abs(self.coeffs) * self.degrees * amplitude ** deg
                            * kmax ** self.derivative_orders))


def nonlinearity(eps_order: int, m: float, kappa2: float, c: float) -> CompiledDiffPoly:
    """``F = F_0 + eps F_1 (+ ...)`` compiled at numeric ``m, kappa2, eps``."""
    from .akns import relativistic_nonlinearity

    eps = 0.0 if math.isinf(c) else 1.0 / c ** 2
    poly = relativistic_nonlinearity(0)
    for k in range(1, eps_order + 1):
        poly = poly + relativistic_nonlinearity(k) * MultiPoly.symbol("eps") ** k
    return CompiledDiffPoly(poly, {"m": m, "kappa2": kappa2, "eps": eps})


# split-step -----------------------------------------------------------------


def splitstep_evolve(state: WaveState, dt: float, steps: int, eps_order: int = 0,
                     linear_kind: str = "semirel-exact", linear_order: int | None = None,
                     observer: Callable[[WaveState, int], None] | None = None,
                     observe_every: int = 1) -> WaveState:
    """Strang splitting: half linear step, RK4 nonlinear step, half linear step."""
    if eps_order not in (0, 1):
        raise ValueError("eps_order must be 0 or 1")
    if not dt > 0 or steps < 0:
        raise ValueError("dt must be positive and steps non-negative")
    if state.kappa2 and state.hbar != 1.0:
        raise ValueError("the nonlinear equation is written in units with hbar = 1")
    grid = state.grid
    mask = grid.dealias_mask()
    kmax = float(np.max(np.abs(grid.k[mask])))
    F = nonlinearity(eps_order, state.m, state.kappa2, state.c) if state.kappa2 else None
    amp0 = float(np.max(np.abs(state.values)))
    if F is not None and dt * F.rate_bound(amp0, kmax) >= 1.0:
        raise StabilityGuard(f"dt * rate = {dt * F.rate_bound(amp0, kmax):.3g} >= 1")

    omega = dispersion_rate(grid.k, state.hbar, state.m, state.c, linear_kind, linear_order)
    half = np.exp(-0.5j * dt * omega)
    full = half * half
    orders = F.orders if F is not None else []

    def rhs(spec: np.ndarray) -> np.ndarray:
        derivs = spectral_derivatives(grid, spec * mask, orders)
        return -1j * np.fft.fft(F(derivs)) * mask

    spec = np.fft.fft(state.values)
    current = state
    if steps:
        spec = spec * half
    for step in range(1, steps + 1):
        if F is not None:
            k1 = rhs(spec)
            k2 = rhs(spec + 0.5 * dt * k1)
            k3 = rhs(spec + 0.5 * dt * k2)
            k4 = rhs(spec + dt * k3)
            spec = spec + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        last = step == steps
        want = observer is not None and (step % observe_every == 0 or last)
        if last or want:
            values = np.fft.ifft(spec * half)
            if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > 1e6 * amp0:
                raise BlowUp(f"amplitude exceeded 1e6 x initial at step {step}")
            current = state.evolved(values, state.time + step * dt)
            if want:
                observer(current, step)
        if not last:
            spec = spec * full
    return current


# diagnostics ----------------------------------------------------------------


def observables(state: WaveState) -> dict[str, float]:
    """Norm, momentum ``hbar Im sum conj(psi) psi_x dx`` and centroid."""
    grid, psi = state.grid, state.values
    dens = np.abs(psi) ** 2
    nrm = float(np.sum(dens) * grid.dx)
    psi_x = grid.derivative(psi, 1)
    momentum = float(state.hbar * np.imag(np.sum(np.conj(psi) * psi_x)) * grid.dx)
    centroid = float(np.sum(grid.x * dens) * grid.dx / nrm) if nrm else 0.0
    return {"norm": nrm, "momentum": momentum, "centroid": centroid}


def candidate_functionals(state: WaveState) -> dict[str, float]:
    """Higher functionals reported (not asserted) for the relativistic runs:
    the cubic-NLS energy and the next functional of the NLS family."""
    grid, psi = state.grid, state.values
    spec = np.fft.fft(psi)
    d = spectral_derivatives(grid, spec, [1, 2])
    dens = np.abs(psi) ** 2
    energy = np.sum(np.abs(d[1]) ** 2 - state.kappa2 * dens ** 2) * grid.dx / (2 * state.m)
    third = np.sum(np.abs(d[2]) ** 2 - 6 * state.kappa2 * dens * np.abs(d[1]) ** 2
                   - state.kappa2 * np.real(np.conj(psi) ** 2 * d[1] ** 2)
                   + 2 * state.kappa2 ** 2 * dens ** 3) * grid.dx
    return {"energy": float(np.real(energy)), "higher": float(np.real(third))}
