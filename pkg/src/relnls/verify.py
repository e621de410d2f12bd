"""Checks behind ``relnls verify``, one per acceptance criterion.

Each check returns a :class:`CheckResult` whose ``details`` are plain JSON
data; a failed check names the offending equation, power of ``p`` or term.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import akns, burgers, epoly, spectral
from .algebra import I, MultiPoly, dispersion_make, jet, sym


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _timed(name: str, fn: Callable[[], tuple[bool, dict]]) -> CheckResult:
    start = time.perf_counter()
    passed, details = fn()
    return CheckResult(name, bool(passed), details, round(time.perf_counter() - start, 3))


def printed_epolynomials() -> dict[str, MultiPoly]:
    x, t, hbar, m, eps = (sym(s) for s in ("x", "t", "hbar", "m", "eps"))
    return {
        "H2": x ** 2 + I * hbar * m ** -1 * t,
        "H3": x ** 3 + I * 3 * hbar * m ** -1 * x * t,
        "H4_SRS": x ** 4 + I * 6 * hbar * m ** -1 * x ** 2 * t - 3 * hbar ** 2 * m ** -2 * t ** 2
        + I * 3 * hbar ** 3 * m ** -3 * eps * t,
    }


def check_epoly(max_n: int = 8) -> CheckResult:
    def run():
        failures = []
        for kind, order in (("nr", 0), ("sr", 2)):
            disp = dispersion_make(kind, order)
            polys = [epoly.epoly_generate(disp, n) for n in range(max_n + 2)]
            for n in range(max_n + 1):
                if not epoly.schrodinger_residual(polys[n]).is_zero():
                    failures.append({"dispersion": kind, "n": n, "check": "schrodinger_residual"})
                if epoly.boost_apply(disp, polys[n]).poly != polys[n + 1].poly:
                    failures.append({"dispersion": kind, "n": n, "check": "boost"})
        printed = printed_epolynomials()
        sr = dispersion_make("sr", 2)
        for label, n, disp in (("H2", 2, sr), ("H3", 3, sr), ("H4_SRS", 4, dispersion_make("sr", 1))):
            got = epoly.epoly_generate(disp, n).poly
            if got != printed[label]:
                failures.append({"check": label, "got": str(got), "printed": str(printed[label])})
        return not failures, {"max_n": max_n, "failures": failures}

    return _timed("epoly", run)


def check_flows(max_n: int = 6) -> CheckResult:
    def run():
        failures = []
        psi, pb = jet("psi"), jet("psibar")
        cubic = -jet("psi", 2) - 2 * sym("kappa2") * psi * psi * pb
        got = akns.hierarchy_flow(2).rhs.upper
        if got != cubic:
            failures.append({"check": "cubic NLS", "got": str(got), "expected": str(cubic)})
        for n in range(1, max_n + 1):
            lin = akns.hierarchy_flow(n, 0).rhs
            if lin != akns.linear_limit_flow(n):
                failures.append({"check": "linear limit", "N": n, "got": str(lin.upper)})
        return not failures, {"max_n": max_n, "failures": failures}

    return _timed("flows", run)


def check_zero_curvature(ns=(1, 2, 3), general_orders=(1,)) -> CheckResult:
    def run():
        failures = []
        for n in ns:
            rep = akns.verify_zero_curvature(n)
            failures += [dict(f, N=n) for f in rep.failures()]
        for k in general_orders:
            rep = akns.verify_general_zero_curvature(dispersion_make("sr", k))
            failures += [dict(f, dispersion=f"sr eps_order {k}") for f in rep.failures()]
        return not failures, {"N": list(ns), "sr_eps_orders": list(general_orders), "failures": failures}

    return _timed("zero-curvature", run)


def check_nonlinearity() -> CheckResult:
    def run():
        failures = []
        for k in (0, 1):
            got, printed = akns.relativistic_nonlinearity(k), akns.reference_nonlinearity(k)
            if got != printed:
                failures.append({"eps_order": k, "difference": str(got - printed)})
        return not failures, {"failures": failures}

    return _timed("nonlinearity", run)


def check_ncbs() -> CheckResult:
    def run():
        first = burgers.ncbs_diff()
        second = burgers.ncbs_diff()
        diff = [asdict(d) for d in first]
        stable = diff == [asdict(d) for d in second]
        # the check passes when the diff was emitted reproducibly; an empty
        # diff additionally means the printed correction is confirmed
        return stable, {"diff": diff, "agrees_with_printed": not diff, "stable": stable}

    return _timed("ncbs", run)


def backlund_residuals(h: float = 1e-4, t: float = 0.5) -> dict[str, float]:
    """Max Burgers-Schrodinger residual of ``V2`` for the three seeds."""
    grid = spectral.Grid1D(32.0, 128)
    x = grid.x
    out = {}
    for label, p in (("zero", 0.0), ("plane", 0.7)):
        zeros = np.zeros(x.size, dtype=complex)
        series = [burgers.VelocityField(x, (zeros + p, zeros, zeros, zeros), t + j * h)
                  for j in range(-2, 3)]
        out[label] = burgers.nbs_residual([burgers.backlund_nonrel(v) for v in series]).max_abs
    psi0 = spectral.WaveState(grid, spectral.gaussian_profile(grid, 1.0, 0.0, 1.0))
    series = [burgers.cole_hopf(spectral.linear_propagate(psi0, t + j * h, "nonrel"), threshold=1e-2)
              for j in range(-2, 3)]
    out["gaussian"] = burgers.nbs_residual([burgers.backlund_nonrel(v) for v in series]).max_abs
    return out


def check_backlund(tol: float = 1e-8) -> CheckResult:
    def run():
        res = backlund_residuals()
        limits = {}
        for kind, order in (("nr", 0), ("sr", 1)):
            bt = burgers.backlund_semirel(dispersion_make(kind, order))
            limits[kind] = bt.subs({"hbar": 0}).is_identity()
        ok = all(v < tol for v in res.values()) and all(limits.values())
        return ok, {"max_residual": res, "tolerance": tol, "hbar0_identity": limits}

    return _timed("backlund", run)


def check_shock() -> CheckResult:
    def run():
        nr = burgers.tanh_profile("minus")
        t_star = burgers.shock_time(nr)
        t_cross = burgers.shock_time_crossing(nr)
        rel = burgers.tanh_profile("one-minus", 1.0)
        nonrel_same = burgers.tanh_profile("one-minus")
        t_rel = burgers.shock_time_crossing(rel)
        t_nonrel = burgers.shock_time_crossing(nonrel_same)
        worst = 0.0
        for x0 in np.linspace(-3, 3, 13):
            tt = 0.9 * burgers.shock_time(rel)
            xx = x0 + rel.speed(rel.f(x0)) * tt
            v = burgers.characteristics_solve(rel, xx, tt)
            worst = max(worst, abs(v - rel.f(xx - rel.speed(v) * tt)))
        ok = (abs(t_star - 1) < 1e-6 and abs(t_cross - 1) < 1e-6 and t_rel > t_nonrel
              and worst < 1e-12)
        return ok, {"t_star_minus_tanh": t_star, "t_star_crossing": t_cross,
                    "t_star_rel_c1": t_rel, "t_star_nonrel": t_nonrel, "implicit_residual": worst}

    return _timed("shock", run)


def check_solver(quick: bool = False) -> CheckResult:
    def run():
        n = 256 if quick else 512
        grid = spectral.Grid1D(40.0, n)
        m, kappa2, dt, steps = 0.5, 1.0, 1e-3, 1000
        psi0 = spectral.soliton_profile(grid, 1.0, kappa2, m)
        base = spectral.WaveState(grid, psi0, m=m, kappa2=kappa2)
        nls = spectral.splitstep_evolve(base, dt, steps, 0, linear_kind="nonrel")
        exact = spectral.soliton_profile(grid, 1.0, kappa2, m, t=dt * steps)
        profile_err = float(np.max(np.abs(nls.values - exact)))
        drift = {"eps0": abs(spectral.norm(grid, nls.values) / base.norm0 - 1)}
        cs = (10.0, 20.0, 40.0, 80.0)
        diffs = []
        for c in cs:
            st = spectral.WaveState(grid, psi0, m=m, kappa2=kappa2, c=c)
            out = spectral.splitstep_evolve(st, dt, steps, 1)
            if c == cs[0]:
                drift["eps1"] = abs(spectral.norm(grid, out.values) / st.norm0 - 1)
            diffs.append(math.sqrt(spectral.norm(grid, out.values - nls.values)))
        slope = float(np.polyfit(np.log(1 / np.array(cs)), np.log(diffs), 1)[0])
        ok = (max(drift.values()) < 1e-10 and profile_err < 1e-6 and abs(slope - 2) <= 0.2)
        return ok, {"n": n, "norm_drift": drift, "soliton_error": profile_err,
                    "c": list(cs), "differences": diffs, "slope": slope}

    return _timed("solver", run)


def check_vortex(tol: float = 1e-6) -> CheckResult:
    def run():
        nr = dispersion_make("nr")
        devs = {f"H{n}": epoly.vortex_crosscheck(nr, n, 0.1, 1.0) for n in (2, 3)}
        return max(devs.values()) < tol, {"max_deviation": devs, "tolerance": tol}

    return _timed("vortex", run)


CHECKS = {
    "epoly": check_epoly,
    "flows": check_flows,
    "zero-curvature": check_zero_curvature,
    "nonlinearity": check_nonlinearity,
    "ncbs": check_ncbs,
    "backlund": check_backlund,
    "shock": check_shock,
    "solver": check_solver,
    "vortex": check_vortex,
}

SYMBOLIC = ("epoly", "flows", "zero-curvature", "nonlinearity", "ncbs")


def run_checks(names, quick: bool = False) -> list[CheckResult]:
    """``quick`` restricts to the symbolic suite at reduced sizes."""
    results = []
    for name in names:
        if quick:
            if name not in SYMBOLIC:
                continue
            if name == "epoly":
                results.append(check_epoly(6))
            elif name == "flows":
                results.append(check_flows(4))
            elif name == "zero-curvature":
                results.append(check_zero_curvature((1, 2), ()))
            else:
                results.append(CHECKS[name]())
        elif name == "solver":
            results.append(check_solver())
        else:
            results.append(CHECKS[name]())
    return results
