"""Command-line entry point: ``relnls <command> ...``.

Exit codes: 0 when every verification in the run passed, 1 on a failed
verification (a JSON report is printed and written to ``--out``), 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, akns, burgers, epoly, spectral, verify
from .algebra import dispersion_make

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _c_value(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("c must be positive or 'inf'")
    return value


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default)


class Run:
    """Output sink shared by the handlers: header block, files, stdout."""

    def __init__(self, args: argparse.Namespace):
        self.params = {k: v for k, v in sorted(vars(args).items())
                       if k not in ("json_config", "handler", "out")}
        canonical = json.dumps(self.params, sort_keys=True, default=str)
        self.config_hash = hashlib.sha256(canonical.encode()).hexdigest()[:16]
        self.out = Path(args.out) if args.out else None
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)
        self.seed = args.seed

    def header(self) -> dict:
        return {"tool": "relnls", "version": __version__, "config_hash": self.config_hash,
                "params": {k: ("inf" if isinstance(v, float) and math.isinf(v) else v)
                           for k, v in self.params.items()}}

    def text(self, name: str, body: str):
        print(body)
        if self.out:
            (self.out / name).write_text(body + "\n")

    def json(self, name: str, data: dict, echo: bool = True):
        doc = _dumps({"header": self.header(), **data})
        if echo:
            print(doc)
        if self.out:
            (self.out / name).write_text(doc + "\n")

    def csv(self, name: str, columns: list[str], rows, plot: tuple[str, list[int]] | None = None):
        buf = io.StringIO()
        for line in _dumps(self.header()).splitlines():
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        if self.out:
            (self.out / name).write_text(buf.getvalue())
            if plot:
                self._gnuplot(name, columns, *plot)
        else:
            sys.stdout.write(buf.getvalue())

    def _gnuplot(self, name: str, columns: list[str], xcol: str, ycols: list[int]):
        stem = name.rsplit(".", 1)[0]
        plots = ", ".join(f"'{name}' using 1:{j + 1} with lines title '{columns[j]}'" for j in ycols)
        script = (f"# relnls {__version__} config {self.config_hash}\n"
                  "set datafile separator ','\nset datafile commentschars '#'\n"
                  "set key autotitle columnhead\n"
                  f"set terminal pngcairo size 900,600\nset output '{stem}.png'\n"
                  f"set xlabel '{xcol}'\nplot {plots}\n")
        (self.out / f"{stem}.gp").write_text(script)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _fail(run: Run, name: str, report: dict) -> int:
    run.json(name, {"status": "fail", **report})
    return EXIT_FAIL


# epoly -----------------------------------------------------------------------


def _dispersion(args):
    kind = getattr(args, "dispersion", "nr") or "nr"
    return dispersion_make(kind, args.eps_order if kind == "sr" else 0)


def cmd_epoly_gen(args, run: Run) -> int:
    _require(args, "n")
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    hp = epoly.epoly_generate(_dispersion(args), args.n)
    run.text(f"epoly_H{args.n}.txt", str(hp))
    return EXIT_OK


def cmd_epoly_vortex(args, run: Run) -> int:
    _require(args, "n")
    if not 0 < args.t0 < args.t1:
        raise UsageError("need 0 < --t0 < --t1")
    disp = _dispersion(args)
    times = np.linspace(args.t0, args.t1, args.samples)
    tracks = epoly.zero_trajectories(disp, args.n, times, args.hbar, args.m, args.eps)
    cfg = epoly.VortexConfig(tuple(tracks[0]), disp, args.hbar, args.m, args.eps)
    ode = epoly.integrate_vortices(cfg, args.t0, args.t1, times)
    cols = ["t"] + [f"{p}(x_{k})" for k in range(args.n) for p in ("re", "im")]
    rows = [[t] + [v for z in zs for v in (z.real, z.imag)] for t, zs in zip(times, tracks)]
    run.csv("vortex.csv", cols, rows, ("t", list(range(1, len(cols)))))
    dev = float(np.max(np.abs(ode - tracks)))
    passed = dev < args.tol
    summary = {"status": "pass" if passed else "fail", "max_deviation": dev, "tolerance": args.tol}
    run.json("vortex_summary.json", summary, echo=bool(run.out) or not passed)
    return EXIT_OK if passed else EXIT_FAIL


# akns ------------------------------------------------------------------------


def cmd_akns_flow(args, run: Run) -> int:
    _require(args, "n")
    flow = akns.hierarchy_flow(args.n, 0 if args.kappa0 else akns.KAPPA2)
    run.text(f"flow_N{args.n}.txt", f"upper: {flow.rhs.upper}\nlower: {flow.rhs.lower}")
    return EXIT_OK


def cmd_akns_lax(args, run: Run) -> int:
    if args.dispersion:
        coeffs = akns.lax_general(dispersion_make(args.dispersion, args.eps_order))
        name = f"lax_{args.dispersion}_eps{args.eps_order}.txt"
    else:
        _require(args, "n")
        coeffs = akns.lax_coefficients(args.n)
        name = f"lax_N{args.n}.txt"
    run.text(name, f"C: {coeffs.C.upper}\nCbar: {coeffs.C.lower}\nA: {coeffs.A}")
    return EXIT_OK


def cmd_akns_verify_zc(args, run: Run) -> int:
    if args.dispersion:
        rep = akns.verify_general_zero_curvature(dispersion_make(args.dispersion, args.eps_order))
        label = f"{args.dispersion} eps_order {args.eps_order}"
    else:
        _require(args, "n")
        rep = akns.verify_zero_curvature(args.n)
        label = f"N={args.n}"
    if not rep.is_zero():
        return _fail(run, "zero_curvature_report.json",
                     {"equation": "J1_t - J0_x + [J1, J0]", "flow": label, "failures": rep.failures()})
    run.json("zero_curvature_report.json",
             {"status": "pass", "flow": label, "residual": [["0", "0"], ["0", "0"]]})
    return EXIT_OK


# burgers ---------------------------------------------------------------------


def _grid(args) -> spectral.Grid1D:
    try:
        return spectral.Grid1D(args.L, args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_burgers_residual(args, run: Run) -> int:
    grid = _grid(args)
    if args.ic != "gaussian":
        raise UsageError("only --ic gaussian is supported")
    psi0 = spectral.WaveState(grid, spectral.gaussian_profile(grid, args.sigma, 0.0, args.k0),
                              hbar=args.hbar, m=args.m, c=args.c)
    kind = "nonrel" if math.isinf(args.c) else "semirel-exact"
    h = args.dt
    series = [burgers.cole_hopf(spectral.linear_propagate(psi0, args.t + j * h, kind),
                                threshold=args.threshold) for j in range(-2, 3)]
    res = burgers.nbs_residual(series)
    v = series[2]
    rows = [(x, z.real, z.imag, abs(r)) for x, z, r, ok in zip(v.x, v.values, res.values, res.mask) if ok]
    run.csv("burgers_residual.csv", ["x", "re_V", "im_V", "abs_residual"], rows, ("x", [1, 2, 3]))
    # the non-relativistic equation is only expected to hold for c = inf
    passed = res.max_abs < args.tol or not math.isinf(args.c)
    summary = {"status": "pass" if passed else "fail", "max_residual": res.max_abs,
               "tolerance": args.tol, "asserted": math.isinf(args.c)}
    run.json("burgers_summary.json", summary)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_burgers_backlund(args, run: Run) -> int:
    grid = _grid(args)
    x, h, t = grid.x, args.dt, args.t
    if args.seed_field == "gaussian":
        psi0 = spectral.WaveState(grid, spectral.gaussian_profile(grid, args.sigma, 0.0, args.k0),
                                  hbar=args.hbar, m=args.m)
        seeds = [burgers.cole_hopf(spectral.linear_propagate(psi0, t + j * h, "nonrel"),
                                   threshold=args.threshold) for j in range(-2, 3)]
    else:
        v0 = 0.0 if args.seed_field == "zero" else args.p / args.m
        zeros = np.zeros(x.size, dtype=complex)
        seeds = [burgers.VelocityField(x, (zeros + v0, zeros, zeros, zeros), t + j * h, args.hbar, args.m)
                 for j in range(-2, 3)]
    out = [burgers.backlund_nonrel(v, exclude=args.exclude) for v in seeds]
    res = burgers.nbs_residual(out)
    v = out[2]
    rows = [(xx, z.real, z.imag, abs(r)) for xx, z, r, ok in zip(v.x, v.values, res.values, res.mask) if ok]
    run.csv("backlund.csv", ["x", "re_V", "im_V", "abs_residual"], rows, ("x", [1, 2, 3]))
    passed = res.max_abs < args.tol
    run.json("backlund_summary.json", {"status": "pass" if passed else "fail", "seed": args.seed_field,
                                       "max_residual": res.max_abs, "tolerance": args.tol})
    return EXIT_OK if passed else EXIT_FAIL


def cmd_burgers_shock(args, run: Run) -> int:
    prof = burgers.tanh_profile(args.profile, args.c)
    t_star = burgers.shock_time(prof)
    t_cross = burgers.shock_time_crossing(prof)
    summary = {"profile": args.profile, "c": args.c, "shock_time": t_star, "shock_time_crossing": t_cross}
    if t_star is not None and args.samples:
        tt = args.fraction * t_star
        xs = np.linspace(args.xmin, args.xmax, args.samples)
        vs = [burgers.characteristics_solve(prof, float(xv), tt, t_star) for xv in xs]
        run.csv("shock_profile.csv", ["x", "V_c"], zip(xs, vs), ("x", [1]))
        summary["profile_time"] = tt
    run.json("shock_summary.json", summary)
    return EXIT_OK


# evolve ----------------------------------------------------------------------


def cmd_evolve(args, run: Run) -> int:
    grid = _grid(args)
    if args.dt <= 0 or args.steps < 0:
        raise UsageError("--dt must be positive and --steps non-negative")
    if args.ic == "soliton":
        psi = spectral.soliton_profile(grid, args.eta, args.kappa2, args.m)
    elif args.ic == "gaussian":
        psi = spectral.gaussian_profile(grid, args.sigma, 0.0, args.k0)
    else:
        psi = spectral.plane_profile(grid, args.mode)
    state = spectral.WaveState(grid, psi, hbar=1.0, m=args.m, c=args.c, kappa2=args.kappa2)
    rows, snaps = [], []

    def observe(st: spectral.WaveState, step: int):
        obs = spectral.observables(st)
        cand = spectral.candidate_functionals(st)
        rows.append((step, st.time, obs["norm"], obs["momentum"], obs["centroid"],
                     cand["energy"], cand["higher"]))
        if args.snapshots and step % (args.record_every * args.snapshot_every) == 0:
            snaps.append(st)

    observe(state, 0)
    kind = "nonrel" if math.isinf(args.c) else "semirel-exact"
    try:
        final = spectral.splitstep_evolve(state, args.dt, args.steps, args.eps_order, kind,
                                          observer=observe, observe_every=args.record_every)
    except spectral.StabilityGuard as exc:
        raise UsageError(str(exc)) from None
    except spectral.BlowUp as exc:
        return _fail(run, "evolve_report.json", {"error": "BlowUp", "message": str(exc)})
    run.csv("observables.csv", ["step", "t", "norm", "momentum", "centroid", "energy", "higher"], rows,
            ("t", [2, 3, 4, 5, 6]))
    drift = abs(spectral.norm(grid, final.values) / state.norm0 - 1)
    if run.out and args.snapshots:
        for st in snaps:
            stem = f"snapshot_{int(round(st.time / args.dt)):06d}"
            inter = np.empty(2 * grid.n, dtype="<f8")
            inter[0::2], inter[1::2] = st.values.real, st.values.imag
            (run.out / f"{stem}.bin").write_bytes(inter.tobytes())
            run.json(f"{stem}.json", {"grid": {"L": grid.length, "n": grid.n, "x0": -grid.length / 2},
                                      "time": st.time, "layout": "little-endian float64, re/im interleaved",
                                      "hbar": 1.0, "m": st.m, "c": st.c, "kappa2": st.kappa2}, echo=False)
    run.json("evolve_summary.json", {"final_time": final.time, "norm_drift": drift}, echo=bool(run.out))
    return EXIT_OK


# verify ----------------------------------------------------------------------

VERIFY_TARGETS = ["all", *verify.CHECKS]


def cmd_verify(args, run: Run) -> int:
    names = list(verify.CHECKS) if args.target == "all" else [args.target]
    results = verify.run_checks(names, quick=args.quick)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.seconds:.2f}s)")
    # timings are left out of the written report so reruns are byte-identical
    checks = [{**r.to_dict(), "seconds": None} for r in results]
    failed = [c for c in checks if not c["passed"]]
    run.json("verify_report.json", {"status": "fail" if failed else "pass", "quick": args.quick,
                                    "checks": checks}, echo=False)
    if failed:
        print(_dumps({"status": "fail", "failures": failed}))
        return EXIT_FAIL
    return EXIT_OK


# parser ----------------------------------------------------------------------


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _grid_opts(p, L=40.0, n=256):
    p.add_argument("--L", type=float, default=L, help="periodic box length")
    p.add_argument("--n", type=int, default=n, help="number of grid points (power of two)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relnls", description="Relativistic NLS / Burgers-Schrodinger toolkit")
    parser.add_argument("--version", action="version", version=f"relnls {__version__}")
    parser.add_argument("--out", metavar="DIR", help="write artifacts to DIR")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized samples")
    parser.add_argument("--json-config", metavar="FILE", help="JSON object of option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    ep = sub.add_parser("epoly", help="E-polynomials and vortex trajectories")
    eps = ep.add_subparsers(dest="action", required=True)
    g = eps.add_parser("gen", help="print H_n in canonical form")
    g.add_argument("--dispersion", choices=["nr", "sr"], default="nr")
    g.add_argument("--eps-order", type=int, default=1)
    g.add_argument("--n", type=int)
    g.set_defaults(handler=cmd_epoly_gen)
    v = eps.add_parser("vortex", help="zero trajectories of H_n and the vortex ODE")
    v.add_argument("--n", type=int)
    v.add_argument("--t0", type=float, default=0.1)
    v.add_argument("--t1", type=float, default=1.0)
    v.add_argument("--samples", type=int, default=50)
    v.add_argument("--dispersion", choices=["nr", "sr"], default="nr")
    v.add_argument("--eps-order", type=int, default=1)
    v.add_argument("--eps", type=float, default=0.0)
    v.add_argument("--hbar", type=float, default=1.0)
    v.add_argument("--m", type=float, default=1.0)
    v.add_argument("--tol", type=float, default=1e-6)
    v.set_defaults(handler=cmd_epoly_vortex)

    ak = sub.add_parser("akns", help="hierarchy flows, Lax coefficients, zero curvature")
    aks = ak.add_subparsers(dest="action", required=True)
    f = aks.add_parser("flow", help="print the N-th hierarchy flow")
    f.add_argument("--n", type=int)
    f.add_argument("--kappa0", action="store_true", help="linear limit kappa2 = 0")
    f.set_defaults(handler=cmd_akns_flow)
    for name, handler, text in (("lax", cmd_akns_lax, "print C and A"),
                                ("verify-zc", cmd_akns_verify_zc, "zero-curvature check")):
        q = aks.add_parser(name, help=text)
        q.add_argument("--n", type=int)
        q.add_argument("--dispersion", choices=["nr", "sr"])
        q.add_argument("--eps-order", type=int, default=1)
        q.set_defaults(handler=handler)

    bu = sub.add_parser("burgers", help="Burgers-Schrodinger residuals, Backlund, shocks")
    bus = bu.add_subparsers(dest="action", required=True)
    r = bus.add_parser("residual", help="Cole-Hopf of a propagated packet and its residual")
    r.add_argument("--ic", choices=["gaussian"], default="gaussian")
    r.add_argument("--c", type=_c_value, default=math.inf)
    b = bus.add_parser("backlund", help="Backlund transform of a seed velocity")
    b.add_argument("--seed", dest="seed_field", choices=["zero", "plane", "gaussian"], default="zero")
    b.add_argument("--p", type=float, default=0.7, help="plane-wave momentum")
    b.add_argument("--exclude", type=float, default=0.1, help="radius removed around singular loci")
    for q in (r, b):
        _grid_opts(q, 32.0, 128)
        q.add_argument("--t", type=float, default=0.5)
        q.add_argument("--dt", type=float, default=1e-4, help="time spacing of the slices")
        q.add_argument("--sigma", type=float, default=1.0)
        q.add_argument("--k0", type=float, default=1.0)
        q.add_argument("--hbar", type=float, default=1.0)
        q.add_argument("--m", type=float, default=1.0)
        q.add_argument("--threshold", type=float, default=1e-2, help="window: |psi| >= threshold max|psi|")
        q.add_argument("--tol", type=float, default=1e-6 if q is r else 1e-8)
    r.set_defaults(handler=cmd_burgers_residual)
    b.set_defaults(handler=cmd_burgers_backlund)
    s = bus.add_parser("shock", help="shock time and pre-shock profile")
    s.add_argument("--profile", choices=["minus", "plus", "one-minus"], default="minus",
                   help="-tanh, +tanh or 1 - tanh")
    s.add_argument("--c", type=_c_value, default=math.inf)
    s.add_argument("--fraction", type=float, default=0.9, help="profile time as a fraction of t*")
    s.add_argument("--xmin", type=float, default=-5.0)
    s.add_argument("--xmax", type=float, default=5.0)
    s.add_argument("--samples", type=int, default=101)
    s.set_defaults(handler=cmd_burgers_shock)

    e = sub.add_parser("evolve", help="split-step evolution of the relativistic NLS")
    e.add_argument("--ic", choices=["soliton", "gaussian", "plane"], default="soliton")
    e.add_argument("--c", type=_c_value, default=math.inf)
    e.add_argument("--eps-order", type=int, choices=[0, 1], default=0)
    _grid_opts(e, 40.0, 512)
    e.add_argument("--dt", type=float, default=1e-3)
    e.add_argument("--steps", type=int, default=1000)
    e.add_argument("--m", type=float, default=0.5)
    e.add_argument("--kappa2", type=float, default=1.0)
    e.add_argument("--eta", type=float, default=1.0)
    e.add_argument("--sigma", type=float, default=1.0)
    e.add_argument("--k0", type=float, default=0.0)
    e.add_argument("--mode", type=int, default=1)
    e.add_argument("--record-every", type=int, default=100)
    e.add_argument("--snapshots", action="store_true", help="write binary field snapshots")
    e.add_argument("--snapshot-every", type=int, default=1, help="in units of --record-every")
    e.set_defaults(handler=cmd_evolve)

    ve = sub.add_parser("verify", help="acceptance checks")
    ve.add_argument("target", choices=VERIFY_TARGETS)
    ve.add_argument("--quick", action="store_true", help="symbolic checks only, reduced sizes")
    ve.set_defaults(handler=cmd_verify)
    return parser


def _subparser(parser: argparse.ArgumentParser, args: argparse.Namespace) -> argparse.ArgumentParser:
    node = parser
    for key in ("command", "action"):
        name = getattr(args, key, None)
        if name is None:
            break
        action = next(a for a in node._actions if isinstance(a, argparse._SubParsersAction))
        node = action.choices[name]
    return node


def _apply_config(parser, argv, args):
    try:
        config = json.loads(Path(args.json_config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read --json-config: {exc}")
    if not isinstance(config, dict):
        parser.error("--json-config must hold a JSON object")
    leaf = _subparser(parser, args)
    known = {a.dest for a in leaf._actions} | {"seed"}
    config = {k.replace("-", "_"): v for k, v in config.items()}
    unknown = sorted(set(config) - known - {"help"})
    if unknown:
        parser.error(f"unknown keys in --json-config: {', '.join(unknown)}")
    if "seed" in config:
        parser.set_defaults(seed=config.pop("seed"))
    for a in leaf._actions:
        if a.dest in config and a.type is not None and isinstance(config[a.dest], str):
            config[a.dest] = a.type(config[a.dest])
    leaf.set_defaults(**config)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.json_config:
        args = _apply_config(parser, argv, args)
    try:
        return args.handler(args, Run(args))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"relnls: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
