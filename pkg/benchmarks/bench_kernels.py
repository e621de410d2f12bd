"""Time the compiled kernels against the pure-Python fallback.

Run with ``python benchmarks/bench_kernels.py``. Each case is also timed
end to end through the public API (a symbolic product and a split-step run).
"""

import argparse
import os
import subprocess
import sys
import timeit
from fractions import Fraction

import numpy as np

from relnls import _kernels_py

try:
    from relnls import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

from relnls.algebra.gaussian import GaussianRational


def _term_maps(rng, nterms, width):
    def one():
        return {tuple(int(v) for v in rng.integers(0, 4, width)):
                GaussianRational(Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 6))),
                                 int(rng.integers(-3, 4)))
                for _ in range(nterms)}
    return one(), one()


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_table(repeat):
    rng = np.random.default_rng(0)
    ta, tb = _term_maps(rng, 80, 8)
    exps = rng.integers(0, 3, size=(12, 6))
    coeffs = rng.normal(size=12) + 0j
    cases = [("mul_terms 80x80", lambda k: k.mul_terms(ta, tb)),
             ("add_terms 80+80", lambda k: k.add_terms(ta, tb))]
    for n in (512, 4096):
        jets = rng.normal(size=(6, n)) + 1j * rng.normal(size=(6, n))
        cases.append((f"eval_monomials 12x{n}",
                      lambda k, jets=jets: k.eval_monomials(jets, exps, coeffs)))
    rows = []
    for name, call in cases:
        py = _best(lambda: call(_kernels_py), repeat)
        c = _best(lambda: call(_kernels_c), repeat) if _kernels_c else float("nan")
        rows.append((name, py, c))
    return rows


_END_TO_END = """
import time
from relnls import spectral, akns
t0 = time.perf_counter()
for n in range(1, 6):
    akns.lax_coefficients(n)
t1 = time.perf_counter()
g = spectral.Grid1D(40.0, 512)
s = spectral.WaveState(g, spectral.soliton_profile(g, 1.0, 1.0, 0.5), m=0.5, kappa2=1.0, c=20.0)
spectral.splitstep_evolve(s, 1e-3, 200, 1)
t2 = time.perf_counter()
print(t1 - t0, t2 - t1)
"""


def end_to_end(pure):
    env = dict(os.environ, RELNLS_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", _END_TO_END], env=env, check=True,
                         capture_output=True, text=True).stdout.split()
    return float(out[0]), float(out[1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'case':28s}{'python [s]':>14s}{'cython [s]':>14s}{'speedup':>10s}")
    for name, py, c in kernel_table(args.repeat):
        print(f"{name:28s}{py:14.6f}{c:14.6f}{py / c:10.1f}")
    py = end_to_end(True)
    c = end_to_end(False) if _kernels_c else (float("nan"),) * 2
    for label, a, b in zip(("Lax coefficients N<=5", "split-step 200 steps"), py, c):
        print(f"{label:28s}{a:14.6f}{b:14.6f}{a / b:10.1f}")


if __name__ == "__main__":
    main()
