"""Pure-Python reference versions of the hot kernels.

Same signatures and results as the compiled ``_kernels`` extension. Term maps
are ``dict[tuple[int, ...], coefficient]`` with exponent tuples aligned to a
shared generator table.
"""

from operator import add

import numpy as np

BACKEND = "python"


def mul_terms(ta, tb):
    """Sparse product of two term maps; zero coefficients are dropped."""
    out = {}
    get = out.get
    for ea, ca in ta.items():
        for eb, cb in tb.items():
            e = tuple(map(add, ea, eb))
            prev = get(e)
            out[e] = ca * cb if prev is None else prev + ca * cb
    return {e: c for e, c in out.items() if c}


def add_terms(ta, tb, negate=False):
    """``ta + tb`` (or ``ta - tb``) on term maps; zeros dropped."""
    out = dict(ta)
    get = out.get
    for e, c in tb.items():
        if negate:
            c = -c
        prev = get(e)
        out[e] = c if prev is None else prev + c
    return {e: c for e, c in out.items() if c}


def embed_terms(terms, positions, width):
    """Re-index exponent tuples into a wider generator table.

    ``positions[j]`` is the slot in the new table of old generator ``j``.
    """
    out = {}
    for e, c in terms.items():
        new = [0] * width
        for j, p in enumerate(positions):
            new[p] = e[j]
        out[tuple(new)] = c
    return out


def eval_monomials(jets, exps, coeffs):
    """Evaluate ``sum_t coeffs[t] * prod_j jets[j] ** exps[t, j]`` pointwise.

    ``jets`` is a complex array of shape (njets, npoints), ``exps`` a
    non-negative integer array (nterms, njets), ``coeffs`` complex (nterms,).
    """
    jets = np.asarray(jets, dtype=np.complex128)
    exps = np.asarray(exps, dtype=np.int64)
    out = np.zeros(jets.shape[1], dtype=np.complex128)
    for t in range(exps.shape[0]):
        term = np.full(jets.shape[1], coeffs[t], dtype=np.complex128)
        for j in range(exps.shape[1]):
            e = exps[t, j]
            if e == 1:
                term *= jets[j]
            elif e > 1:
                term *= jets[j] ** e
        out += term
    return out
