# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""

from cpython.tuple cimport PyTuple_New, PyTuple_SET_ITEM, PyTuple_GET_ITEM, PyTuple_GET_SIZE
from cpython.ref cimport Py_INCREF
from cpython.long cimport PyLong_AsLong, PyLong_FromLong

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef inline tuple _tuple_add(tuple a, tuple b):
    cdef Py_ssize_t n = PyTuple_GET_SIZE(a)
    cdef Py_ssize_t i
    cdef long s
    cdef tuple out = PyTuple_New(n)
    cdef object item
    for i in range(n):
        s = PyLong_AsLong(<object>PyTuple_GET_ITEM(a, i)) + PyLong_AsLong(<object>PyTuple_GET_ITEM(b, i))
        item = PyLong_FromLong(s)
        Py_INCREF(item)
        PyTuple_SET_ITEM(out, i, item)
    return out


def mul_terms(dict ta, dict tb):
    cdef dict out = {}
    cdef tuple ea, eb, e
    cdef object ca, cb, prev
    cdef list items_b = list(tb.items())
    for ea, ca in ta.items():
        for eb, cb in items_b:
            e = _tuple_add(ea, eb)
            prev = out.get(e)
            if prev is None:
                out[e] = ca * cb
            else:
                out[e] = prev + ca * cb
    return {k: v for k, v in out.items() if v}


def add_terms(dict ta, dict tb, bint negate=False):
    cdef dict out = dict(ta)
    cdef tuple e
    cdef object c, prev
    for e, c in tb.items():
        if negate:
            c = -c
        prev = out.get(e)
        if prev is None:
            out[e] = c
        else:
            out[e] = prev + c
    return {k: v for k, v in out.items() if v}


def embed_terms(dict terms, positions, Py_ssize_t width):
    cdef dict out = {}
    cdef tuple e
    cdef list new
    cdef object c
    cdef Py_ssize_t j, m = len(positions)
    cdef Py_ssize_t[::1] pos = np.asarray(positions, dtype=np.intp)
    for e, c in terms.items():
        new = [0] * width
        for j in range(m):
            new[pos[j]] = e[j]
        out[tuple(new)] = c
    return out


def eval_monomials(jets, exps, coeffs):
    J = np.ascontiguousarray(jets, dtype=np.complex128)
    cdef double[:, ::1] Jr = np.ascontiguousarray(J.real.T)
    cdef double[:, ::1] Ji = np.ascontiguousarray(J.imag.T)
    E = np.asarray(exps, dtype=np.int_)
    Cz = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef double[::1] Cr = np.ascontiguousarray(Cz.real), Ci = np.ascontiguousarray(Cz.imag)
    # flatten each monomial into a run of jet indices, one entry per power
    starts = [0]
    flat = []
    for row in E:
        for j, e in enumerate(row):
            flat.extend([j] * int(e))
        starts.append(len(flat))
    cdef long[::1] F = np.asarray(flat + [0], dtype=np.int_)
    cdef long[::1] S = np.asarray(starts, dtype=np.int_)
    cdef Py_ssize_t npts = J.shape[1], nterms = E.shape[0]
    cdef Py_ssize_t p, t, f, j
    # real/imag arithmetic by hand avoids the NaN-aware __muldc3 multiply
    cdef double ar, ai, tr, ti, tmp
    out = np.empty(npts, dtype=np.complex128)
    cdef double[::1] O = out.view(np.float64)
    with nogil:
        for p in range(npts):
            ar = 0.0
            ai = 0.0
            for t in range(nterms):
                tr = Cr[t]
                ti = Ci[t]
                for f in range(S[t], S[t + 1]):
                    j = F[f]
                    tmp = tr * Jr[p, j] - ti * Ji[p, j]
                    ti = tr * Ji[p, j] + ti * Jr[p, j]
                    tr = tmp
                ar += tr
                ai += ti
            O[2 * p] = ar
            O[2 * p + 1] = ai
    return out
