"""Kernel selection: compiled extension when importable, else pure Python.

Set ``RELNLS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("RELNLS_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND
mul_terms = kernels.mul_terms
add_terms = kernels.add_terms
embed_terms = kernels.embed_terms
eval_monomials = kernels.eval_monomials
