"""Kernel selection: the compiled extension when it imports, else pure Python.

Set ``KHOVANOV_ZC_PURE=1`` to force the fallback.
"""

import os

if os.environ.get("KHOVANOV_ZC_PURE"):
    from khovanov_zc import _pykernels as _impl
else:
    try:
        from khovanov_zc import _ckernels as _impl
    except ImportError:  # extension not built
        from khovanov_zc import _pykernels as _impl

IMPLEMENTATION = _impl.IMPLEMENTATION
clmul = _impl.clmul
pdivmod = _impl.pdivmod
pgcd = _impl.pgcd
sparse_matmul = _impl.sparse_matmul
invariant_factors = _impl.invariant_factors
eliminate = _impl.eliminate

__all__ = [
    "IMPLEMENTATION",
    "clmul",
    "pdivmod",
    "pgcd",
    "sparse_matmul",
    "invariant_factors",
    "eliminate",
]
