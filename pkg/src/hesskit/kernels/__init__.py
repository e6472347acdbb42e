"""Kernel implementation selection.

The compiled core (``_fast``, Cython + LAPACK) is preferred when it was
built; otherwise the numpy fallback is used.  Set ``HESSKIT_PURE_PYTHON=1``
to force the fallback, e.g. for benchmarking or debugging.
"""

import os

from . import fallback

if os.environ.get("HESSKIT_PURE_PYTHON"):
    _impl = fallback
    IMPLEMENTATION = "python"
else:
    try:
        from . import _fast as _impl
        IMPLEMENTATION = "cython"
    except ImportError:
        _impl = fallback
        IMPLEMENTATION = "python"

elem_sym_batch = _impl.elem_sym_batch
sigma_batch = _impl.sigma_batch
sigma_all_batch = _impl.sigma_all_batch
sigma_grad_batch = _impl.sigma_grad_batch
sigma_grad_contract_batch = _impl.sigma_grad_contract_batch

__all__ = [
    "IMPLEMENTATION",
    "elem_sym_batch",
    "sigma_batch",
    "sigma_all_batch",
    "sigma_grad_batch",
    "sigma_grad_contract_batch",
    "fallback",
]
