"""Backend selection for the hot loops.

The Cython extension is used when it imports; otherwise the numpy fallback.
Set ``SCHRODECAY_PURE=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
sturm_count = _pykernels.sturm_count
prufer_batch = _pykernels.prufer_batch
shifted_solve = _pykernels.shifted_solve

if not os.environ.get("SCHRODECAY_PURE"):
    try:
        from . import _ckernels
    except ImportError:  # pragma: no cover - depends on the build
        _ckernels = None
    else:
        BACKEND = "cython"
        sturm_count = _ckernels.sturm_count
        prufer_batch = _ckernels.prufer_batch
        shifted_solve = _ckernels.shifted_solve

__all__ = ["BACKEND", "sturm_count", "prufer_batch", "shifted_solve"]
