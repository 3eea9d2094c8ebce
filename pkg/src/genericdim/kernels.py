"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy/pure
Python twins are used. Set ``GENERICDIM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from genericdim import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("GENERICDIM_PURE_PYTHON"):
    try:
        from genericdim import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

window_counts = _impl.window_counts
row_window_counts = _impl.row_window_counts
markov_walk = _impl.markov_walk
log_continuants = _impl.log_continuants
