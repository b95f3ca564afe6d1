"""Contraction-kernel backend selection.

The compiled Cython module is used when importable; otherwise (or when
CSHLAB_PURE_PYTHON=1 is set) the numpy fallback takes over.  Both expose the
same two entry points, `bracket` and `higgs_terms`, operating on fields
flattened to shape (components, points).
"""

import os

from . import numpy_backend

if os.environ.get("CSHLAB_PURE_PYTHON"):
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import _fast as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = numpy_backend
        BACKEND = "numpy"

bracket = _impl.bracket
higgs_terms = _impl.higgs_terms

__all__ = ["bracket", "higgs_terms", "BACKEND", "numpy_backend"]
