"""Walk kernel selection.

The compiled Cython kernel is used when its extension module is present;
otherwise the pure-Python fallback takes over with identical semantics
(and identical bits, given the same seed).  Set ``NESCAPE_NO_EXT=1`` to
force the fallback, e.g. for the kernel benchmark or debugging.
"""

from __future__ import annotations

import os

from . import pywalk
from .pywalk import ABSORBED, BOUNCE_PATHOLOGY, STEP_CAP

try:
    from . import _cywalk
except ImportError:
    _cywalk = None


def available_backends():
    out = ["python"]
    if _cywalk is not None:
        out.insert(0, "cython")
    return out


def get_kernel(backend: str = "auto"):
    """Return ``(run_walk, backend_name)`` for the requested backend."""
    if backend == "auto":
        if os.environ.get("NESCAPE_NO_EXT"):
            backend = "python"
        else:
            backend = "cython" if _cywalk is not None else "python"
    if backend == "cython":
        if _cywalk is None:
            raise RuntimeError(
                "compiled kernel not available; build the extension or use backend='python'"
            )
        return _cywalk.run_walk, "cython"
    if backend == "python":
        return pywalk.run_walk, "python"
    raise ValueError("unknown kernel backend %r" % (backend,))
