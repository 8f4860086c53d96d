"""Backend selection for the hot kernels.

The compiled extension ``fsfcpt._kernels`` is used when it imports; otherwise
the numpy implementation in :mod:`fsfcpt._pykernels` is used. Setting the
environment variable ``FSFCPT_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

OK = _pykernels.OK
MAX_STEPS = _pykernels.MAX_STEPS
STEP_UNDERFLOW = _pykernels.STEP_UNDERFLOW


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = None if os.environ.get("FSFCPT_PURE_PYTHON") == "1" else _load_compiled()
_active = _compiled if _compiled is not None else _pykernels

BACKEND = "compiled" if _compiled is not None else "python"


def get_backend(name=None):
    """Return the kernel module for ``"compiled"``, ``"python"`` or the active one."""
    if name is None:
        return _active
    if name == "python":
        return _pykernels
    if name == "compiled":
        mod = _compiled or _load_compiled()
        if mod is None:
            raise ImportError("compiled kernels are not built")
        return mod
    raise ValueError(f"unknown backend {name!r}")


def comb_envelope(times, coeffs, n_first, spacing):
    return _active.comb_envelope(times, coeffs, n_first, spacing)


def rwa_integrate(*args, **kwargs):
    return _active.rwa_integrate(*args, **kwargs)
