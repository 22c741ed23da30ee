"""Backend selection for the numerical hot loops.

The compiled extension is preferred; the numpy fallback is used when it
is not built or when ``DWPAP_PURE=1`` is set before import.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("DWPAP_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

trig_eval = _impl.trig_eval
horner = _impl.horner
romberg_refine = _impl.romberg_refine


def backends():
    """Return every importable backend module keyed by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
