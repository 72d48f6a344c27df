"""Select the compiled kernels when built, the scipy versions otherwise.

Set ``FRACHEAT_PURE=1`` to force the pure-Python path.
"""
import os

from . import _pykernels

try:
    if os.environ.get("FRACHEAT_PURE") == "1":
        raise ImportError("pure-Python backend requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["compiled"] = _ckernels

NAME = "compiled" if _ckernels is not None else "python"
_active = BACKENDS[NAME]


def get(name=None):
    if name is None:
        return _active
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available; have {sorted(BACKENDS)}") from None


def available():
    return sorted(BACKENDS)
