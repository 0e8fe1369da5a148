"""Kernel backend selection.

The compiled Cython extension is used when it was built; otherwise the numpy
fallback is loaded.  ``use_backend`` switches at runtime (tests and the
benchmark compare the two).
"""
import logging

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

kernels = _ckernels if _ckernels is not None else _pykernels


def available_backends():
    return sorted(_BACKENDS)


def current_backend():
    return "compiled" if kernels is _ckernels and _ckernels is not None else "python"


def use_backend(name):
    """Select the kernel backend by name (``"compiled"`` or ``"python"``)."""
    global kernels
    try:
        kernels = _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"backend {name!r} unavailable; choose from {available_backends()}"
        ) from None
    log.debug("kernel backend set to %s", name)
