"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy kernels are used. Set ``KRONSTAP_BACKEND=python`` to force the numpy
path. Callers look up ``_backend.kernels`` at call time so that
:func:`use_backend` takes effect everywhere.
"""
import contextlib
import os

from . import _kernels_py

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_AVAILABLE = {"python": _kernels_py}
if _ckernels is not None:
    _AVAILABLE["compiled"] = _ckernels


def available():
    return sorted(_AVAILABLE)


def _pick(name):
    if name is None:
        name = os.environ.get("KRONSTAP_BACKEND", "").strip().lower() or None
    if name is None:
        return "compiled" if "compiled" in _AVAILABLE else "python"
    if name not in _AVAILABLE:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available()}")
    return name


name = _pick(None)
kernels = _AVAILABLE[name]


def set_backend(backend):
    global name, kernels
    name = _pick(backend)
    kernels = _AVAILABLE[name]
    return name


@contextlib.contextmanager
def use_backend(backend):
    previous = name
    set_backend(backend)
    try:
        yield kernels
    finally:
        set_backend(previous)
