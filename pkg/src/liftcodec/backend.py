"""Kernel backend selection: compiled extension if importable, numpy fallback.

The default is picked once at import. LIFTCODEC_BACKEND=python|cython forces
a choice; ``set_backend`` swaps at runtime (used by the benchmark and the
cross-backend equality tests). Both backends are bit-compatible, so streams
encoded with one decode with the other.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None

_BACKENDS = {"python": _kernels_py}
if _kernels_cy is not None:
    _BACKENDS["cython"] = _kernels_cy


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def _initial():
    forced = os.environ.get("LIFTCODEC_BACKEND", "").strip().lower()
    if forced:
        if forced not in _BACKENDS:
            raise RuntimeError(
                f"LIFTCODEC_BACKEND={forced!r} unavailable; "
                f"have {available_backends()}"
            )
        return _BACKENDS[forced]
    return _BACKENDS.get("cython", _kernels_py)


_active = _initial()


def get_backend():
    return _active


def backend_name() -> str:
    return _active.BACKEND


def set_backend(name: str):
    """Switch the active kernel backend; returns the previous name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}")
    previous = _active.BACKEND
    _active = _BACKENDS[name]
    return previous
