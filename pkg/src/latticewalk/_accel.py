"""Backend selection for the numeric kernels.

The kernels in :mod:`latticewalk.kernels` exist twice: a loop form compiled
with numba, and a vectorized pure-numpy form. Which one runs is decided by
the ``LATTICEWALK_NUMBA`` environment variable (``0``/``false``/``off``
disables numba) and can be switched at runtime with :func:`set_backend` or
the :func:`backend` context manager.
"""
from __future__ import annotations

import os
from contextlib import contextmanager

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_FALSE = {"0", "false", "no", "off"}

_backend = "numba" if HAVE_NUMBA and os.environ.get("LATTICEWALK_NUMBA", "1").strip().lower() not in _FALSE else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


@contextmanager
def backend(name: str):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
