"""Kernel backend selection.

RAINBENCH_KERNELS picks the implementation of the hot loops:
  auto   (default) numba if importable, numpy otherwise
  numba  require the jitted kernels, fail if numba is missing
  numpy  force the pure-numpy fallback
The choice is read once at import; benchmarks and tests that want a specific
backend regardless of the environment can call get_backend() directly.
"""

from __future__ import annotations

import os


def get_backend(name: str):
    if name == "numba":
        from . import kernels_nb

        return kernels_nb
    if name == "numpy":
        from . import kernels_np

        return kernels_np
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    choice = os.environ.get("RAINBENCH_KERNELS", "auto").lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"RAINBENCH_KERNELS must be auto, numba, or numpy; got {choice!r}"
        )
    if choice in ("auto", "numba"):
        try:
            return get_backend("numba")
        except ImportError:
            if choice == "numba":
                raise
    return get_backend("numpy")


_ACTIVE = _select()


def active():
    return _ACTIVE


def kernel_backend() -> str:
    return _ACTIVE.BACKEND_NAME
