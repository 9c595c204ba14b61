"""Backend selection for the hot loops.

The compiled extension ``_ckernels`` is preferred. Setting the environment
variable ``CONSENSUS_KIT_PURE=1`` forces the numpy fallback, as does a
missing build.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("CONSENSUS_KIT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python") or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def tau(a):
    return _impl.tau(np.ascontiguousarray(a, dtype=np.float64))


def scan_windows(masks, start=0, confirm=1, backward=True):
    masks = np.ascontiguousarray(masks, dtype=np.uint8)
    return _impl.scan_windows(masks, int(start), int(confirm), bool(backward))


def product_stack(stack, backward=True):
    return _impl.product_stack(np.ascontiguousarray(stack, dtype=np.float64), bool(backward))


def propagate(stack, x0):
    return _impl.propagate(
        np.ascontiguousarray(stack, dtype=np.float64),
        np.ascontiguousarray(x0, dtype=np.float64),
    )
