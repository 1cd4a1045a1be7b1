"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback.
Both expose ``cmi_bits``, ``channel_cmi``, ``channel_cmi_batch`` and
``channel_cmi_grad``.
"""
from __future__ import annotations

from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS: dict[str, ModuleType] = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

kernels: ModuleType = _ckernels if _ckernels is not None else _pykernels
BACKEND: str = "cython" if _ckernels is not None else "python"


def get_kernels(name: str) -> ModuleType:
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
