"""Kernel backend selection.

The compiled extension is used when it imports; ``DEGENVAC_BACKEND=python``
forces the numpy fallback. Both backends expose ``ssprk2_step``,
``interp_cells`` and ``advance_points`` with identical semantics.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels


def _load_compiled() -> ModuleType | None:
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


def get_backend(name: str) -> ModuleType:
    if name == "python":
        return _pykernels
    if name == "cython":
        mod = _load_compiled()
        if mod is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return mod
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    if _load_compiled() is not None:
        names.insert(0, "cython")
    return names


_requested = os.environ.get("DEGENVAC_BACKEND", "").strip().lower()
if _requested:
    _impl = get_backend(_requested)
else:
    _impl = _load_compiled() or _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

ssprk2_step = _impl.ssprk2_step
interp_cells = _impl.interp_cells
advance_points = _impl.advance_points
face_dissipation = _pykernels.face_dissipation
