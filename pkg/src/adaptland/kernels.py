"""Backend selection for the NK hot loops.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``ADAPTLAND_PURE=1`` to force the fallback (used by the backend
equivalence tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("ADAPTLAND_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

fitness_table = _impl.fitness_table
extrema_mask = _impl.extrema_mask
steepest_walk = _impl.steepest_walk

__all__ = ["BACKEND", "fitness_table", "extrema_mask", "steepest_walk"]
