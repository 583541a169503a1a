"""Backend selection for the O(N^2) inner kernels.

The compiled Cython module is preferred; the NumPy fallback is used when
it is unavailable or when VPATCH_PURE_PYTHON is set. Both expose the same
functions and agree to rounding (covered by tests).
"""

from __future__ import annotations

import os

if os.environ.get("VPATCH_PURE_PYTHON"):
    from . import _core_py as _impl
else:
    try:
        from . import _core_c as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _core_py as _impl

COMPILED: bool = bool(getattr(_impl, "COMPILED", False))
BACKEND: str = "compiled" if COMPILED else "python"

log_smooth_factor = _impl.log_smooth_factor
flux_reduce = _impl.flux_reduce
pair_reduce = _impl.pair_reduce
energy_reduce = _impl.energy_reduce
