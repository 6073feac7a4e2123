"""Backend selection for the stepping kernels.

Prefers the compiled extension and falls back to the pure-Python module
when it is not built. Set LIDSCORE_PURE_PYTHON=1 to force the fallback
(useful for benchmarking and debugging).
"""

import os

if os.environ.get("LIDSCORE_PURE_PYTHON"):
    from lidscore import _reservoir_py as _impl

    BACKEND = "python"
else:
    try:
        from lidscore import _reservoir as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from lidscore import _reservoir_py as _impl

        BACKEND = "python"

step_subarea = _impl.step_subarea
step_lid_unit = _impl.step_lid_unit

__all__ = ["BACKEND", "step_subarea", "step_lid_unit"]
