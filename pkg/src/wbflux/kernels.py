"""Backend selection for the time loop.

The compiled extension ``wbflux._core`` is used when it imports; setting
``WBFLUX_PURE_PYTHON=1`` forces the numpy fallback.
"""

from __future__ import annotations

import os

from wbflux import _core_py

FLUX_BURGERS = _core_py.FLUX_BURGERS
FLUX_LINEAR = _core_py.FLUX_LINEAR
SCHEME_WELL_BALANCED = _core_py.SCHEME_WELL_BALANCED
SCHEME_STANDARD = _core_py.SCHEME_STANDARD

python_advance = _core_py.advance
compiled_advance = None

if os.environ.get("WBFLUX_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from wbflux._core import advance as compiled_advance
    except ImportError:  # pragma: no cover - depends on the build
        compiled_advance = None

advance = compiled_advance if compiled_advance is not None else python_advance
BACKEND = "cython" if compiled_advance is not None else "python"
