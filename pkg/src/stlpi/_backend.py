"""Pick the compiled kernels when built, else the numpy fallback.

Set ``STLPI_BACKEND=python`` to force the fallback.
"""

import os

from stlpi import _fallback

kernels = _fallback
if os.environ.get("STLPI_BACKEND", "").lower() not in ("python", "numpy", "fallback"):
    try:
        from stlpi import _kernels as kernels  # noqa: F811
    except ImportError:
        kernels = _fallback

BACKEND = kernels.NAME
