"""Kernel selection: the compiled extension when importable, else the numpy fallback.

Set ``SUPEROSC_PURE_PYTHON=1`` to force the fallback.
"""
import os

BACKEND = "python"
if os.environ.get("SUPEROSC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._ckernels import cexpsum, expsum_grid, neumaier_sum  # noqa: F401
        BACKEND = "cython"
    except ImportError:
        pass
if BACKEND == "python":
    from ._pykernels import cexpsum, expsum_grid, neumaier_sum  # noqa: F401
