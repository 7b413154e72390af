"""Backend selection for the hot numerical kernels.

The compiled extension ``qretomo._kernels`` is used when it was built;
otherwise the numpy implementation in ``qretomo._kernels_py`` is loaded.
Setting ``QRETOMO_PURE_PYTHON=1`` in the environment forces the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("QRETOMO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

jacobi_eigh = _impl.jacobi_eigh
g_inverse_array = _impl.g_inverse_array

__all__ = ["BACKEND", "jacobi_eigh", "g_inverse_array"]
