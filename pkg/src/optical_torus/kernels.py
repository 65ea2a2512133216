"""Kernel backend selection.

The compiled extension is used when it imports cleanly; otherwise, or when
the environment variable ``OPTICAL_TORUS_PURE`` is set to a non-empty value
other than ``0``, the pure-Python versions are used. ``BACKEND`` names the
active one.
"""

import os

from . import _kernels_py

_force_pure = os.environ.get("OPTICAL_TORUS_PURE", "") not in ("", "0")

if _force_pure:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

sncndn = _impl.sncndn
sncndn_complex = _impl.sncndn_complex
log_index_grad = _impl.log_index_grad
sc_factors = _impl.sc_factors

__all__ = ["BACKEND", "sncndn", "sncndn_complex", "log_index_grad", "sc_factors"]
