"""Kernel backend selection.

Imports the compiled extension when available, otherwise the numpy fallback.
Set IONISING_PURE_PYTHON=1 to force the fallback (useful for benchmarking and
for checking backend equivalence).
"""

from __future__ import annotations

import os

if os.environ.get("IONISING_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _pykernels as _impl
else:
    try:
        from . import _corekernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _pykernels as _impl  # type: ignore[no-redef]

response_tensor = _impl.response_tensor
coupling_from_rabi = _impl.coupling_from_rabi
pair_residual_jac = _impl.pair_residual_jac


def backend_name() -> str:
    """Which kernel implementation is active: "compiled" or "python"."""
    return _impl.BACKEND
