"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; setting
``STEERKIT_NO_EXT=1`` forces the pure-numpy fallback. Both backends share
identical contracts, so the choice only affects speed.
"""

from __future__ import annotations

import os

from . import _kernels as _fallback

if os.environ.get("STEERKIT_NO_EXT"):
    _impl = _fallback
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _fallback

gray_min_energy = _impl.gray_min_energy
gray_weight_counts = _impl.gray_weight_counts


def backend_name() -> str:
    """'compiled' when the Cython kernels are active, else 'fallback'."""
    return "compiled" if _impl is not _fallback else "fallback"
