"""Selects the compiled counting kernels when available.

Set REFLECTMT_PURE=1 to force the pure-Python fallback (used by the
benchmark and by the parity tests).
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("REFLECTMT_PURE"):
    _impl = _pykernels
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

indel_distance = _impl.indel_distance
char_ngram_stats = _impl.char_ngram_stats

BACKEND = "compiled" if _impl is not _pykernels else "pure"
