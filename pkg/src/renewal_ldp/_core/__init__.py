"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the numpy
fallback is bit-compatible in structure and agrees to roundoff. Set
RENEWAL_LDP_PURE=1 to force the fallback (useful for benchmarking and
debugging). `BACKEND` names the implementation that won.
"""

from __future__ import annotations

import os

from . import _pure

_FORCE_PURE = os.environ.get("RENEWAL_LDP_PURE", "") not in ("", "0")

if _FORCE_PURE:
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

renewal_logrec = _impl.renewal_logrec
free_log_conv = _impl.free_log_conv
shift_logaddexp_1d = _impl.shift_logaddexp_1d
shift_logaddexp_2d = _impl.shift_logaddexp_2d
logsumexp_arr = _impl.logsumexp_arr


def implementations() -> dict:
    """Every importable backend, keyed by name. Used by benchmarks and tests."""
    out = {"pure": _pure}
    try:
        from . import _native

        out["native"] = _native
    except ImportError:
        pass
    return out
