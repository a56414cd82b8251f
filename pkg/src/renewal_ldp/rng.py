"""Counter-based uniforms from a keyed splitmix64-style finalizer.

Every (seed, path, draw, stream) quadruple maps to one double in the open
interval (0, 1) with no sampler state, so results do not depend on batch
boundaries, thread count, or evaluation order.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MULT_A = 0xBF58476D1CE4E5B9
_MULT_B = 0x94D049BB133111EB
_MULT_C = 0xD6E8FEB86659FD93
_INV53 = 2.0**-53


def _mix_int(x: int) -> int:
    x &= _MASK
    x ^= x >> 30
    x = (x * _MULT_A) & _MASK
    x ^= x >> 27
    x = (x * _MULT_B) & _MASK
    x ^= x >> 31
    return x


def _mix_arr(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MULT_A)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MULT_B)
    x ^= x >> np.uint64(31)
    return x


def uniform01(seed: int, path, draw, stream: int = 0) -> np.ndarray:
    """Uniform doubles in (0, 1), broadcast over path and draw indices."""
    base = _mix_int(int(seed) ^ _GAMMA)
    shape = np.broadcast_shapes(np.shape(path), np.shape(draw))
    # 0-d unsigned arrays warn on wraparound, 1-d arrays wrap silently
    p = np.atleast_1d(np.asarray(path, dtype=np.uint64))
    d = np.atleast_1d(np.asarray(draw, dtype=np.uint64))
    pk = _mix_arr(np.uint64(base) + (p + np.uint64(1)) * np.uint64(_MULT_A))
    key = pk + (d + np.uint64(1)) * np.uint64(_MULT_B) + np.uint64((int(stream) * _MULT_C) & _MASK)
    h = _mix_arr(key)
    return (((h >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53).reshape(shape)
