"""Best-effort process tuning for allocation-heavy training loops."""

from __future__ import annotations

import ctypes

_M_TRIM_THRESHOLD = -1
_M_MMAP_THRESHOLD = -3


def tune_allocator() -> bool:
    """Raise glibc's mmap/trim thresholds so large numpy temporaries are
    recycled through the heap instead of being mmap'd and unmapped on
    every iteration.  No-op (returns False) on non-glibc platforms."""
    try:
        libc = ctypes.CDLL("libc.so.6", use_errno=True)
        ok = libc.mallopt(_M_MMAP_THRESHOLD, 1 << 30)
        ok &= libc.mallopt(_M_TRIM_THRESHOLD, 1 << 30)
        return bool(ok)
    except OSError:
        return False
