"""Process-wide runtime knobs."""

from __future__ import annotations

import os


def thread_cap() -> int:
    """Parallelism cap from TROTTERFORGE_THREADS; defaults to a small pool."""
    raw = os.environ.get("TROTTERFORGE_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        cap = int(raw)
    except ValueError:
        return 1
    return max(1, cap)
