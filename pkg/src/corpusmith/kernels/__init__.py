"""Kernel backend selection.

Exposes u64_block and topk_cosine from the compiled extension when it
imports, otherwise from the numpy fallback. Set CORPUSMITH_PURE=1 to
force the fallback (used by the benchmark and the backend parity tests).
Both backends produce identical PRNG streams and identical neighbor ids;
see corpusmith.kernels.fallback for the shared contract.
"""

import os

from . import fallback as _fallback

if os.environ.get("CORPUSMITH_PURE"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

u64_block = _impl.u64_block
topk_cosine = _impl.topk_cosine


def backend() -> str:
    """Name of the active backend: "native" or "python"."""
    return BACKEND
