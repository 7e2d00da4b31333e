"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``GRAFTER_PURE=1`` to force the pure-Python fallback (useful for
debugging and for the kernel benchmark).
"""

import os

if os.environ.get("GRAFTER_PURE"):
    from grafter._kernels_py import first_violation, mention_spans, splits_any_span

    BACKEND = "python"
else:
    try:
        from grafter._speedups import (  # type: ignore[no-redef]
            first_violation,
            mention_spans,
            splits_any_span,
        )

        BACKEND = "cython"
    except ImportError:
        from grafter._kernels_py import (  # type: ignore[no-redef]
            first_violation,
            mention_spans,
            splits_any_span,
        )

        BACKEND = "python"

__all__ = ["BACKEND", "first_violation", "mention_spans", "splits_any_span"]
