"""Kernel backend selection.

The compiled Cython kernel is used when present; otherwise the
vectorized numpy twin takes over.  Setting MIXNEU_PURE_PYTHON=1 in the
environment forces the fallback (used by the benchmark and the
cross-check test).  Both backends evaluate the same quadrature sums;
they may differ by floating-point reassociation only.
"""

import os

from . import _pairquad_py

if os.environ.get("MIXNEU_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _pairquad_py
    COMPILED = False
else:
    try:
        from . import _pairquad as _impl  # type: ignore[no-redef]
        COMPILED = True
    except ImportError:
        _impl = _pairquad_py
        COMPILED = False

pair_blocks = _impl.pair_blocks


def backend_name() -> str:
    return "compiled" if COMPILED else "python"
