"""Backend selection for the hot kernels.

The compiled extension is preferred when importable; set the environment
variable ``LATENTCLOUD_PURE=1`` to force the pure-Python fallback (used by
the parity tests and the benchmark).
"""

import os

from .errors import RipsBudgetError

if os.environ.get("LATENTCLOUD_PURE"):
    from . import _pure as backend
else:
    try:
        from . import _speedups as backend  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as backend

BACKEND_NAME = backend.NAME
rips_pairs = backend.rips_pairs
dijkstra_csr = backend.dijkstra_csr

__all__ = ["BACKEND_NAME", "RipsBudgetError", "rips_pairs", "dijkstra_csr"]
