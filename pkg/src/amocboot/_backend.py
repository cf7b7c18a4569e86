"""Kernel backend selection: compiled extension with a numpy fallback.

The default tries the compiled module and silently falls back. Set
AMOCBOOT_BACKEND=python or AMOCBOOT_BACKEND=compiled to force a choice;
forcing the compiled backend raises ImportError when it is unavailable.
"""

from __future__ import annotations

import os

from . import _pykernels

_choice = os.environ.get("AMOCBOOT_BACKEND", "auto").strip().lower()

if _choice == "python":
    kernels = _pykernels
elif _choice == "compiled":
    from . import _kernels as kernels
elif _choice in ("", "auto"):
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _pykernels
else:
    raise ValueError(f"AMOCBOOT_BACKEND must be 'auto', 'python' or 'compiled', got {_choice!r}")

cusum_stats = kernels.cusum_stats
bootstrap_mstars = kernels.bootstrap_mstars
walk_argmax = kernels.walk_argmax


def backend_name() -> str:
    """'compiled' when the extension is active, else 'python'."""
    return kernels.BACKEND
