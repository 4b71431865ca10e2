"""Select the sampling backend: compiled kernels if importable, numpy fallback.

Set IRGTAIL_BACKEND=python or IRGTAIL_BACKEND=compiled to force a choice at
import time (the latter raises if the extension is missing). Both backends
produce bitwise-identical samples from the same seed, so the switch affects
speed only.
"""

from __future__ import annotations

import os

from . import _purepy

_forced = os.environ.get("IRGTAIL_BACKEND", "").strip().lower()
if _forced not in ("", "python", "compiled"):
    raise ImportError(f"IRGTAIL_BACKEND must be 'python' or 'compiled', got {_forced!r}")

if _forced == "python":
    _selected = _purepy
    BACKEND = "python"
else:
    try:
        from . import _kernels as _selected  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _forced == "compiled":
            raise ImportError(
                "IRGTAIL_BACKEND=compiled but the irgtail._kernels extension "
                "is not importable; reinstall with a C compiler available"
            ) from None
        _selected = _purepy
        BACKEND = "python"


def get_backend(name: str | None = None):
    """Return the kernel module: selected default, or 'python'/'compiled'."""
    if name is None:
        return _selected
    if name == "python":
        return _purepy
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
