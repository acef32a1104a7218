"""Selects the per-step kernel implementation at import time.

The compiled extension is preferred when built; otherwise the numpy
fallback is used.  Set ``FDRELAX_BACKEND`` to ``python`` or ``compiled``
to force a choice (the latter raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _kernels_py
from .errors import ConfigurationError

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built; fallback keeps everything working
    _compiled = None


def _select(name: str):
    if name in ("", "auto"):
        return _compiled if _compiled is not None else _kernels_py
    if name in ("compiled", "cython"):
        if _compiled is None:
            raise ImportError(
                "FDRELAX_BACKEND requests the compiled kernels but the "
                "extension is not built; run `pip install -e .`"
            )
        return _compiled
    if name in ("python", "fallback"):
        return _kernels_py
    raise ConfigurationError(f"unknown backend {name!r}")


_active = _select(os.environ.get("FDRELAX_BACKEND", "").strip().lower())


def kernels():
    """The active kernel module."""
    return _active


def backend_name() -> str:
    return _active.BACKEND_NAME


def has_compiled() -> bool:
    return _compiled is not None


def use(name: str):
    """Switch backends at runtime (tests and benchmarks)."""
    global _active
    _active = _select(name.strip().lower())
    return _active
