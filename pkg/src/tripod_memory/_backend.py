"""Selects the stage marching kernel: compiled if importable, else NumPy.

Set ``TRIPOD_MEMORY_BACKEND=python`` to force the fallback.
"""

import os

from . import _stage_py

try:
    from . import _stage_core
except ImportError:  # extension not built
    _stage_core = None

BACKENDS = {"python": _stage_py.march_stage}
if _stage_core is not None:
    BACKENDS["compiled"] = _stage_core.march_stage


def default_backend() -> str:
    wanted = os.environ.get("TRIPOD_MEMORY_BACKEND", "auto")
    if wanted == "auto":
        return "compiled" if "compiled" in BACKENDS else "python"
    if wanted not in BACKENDS:
        raise ValueError(f"backend {wanted!r} unavailable; have {sorted(BACKENDS)}")
    return wanted


def get_marcher(name: str | None = None):
    name = name or default_backend()
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    return BACKENDS[name]
