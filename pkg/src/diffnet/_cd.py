"""Kernel backend selection.

The compiled extension is preferred; the pure-Python fallback is used when
the extension is unavailable or when DIFFNET_PURE_PYTHON is set (useful for
debugging and for the backend benchmark).
"""

import os

if os.environ.get("DIFFNET_PURE_PYTHON"):
    from . import _cdpy as _backend
else:
    try:
        from . import _cdfast as _backend  # type: ignore[no-redef]
    except ImportError:
        from . import _cdpy as _backend

cd_sweeps = _backend.cd_sweeps
BACKEND = _backend.NAME


def available_backends():
    """Names of the kernel backends importable in this environment."""
    names = ["python"]
    try:
        from . import _cdfast  # noqa: F401
        names.insert(0, "cython")
    except ImportError:
        pass
    return names
