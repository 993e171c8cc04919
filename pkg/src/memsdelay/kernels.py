"""Backend selection for the hot integration loop.

The compiled extension is used when it imports; setting the environment
variable ``MEMSDELAY_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
actuator_rk4 = _pykernels.actuator_rk4

if os.environ.get("MEMSDELAY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        actuator_rk4 = _ckernels.actuator_rk4
        BACKEND = "cython"


def get_kernel(backend=None):
    """Return the ``actuator_rk4`` implementation for ``backend`` (default: the selected one)."""
    if backend is None:
        return actuator_rk4
    if backend == "python":
        return _pykernels.actuator_rk4
    if backend == "cython":
        from . import _ckernels

        return _ckernels.actuator_rk4
    raise ValueError(f"unknown backend {backend!r}")
