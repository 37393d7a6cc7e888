"""Simulation kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python loops when
it is missing (source checkout without a build) or when the environment
variable PEDBRAKE_PURE_PYTHON is set to a non-empty value.
"""

import os

if os.environ.get("PEDBRAKE_PURE_PYTHON"):
    from . import loop_py as _impl
else:
    try:
        from . import _loop_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import loop_py as _impl

BACKEND_NAME = _impl.BACKEND_NAME
run_braking_loop = _impl.run_braking_loop
run_lateral_loop = _impl.run_lateral_loop
