"""Kernel backend selection.

The compiled extension (cyclerl._kernels) and the numpy fallback
(cyclerl.nn._pykernels) implement the same three functions; whichever is
active is re-exported here. Set CYCLERL_KERNELS=python or =compiled to force
one side; the default ("auto") prefers the compiled kernels when the
extension was built.
"""

import os

from cyclerl.nn import _pykernels

_requested = os.environ.get("CYCLERL_KERNELS", "auto")
if _requested not in ("auto", "python", "compiled"):
    raise RuntimeError(f"CYCLERL_KERNELS must be auto, python or compiled, got {_requested!r}")

_impl = None
if _requested in ("auto", "compiled"):
    try:
        from cyclerl import _kernels as _impl
    except ImportError:
        if _requested == "compiled":
            raise
if _impl is None:
    _impl = _pykernels

ACT_TANH = _pykernels.ACT_TANH
ACT_RELU = _pykernels.ACT_RELU

mlp_forward = _impl.mlp_forward
mlp_backward = _impl.mlp_backward
adam_update = _impl.adam_update


def backend_name():
    """Name of the active kernel implementation: "compiled" or "python"."""
    return "compiled" if _impl is not _pykernels else "python"
