"""Kernel selection: compiled core when built, Python fallback otherwise.

Set ``NEATGAMES_PURE=1`` to force the fallback.
"""
import os

from . import _kernels_py as py

BACKEND = "python"
canon_table = py.canon_table

if not os.environ.get("NEATGAMES_PURE"):
    try:
        from . import _core

        canon_table = _core.canon_table
        BACKEND = "compiled"
    except ImportError:
        pass

popcount = py.popcount
iter_bits = py.iter_bits
shell_tuples = py.shell_tuples
table_from_shell = py.table_from_shell
theta_scan = py.theta_scan
Completer = None  # the completion search falls back to recursion in the network module
if BACKEND == "compiled":
    theta_scan = _core.theta_scan
    Completer = _core.Completer
