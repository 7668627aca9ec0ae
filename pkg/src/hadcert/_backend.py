"""Selection of the mask-scan backend.

The compiled Cython kernel is used when its extension module built; setting
HADCERT_PURE=1 in the environment forces the pure-numpy fallback. Both
backends implement the identical scan contract (see _scan_py).
"""

import os

from . import _scan_py

if os.environ.get("HADCERT_PURE", "") not in ("", "0"):
    _impl = _scan_py
else:
    try:
        from . import _scan_cy as _impl
    except ImportError:
        _impl = _scan_py

scan_block_pairs = _impl.scan_block_pairs


def backend_name():
    """'compiled' when the Cython kernel is active, else 'python'."""
    return "python" if _impl is _scan_py else "compiled"
