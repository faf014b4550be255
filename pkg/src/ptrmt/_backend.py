"""Select the compiled kernels when available, else the numpy fallback.

Set ``PT_RMT_BACKEND=python`` to force the fallback.
"""

import os

from ptrmt import _fallback

kernels = _fallback
if os.environ.get("PT_RMT_BACKEND", "").lower() != "python":
    try:
        from ptrmt import _kernels as kernels  # noqa: F811
    except ImportError:
        kernels = _fallback

BACKEND = kernels.NAME
