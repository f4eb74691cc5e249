"""Kernel selection: the compiled extension when importable, else numpy.

Set ``TORUSROT_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels

python = _pykernels

if os.environ.get("TORUSROT_BACKEND", "").lower() in ("python", "py", "numpy"):
    compiled = None
else:
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

active = compiled if compiled is not None else python
NAME = "cython" if compiled is not None else "python"
