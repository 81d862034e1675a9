"""SGD kernel selection: compiled extension when available, numpy otherwise.

Set EDGESIM_PURE_PYTHON=1 before import to force the numpy fallback (used
by the benchmark and for cross-checking the two implementations).
"""

import os

from ._hinge_py import hinge_sgd_pass as hinge_sgd_pass_python

_compiled = None
if os.environ.get("EDGESIM_PURE_PYTHON") != "1":
    try:
        from ._hinge import hinge_sgd_pass as _compiled
    except ImportError:
        _compiled = None

if _compiled is None:
    hinge_sgd_pass = hinge_sgd_pass_python
    BACKEND = "python"
else:
    hinge_sgd_pass = _compiled
    BACKEND = "cython"

__all__ = ["BACKEND", "hinge_sgd_pass", "hinge_sgd_pass_python"]
