"""Backend selection for the coordinate-descent sweep.

The compiled extension is preferred; the pure-Python implementation is the
behaviourally identical fallback.  ``BACKEND`` records which one is active;
``available_backends`` exposes both for the benchmark.
"""

from __future__ import annotations

from . import _descent_py

try:
    from . import _descent as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None:
    cd_sweep = _compiled.cd_sweep
    BACKEND = "cython"
else:
    cd_sweep = _descent_py.cd_sweep
    BACKEND = "python"


def available_backends() -> dict:
    out = {"python": _descent_py.cd_sweep}
    if _compiled is not None:
        out["cython"] = _compiled.cd_sweep
    return out
