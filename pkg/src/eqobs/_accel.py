"""JIT switch for the numeric kernels.

Kernels are plain numpy functions decorated with :func:`jit`.  When numba is
importable and ``EQOBS_DISABLE_JIT`` is unset (or ``0``), they are compiled in
nopython mode; otherwise the decorator is the identity and the same source runs
as ordinary numpy code.  The flag is read once, at import time.
"""

import os

_flag = os.environ.get("EQOBS_DISABLE_JIT", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False

JIT_ENABLED = HAS_NUMBA


def jit(func):
    """Compile ``func`` with numba when enabled; keep the source reachable.

    The uncompiled function is always available as ``func.py_func`` so callers
    (the benchmark, equivalence tests) can run both paths in one process.
    """
    if JIT_ENABLED:
        return numba.njit(cache=True)(func)
    func.py_func = func
    return func
