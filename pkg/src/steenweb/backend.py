"""Backend selection for the hot numeric kernels.

Two interchangeable implementations exist for every kernel in
:mod:`steenweb.kernels`: a numba ``@njit`` version and a pure-numpy one.
The environment variable ``STEENWEB_BACKEND`` picks one:

    STEENWEB_BACKEND=numba   force numba (error if numba is missing)
    STEENWEB_BACKEND=numpy   force the pure-numpy fallback
    (unset)                  numba when importable, numpy otherwise

The choice is made once at import time; ``benchmarks/bench_kernels.py``
compares the two paths on identical workloads.
"""

from __future__ import annotations

import os

_env = os.environ.get("STEENWEB_BACKEND", "").strip().lower()

if _env not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"STEENWEB_BACKEND={_env!r} not understood (use 'numba' or 'numpy')"
    )

if _env == "numpy":
    HAVE_NUMBA = False
else:
    try:
        import numba  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:
        if _env == "numba":
            raise RuntimeError("STEENWEB_BACKEND=numba but numba is not installed")
        HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def maybe_njit(*args, **kwargs):
    """``numba.njit`` under the numba backend, identity otherwise."""
    if HAVE_NUMBA:
        from numba import njit

        return njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap
