"""Backend selection for the hot numeric kernels.

The package ships two implementations of each hot kernel: a numba
``@njit`` version and a pure-numpy fallback.  Selection happens once at
import time through the ``LEVYMULT_BACKEND`` environment variable:

    auto   use numba when importable, numpy otherwise (default)
    numba  require numba, raise if it cannot be imported
    numpy  force the pure-numpy path even when numba is present

``benchmarks/backend_bench.py`` times the two paths against each other.
"""

import os

_REQUESTED = os.environ.get("LEVYMULT_BACKEND", "auto").strip().lower()
if _REQUESTED not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"LEVYMULT_BACKEND must be one of auto/numba/numpy, got {_REQUESTED!r}"
    )

NUMBA_IMPORTABLE = False
if _REQUESTED in ("auto", "numba"):
    try:
        from numba import njit  # noqa: F401

        NUMBA_IMPORTABLE = True
    except ImportError:
        if _REQUESTED == "numba":
            raise ImportError(
                "LEVYMULT_BACKEND=numba but numba is not importable"
            ) from None

USE_NUMBA = NUMBA_IMPORTABLE and _REQUESTED in ("auto", "numba")

if not USE_NUMBA:

    def njit(*args, **kwargs):  # noqa: F811
        """Pass-through decorator standing in for numba.njit."""

        def decorator(func):
            return func

        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return decorator


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
