"""Kernel backend selection.

Two interchangeable implementations of the hot geometry kernels live here:

* ``numba`` — hand-written loops compiled with ``numba.njit`` (the default
  when numba imports cleanly).
* ``numpy`` — vectorized numpy/scipy equivalents, used as a pure-Python
  fallback and as a cross-check in tests.

Both backends are exact: squared distances are integer arithmetic end to
end, so every predicate computed downstream (bands, boundary matching) is
bit-identical regardless of which backend ran it.

Selection is made once at import time from the ``MASKEVAL_BACKEND``
environment variable: ``auto`` (default), ``numba``, or ``numpy``.

Backend contract (implemented by both modules):

``squared_edt(source) -> int64 (H, W)``
    Exact squared Euclidean distance to the nearest ``True`` pixel.
    ``source`` must contain at least one ``True`` pixel.

``sqdist_capped(source, cap) -> integer (H, W)``
    Exact squared distance wherever it is ``<= cap*cap``; any larger true
    distance may be reported as an arbitrary value ``> cap*cap``. Callers
    only ever threshold the result at or below ``cap*cap``, so the integer
    dtype is backend's choice (numpy returns int64, numba int32).

``perimeter_total(mask) -> float``
    Total Freeman chain-code length over the outer and hole contours of
    every 8-connected component (unit axis steps, sqrt(2) diagonals);
    isolated single pixels count 4.
"""

from __future__ import annotations

import os
from types import ModuleType

_VALID = ("auto", "numba", "numpy")


def get_backend(name: str) -> ModuleType:
    """Import and return a backend module by name ('numba' or 'numpy')."""
    if name == "numba":
        from . import _numba

        return _numba
    if name == "numpy":
        from . import _numpy

        return _numpy
    raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")


def _select() -> tuple[str, ModuleType]:
    requested = os.environ.get("MASKEVAL_BACKEND", "auto").strip().lower()
    if requested not in _VALID:
        raise ValueError(
            f"MASKEVAL_BACKEND={requested!r} not understood; "
            f"expected one of {', '.join(_VALID)}"
        )
    if requested in ("auto", "numba"):
        try:
            return "numba", get_backend("numba")
        except ImportError:
            if requested == "numba":
                raise
    return "numpy", get_backend("numpy")


BACKEND_NAME, _impl = _select()

squared_edt = _impl.squared_edt
sqdist_capped = _impl.sqdist_capped
perimeter_total = _impl.perimeter_total
