"""Numba toggle for the hot kernels.

The numeric kernels in :mod:`tjsim._kernels` are written so they run both
as plain Python/NumPy and under ``numba.njit``. By default they are JIT
compiled (with on-disk caching). Set ``TJSIM_NUMBA=0`` in the environment
to force the pure-Python path; the math is identical, only slower. The
benchmark in ``benchmarks/bench_kernels.py`` compares the two.
"""

import os


def _numba_wanted() -> bool:
    return os.environ.get("TJSIM_NUMBA", "1").strip().lower() not in ("0", "false", "off")


NUMBA_ENABLED = False
if _numba_wanted():
    try:
        from numba import njit as _numba_njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass


if NUMBA_ENABLED:

    def njit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        if func is None:
            return _numba_njit(**kwargs)
        return _numba_njit(**kwargs)(func)

else:

    def njit(func=None, **kwargs):
        if func is None:
            return lambda f: f
        return func


def py_func(func):
    """Uncompiled Python implementation of a kernel (the function itself
    when numba is disabled)."""
    return getattr(func, "py_func", func)
