"""Optional numba acceleration.

Hot kernels are written twice: a ``@njit`` loop version and a batched
pure-numpy version.  ``PHASON_STAB_NUMBA=0`` forces the numpy path; when
numba is missing the numpy path is used silently.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

__all__ = ["njit", "HAVE_NUMBA", "backend", "set_backend", "resolve_jobs", "map_chunks"]

HAVE_NUMBA = numba is not None

_backend = "numba" if HAVE_NUMBA and os.environ.get("PHASON_STAB_NUMBA", "1") != "0" else "numpy"


def njit(f=None, **options):
    """``numba.njit`` with ``cache``/``nogil`` defaults, or identity without numba."""
    options.setdefault("cache", True)
    options.setdefault("nogil", True)
    if numba is None:
        return (lambda g: g) if f is None else f
    if f is None:
        return lambda g: numba.njit(g, **options)
    return numba.njit(f, **options)


def backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Switch kernel backend at runtime; returns the previous one."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    previous, _backend = _backend, name
    return previous


def resolve_jobs(jobs: int | None = None) -> int:
    if jobs is None:
        env = os.environ.get("PHASON_STAB_JOBS")
        jobs = int(env) if env else 1
    return max(1, int(jobs))


def map_chunks(fn, n_items: int, jobs: int | None = None, min_chunk: int = 64):
    """Apply ``fn(start, stop)`` over ``range(n_items)`` in contiguous chunks.

    Results come back in chunk order whatever the worker count, so callers that
    concatenate them get identical output for any ``jobs``.
    """
    jobs = resolve_jobs(jobs)
    if jobs == 1 or n_items <= min_chunk:
        return [fn(0, n_items)]
    n_chunks = min(jobs * 4, max(1, n_items // min_chunk))
    bounds = [(i * n_items // n_chunks, (i + 1) * n_items // n_chunks) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
