"""Hot loops for resolvent grids and perturbed-spectrum clouds.

Each kernel exists as a numba loop (``*_loop``) and as a batched numpy
version (``*_batched``).  The public wrappers pick one according to
:func:`phason_stab._accel.backend`.  Random draws happen outside, so the
kernels are pure functions of their array arguments.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import njit

__all__ = ["smin_grid", "perturbed_eigvals", "structured_perturbations"]

_EPS = np.finfo(float).eps


@njit
def _smin_grid_loop(A, zs):
    n = A.shape[0]
    out = np.empty(zs.shape[0])
    M = np.empty((n, n), dtype=np.complex128)
    for k in range(zs.shape[0]):
        for i in range(n):
            for j in range(n):
                M[i, j] = -A[i, j]
            M[i, i] += zs[k]
        s = np.linalg.svd(M, full_matrices=False)[1]
        lo = s[n - 1]
        out[k] = 0.0 if lo <= _EPS * s[0] else lo
    return out


def _smin_grid_batched(A, zs, chunk=4096):
    n = A.shape[0]
    out = np.empty(zs.shape[0])
    eye = np.eye(n)
    for start in range(0, zs.shape[0], chunk):
        z = zs[start:start + chunk]
        M = z[:, None, None] * eye - A
        s = np.linalg.svd(M, compute_uv=False)
        lo = s[:, -1]
        out[start:start + chunk] = np.where(lo <= _EPS * s[:, 0], 0.0, lo)
    return out


def smin_grid(A, zs, jobs=None) -> np.ndarray:
    """``s_min(z I - A)`` for every ``z`` in the flat array ``zs``."""
    A = np.ascontiguousarray(A, dtype=np.complex128)
    zs = np.ascontiguousarray(zs, dtype=np.complex128).ravel()
    kernel = _smin_grid_loop if _accel.backend() == "numba" else _smin_grid_batched
    parts = _accel.map_chunks(lambda a, b: kernel(A, zs[a:b]), zs.shape[0], jobs)
    return np.concatenate(parts) if parts else np.empty(0)


@njit
def _eigvals_loop(A, E):
    m, n = E.shape[0], A.shape[0]
    out = np.empty((m, n), dtype=np.complex128)
    M = np.empty((n, n), dtype=np.complex128)
    for k in range(m):
        for i in range(n):
            for j in range(n):
                M[i, j] = A[i, j] + E[k, i, j]
        out[k] = np.linalg.eigvals(M)
    return out


def _eigvals_batched(A, E):
    return np.linalg.eigvals(A[None, :, :] + E).astype(np.complex128)


def perturbed_eigvals(A, E, jobs=None) -> np.ndarray:
    """Eigenvalues of ``A + E[k]`` for a stack ``E`` of shape ``(m, n, n)``; shape ``(m, n)``."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    E = np.ascontiguousarray(E, dtype=np.float64)
    if _accel.backend() == "numba":
        Ac = A.astype(np.complex128)
        parts = _accel.map_chunks(lambda a, b: _eigvals_loop(Ac, E[a:b]), E.shape[0], jobs)
    else:
        parts = _accel.map_chunks(lambda a, b: _eigvals_batched(A, E[a:b]), E.shape[0], jobs)
    return np.concatenate(parts) if parts else np.empty((0, A.shape[0]), np.complex128)


def structured_perturbations(G, rho, varsigma, target_norms):
    """Assemble block-structured perturbations from raw 3x3 draws.

    ``G`` has shape ``(m, 3, 3, 3)``: three raw matrices per sample, in the
    order E1, E2, E3.  Each is symmetrised, placed in the 9x9 layout with the
    ``1/rho`` and ``1/varsigma`` row scalings, and the whole ``E`` rescaled
    to the requested 2-norm.  Returns ``(E, norms)``.
    """
    G = np.asarray(G, dtype=float)
    m = G.shape[0]
    S = 0.5 * (G + np.swapaxes(G, -1, -2))
    E = np.zeros((m, 9, 9))
    E[:, 3:6, 0:3] = S[:, 0] / rho
    E[:, 3:6, 6:9] = S[:, 1] / rho
    E[:, 6:9, 0:3] = S[:, 1] / varsigma
    E[:, 6:9, 6:9] = S[:, 2] / varsigma
    raw = np.linalg.svd(E, compute_uv=False)[:, 0]
    scale = np.divide(target_norms, raw, out=np.zeros(m), where=raw > 0)
    E *= scale[:, None, None]
    norms = np.linalg.svd(E, compute_uv=False)[:, 0]
    return E, norms
