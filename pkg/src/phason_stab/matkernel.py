"""Dense linear algebra on small square matrices.

General eigenproblems and SVDs go to LAPACK through numpy; the symmetric
3x3 eigensolver and the matrix-exponential propagator are implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SaturationError

__all__ = [
    "EigenDecomposition",
    "eig",
    "smin",
    "norm2",
    "normF",
    "sym3_eigvals",
    "expm",
    "expm_apply",
    "sort_eigenvalues",
]

EIG_RESIDUAL_TOL = 1e-10
_EPS = np.finfo(float).eps


def _as_square(M, name="matrix") -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def sort_eigenvalues(w: np.ndarray) -> np.ndarray:
    """Permutation ordering ``w`` by descending real part, then descending imaginary part."""
    w = np.asarray(w)
    return np.lexsort((-w.imag, -w.real))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues with unit-2-norm right eigenvectors (column ``j`` pairs with ``eigenvalues[j]``)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def residuals(self, A) -> np.ndarray:
        A = np.asarray(A)
        V = self.eigenvectors
        return np.linalg.norm(A @ V - V * self.eigenvalues, axis=0)


def eig(A) -> EigenDecomposition:
    """Eigendecomposition with a deterministic ordering and a residual guarantee.

    Raises
    ------
    ValueError
        ``A`` is not square or has non-finite entries.
    ConvergenceError
        LAPACK failed, or some pair violates
        ``||A v - lambda v|| <= 1e-10 ||A||_2``.
    """
    A = _as_square(A, "A")
    scale = norm2(A)
    bound = EIG_RESIDUAL_TOL * scale
    dec = _eig_sorted(A)
    res = dec.residuals(A)
    if np.any(res > bound):
        # LAPACK occasionally mishandles entries many orders below the rest;
        # dropping those below eps*||A|| is a perturbation within its own backward error
        dec = _eig_sorted(np.where(np.abs(A) < _EPS * scale, 0.0, A))
        res = dec.residuals(A)
    if np.any(res > bound):
        raise ConvergenceError(
            f"eigen residual {res.max():.3e} exceeds {bound:.3e}"
        )
    return dec


def _eig_sorted(A: np.ndarray) -> EigenDecomposition:
    try:
        w, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise ConvergenceError("eigenvalue iteration returned non-finite values")
    w = w.astype(complex)
    V = V.astype(complex)
    V = V / np.linalg.norm(V, axis=0)
    order = sort_eigenvalues(w)
    return EigenDecomposition(w[order], V[:, order])


def smin(M) -> float:
    """Smallest singular value; exactly 0.0 once it drops to ``eps * s_max``."""
    M = _as_square(M, "M")
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0:
        return 0.0
    lo = float(s[-1])
    return 0.0 if lo <= _EPS * float(s[0]) else lo


def norm2(M) -> float:
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


def normF(M) -> float:
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    m = float(np.max(np.abs(M))) if M.size else 0.0
    if m == 0.0:
        return 0.0
    # scaled to avoid underflow or overflow of the squares
    return m * float(np.sqrt(np.sum((np.abs(M) / m) ** 2)))


# --------------------------------------------------------------------------
# symmetric 3x3


def _unit_kernel_vector(M: np.ndarray) -> np.ndarray:
    # largest pairwise cross product of the rows spans the null space of a rank-2 M
    c = np.array([np.cross(M[0], M[1]), np.cross(M[0], M[2]), np.cross(M[1], M[2])])
    norms = np.linalg.norm(c, axis=1)
    k = int(np.argmax(norms))
    return c[k] / norms[k]


def _complement_basis(v: np.ndarray) -> np.ndarray:
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(v)))] = 1.0
    u1 = np.cross(v, axis)
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(v, u1)
    return np.column_stack([u1, u2])


def sym3_eigvals(S) -> np.ndarray:
    """Closed-form eigenvalues of a real symmetric 3x3 matrix, ascending.

    The trigonometric (Cardano) formula is used to locate the eigenvalue that
    is best separated from the other two.  Its eigenvector comes from a cross
    product of rows of ``S - lambda I``; the remaining pair is read off the
    2x2 compression of ``S`` onto the orthogonal complement.  That avoids the
    ``sqrt(eps)`` loss the bare formula suffers near a double eigenvalue.
    """
    S = np.asarray(S, dtype=float)
    if S.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValueError("matrix has non-finite entries")
    scale = float(np.max(np.abs(S)))
    if scale == 0.0:
        return np.zeros(3)
    if np.max(np.abs(S - S.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    S = 0.5 * (S + S.T)

    q = np.trace(S) / 3.0
    B = S - q * np.eye(3)
    p = np.sqrt(np.sum(B * B) / 6.0)
    if p == 0.0:
        return np.full(3, q)
    r = np.clip(np.linalg.det(B / p) / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    hi = 2.0 * p * np.cos(phi)
    lo = 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    mid = -hi - lo
    iso = hi if hi - mid >= mid - lo else lo

    v = _unit_kernel_vector(B - iso * np.eye(3))
    iso = v @ B @ v
    Q = _complement_basis(v)
    T = Q.T @ B @ Q
    m = 0.5 * (T[0, 0] + T[1, 1])
    d = np.hypot(0.5 * (T[0, 0] - T[1, 1]), T[0, 1])
    return np.sort(np.array([iso, m - d, m + d]) + q)


# --------------------------------------------------------------------------
# matrix exponential

_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def _balance(A: np.ndarray, max_sweeps: int = 50):
    """Diagonal similarity D^-1 A D with power-of-two entries (exact in floating point)."""
    n = A.shape[0]
    d = np.ones(n)
    B = A.astype(float if np.isrealobj(A) else complex, copy=True)
    for _ in range(max_sweeps):
        converged = True
        for i in range(n):
            c = np.linalg.norm(np.delete(B[:, i], i), 1)
            r = np.linalg.norm(np.delete(B[i, :], i), 1)
            if c == 0.0 or r == 0.0:
                continue
            f = 2.0 ** np.round(0.5 * np.log2(r / c))
            if f != 1.0 and (c * f + r / f) < 0.95 * (c + r):
                B[:, i] *= f
                B[i, :] /= f
                d[i] *= f
                converged = False
        if converged:
            break
    return B, d


def _pade13(A: np.ndarray) -> np.ndarray:
    b = _PADE13
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident
    return np.linalg.solve(V - U, V + U)


def expm(A) -> np.ndarray:
    """exp(A) by balancing plus degree-13 Pade scaling and squaring."""
    A = _as_square(A, "A")
    if A.shape[0] == 0:
        return A.copy()
    B, d = _balance(A)
    nrm = np.linalg.norm(B, 1)
    s = 0
    if nrm > _THETA13:
        s = int(np.ceil(np.log2(nrm / _THETA13)))
    with np.errstate(over="ignore", invalid="ignore"):
        F = _pade13(B / 2.0**s)
        for _ in range(s):
            F = F @ F
    F = (F * d[:, np.newaxis]) / d[np.newaxis, :]
    if not np.all(np.isfinite(F)):
        raise SaturationError("matrix exponential overflowed")
    return F


def expm_apply(A, t: float, q0) -> np.ndarray:
    """State ``exp(t A) q0`` of the linear system ``dq/dt = A q``.

    Raises
    ------
    SaturationError
        The propagated state overflowed (unstable ``A`` at large ``t``).
    """
    A = _as_square(A, "A")
    q0 = np.asarray(q0)
    if q0.shape != (A.shape[0],):
        raise ValueError(f"state has shape {q0.shape}, expected ({A.shape[0]},)")
    t = float(t)
    if not np.isfinite(t) or t < 0.0:
        raise ValueError(f"time must be finite and nonnegative, got {t}")
    if t == 0.0:
        return q0.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        q = expm(t * A) @ q0
    if not np.all(np.isfinite(q)):
        raise SaturationError(f"state overflowed at t={t}")
    return q
