"""Scalar measures of how far a matrix is from being normal."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .matkernel import eig, norm2, normF

__all__ = [
    "NormalityReport",
    "dep_commutator",
    "dep_henrici_F",
    "kappa2_eigvec",
    "distance_bounds",
    "commutator_normF",
    "is_normal",
    "normality_report",
    "DEFECTIVE",
]

DEFECTIVE = "defective"
DEFECTIVE_RATIO = 1e-13
NORMAL_TOL = 1e-12


def _matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def _commutator(A: np.ndarray) -> np.ndarray:
    Ah = A.conj().T
    return Ah @ A - A @ Ah


def dep_commutator(A) -> float:
    """``||A*A - AA*||_2 / ||A||_2^2``; lies in ``[0, sqrt(2)]``."""
    A = _matrix(A)
    s = norm2(A)
    if s == 0.0:
        raise ValueError("commutator departure is undefined for the zero matrix")
    # normalise first so the products stay O(1) whatever the scale of A
    B = A / s
    return norm2(_commutator(B))


def commutator_normF(A) -> float:
    return normF(_commutator(_matrix(A)))


def dep_henrici_F(A) -> float:
    """Henrici departure ``sqrt(||A||_F^2 - sum |lambda_j|^2)``, clamped at 0."""
    A = _matrix(A)
    lam = eig(A).eigenvalues
    f = normF(A)
    if f == 0.0:
        return 0.0
    # scaled to avoid overflow in the squares
    r = 1.0 - float(np.sum(np.abs(lam / f) ** 2))
    return f * math.sqrt(max(0.0, r))


def kappa2_eigvec(A) -> float | str:
    """Condition number of the unit-column eigenvector matrix, or ``"defective"``.

    With repeated eigenvalues the value depends on the basis LAPACK picks in
    each eigenspace; it is therefore an upper estimate of the optimal
    condition number, not the minimum.
    """
    V = eig(_matrix(A)).eigenvectors
    s = np.linalg.svd(V, compute_uv=False)
    if s[-1] < DEFECTIVE_RATIO * s[0]:
        return DEFECTIVE
    return float(s[0] / s[-1])


def distance_bounds(A) -> tuple[float, float]:
    """Bounds on the Frobenius distance from ``A`` to the normal matrices."""
    A = _matrix(A)
    d = dep_henrici_F(A)
    return d / math.sqrt(A.shape[0]), d


def is_normal(A, tol: float = NORMAL_TOL) -> bool:
    A = _matrix(A)
    f = normF(A)
    return commutator_normF(A) <= tol * f * f


@dataclass(frozen=True)
class NormalityReport:
    kappa2V: float | str
    dep_c: float
    dep_HF: float
    dist_lower: float
    dist_upper: float
    is_normal: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "NormalityReport":
        return cls(**d)


def normality_report(A) -> NormalityReport:
    A = _matrix(np.asarray(A))
    d_hf = dep_henrici_F(A)
    n = A.shape[0]
    return NormalityReport(
        kappa2V=kappa2_eigvec(A),
        dep_c=dep_commutator(A),
        dep_HF=d_hf,
        dist_lower=d_hf / math.sqrt(n),
        dist_upper=d_hf,
        is_normal=is_normal(A),
    )
