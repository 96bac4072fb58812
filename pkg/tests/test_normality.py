from __future__ import annotations

import json
import math

import numpy as np
import pytest
import scipy.linalg

from phason_stab.model import GPA, assemble_system, quasicrystal_params
from phason_stab.normality import (
    DEFECTIVE,
    NormalityReport,
    dep_commutator,
    dep_henrici_F,
    distance_bounds,
    is_normal,
    kappa2_eigvec,
    normality_report,
)

from conftest import random_orthogonal

JORDAN = np.array([[0.0, 1.0], [0.0, 0.0]])


def henrici_schur(A):
    """Oracle: Frobenius norm of the strictly upper Schur factor."""
    T, _ = scipy.linalg.schur(np.asarray(A, dtype=complex), output="complex")
    return np.linalg.norm(np.triu(T, 1))


def random_normal(rng, n):
    Q = random_orthogonal(rng, n)
    return Q @ np.diag(rng.standard_normal(n)) @ Q.T


def test_symmetric_zero(rng):
    for _ in range(20):
        A = random_normal(rng, 6)
        assert dep_commutator(A) <= 1e-14
        assert dep_henrici_F(A) <= 1e-6 * np.linalg.norm(A)
        assert kappa2_eigvec(A) == pytest.approx(1.0, abs=1e-8)
        lo, hi = distance_bounds(A)
        assert 0 <= lo <= hi <= 1e-6 * np.linalg.norm(A)
        assert is_normal(A)


def test_jordan_block():
    assert dep_commutator(JORDAN) == pytest.approx(1.0)
    assert dep_henrici_F(JORDAN) == pytest.approx(1.0)
    lo, hi = distance_bounds(JORDAN)
    assert lo == pytest.approx(1 / math.sqrt(2))
    assert hi == pytest.approx(1.0)
    assert not is_normal(JORDAN)


def test_near_jordan_condition():
    # eigenvectors (1, +-1e-6) are nearly parallel
    assert kappa2_eigvec(np.array([[0.0, 1.0], [1e-12, 0.0]])) >= 1e5


def test_defective_flag():
    assert kappa2_eigvec(JORDAN) == DEFECTIVE


def test_zero_matrix_commutator_error():
    with pytest.raises(ValueError):
        dep_commutator(np.zeros((3, 3)))


def test_henrici_matches_schur(rng):
    for _ in range(50):
        n = int(rng.integers(2, 10))
        A = rng.standard_normal((n, n)) * 10.0 ** rng.uniform(-3, 6)
        assert dep_henrici_F(A) == pytest.approx(henrici_schur(A), rel=1e-8)


def test_unitary_invariance(rng):
    for _ in range(30):
        n = int(rng.integers(2, 9))
        A = rng.standard_normal((n, n))
        Q = random_orthogonal(rng, n)
        B = Q @ A @ Q.T
        assert dep_commutator(B) == pytest.approx(dep_commutator(A), rel=1e-10)
        assert dep_henrici_F(B) == pytest.approx(dep_henrici_F(A), rel=1e-8)


def test_commutator_scale_invariance(rng):
    A = rng.standard_normal((5, 5))
    for c in (1e-9, -3.0, 1e9, 2.0j):
        assert dep_commutator(c * A) == pytest.approx(dep_commutator(A), rel=1e-12)


def test_commutator_range(rng):
    for _ in range(100):
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert 0 <= dep_commutator(A) <= math.sqrt(2) + 1e-12


def test_normality_equivalence(rng):
    # zero departure and vanishing commutator come together
    for normal in (True, False):
        for _ in range(20):
            A = random_normal(rng, 5) if normal else rng.standard_normal((5, 5))
            f = np.linalg.norm(A)
            hf_zero = dep_henrici_F(A) <= 1e-6 * f
            c_zero = dep_commutator(A) <= 1e-10
            assert hf_zero == c_zero == normal
            assert is_normal(A) == normal


# -- quasicrystal matrices -------------------------------------------------


def test_dissipative_measures(dissipative_A):
    r = normality_report(dissipative_A.A)
    assert r.dep_c == pytest.approx(1.0, abs=1e-4)
    assert r.dep_HF == pytest.approx(4.58e7, rel=0.01)
    assert r.kappa2V == pytest.approx(6.50e3, rel=0.02)
    assert r.dist_lower == pytest.approx(1.527e7, rel=1e-3)
    assert r.dist_upper == r.dep_HF
    assert not r.is_normal
    # independent Schur oracle, frozen
    assert r.dep_HF == pytest.approx(henrici_schur(dissipative_A.A), rel=1e-6)
    assert r.dep_HF == pytest.approx(4.58484e7, rel=1e-5)


def test_dissipative_and_complete_agree_across_coupling():
    chis = np.linspace(0.05, 1.5, 8) * GPA
    reps = [normality_report(assemble_system(mode, quasicrystal_params(chi=c, phi=19, k0=k0)).A)
            for c in chis for mode, k0 in (("dissipative", 0.0), ("complete", 0.01 * GPA))]
    for key in ("dep_c", "dep_HF", "kappa2V"):
        vals = np.array([getattr(r, key) for r in reps])
        assert vals.max() / vals.min() - 1 < 0.01


def test_report_json_round_trip(dissipative_A):
    r = normality_report(dissipative_A.A)
    d = json.loads(r.to_json())
    assert set(d) == {"kappa2V", "dep_c", "dep_HF", "dist_lower", "dist_upper", "is_normal"}
    assert NormalityReport.from_dict(d) == r
