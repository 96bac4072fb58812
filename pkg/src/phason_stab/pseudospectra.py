"""Complex and structured epsilon-pseudospectra.

The complex pseudospectrum is sampled on a rectangular grid through the
smallest singular value of the resolvent argument ``z I - A``.  Structured
pseudospectra are explored by Monte-Carlo: eigenvalues of ``A + E`` for
random symmetric block perturbations that respect the 9x9 layout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .matkernel import eig, norm2
from .model import SelfActionMode, SystemMatrix, assemble_system, ConstitutiveParams, WaveConfig

__all__ = [
    "GridSpec",
    "PseudospectrumGrid",
    "StructuredCloud",
    "CoarseGridWarning",
    "default_grid",
    "default_margin",
    "resolvent_grid",
    "membership",
    "pseudo_abscissa",
    "calibrate_epsilon",
    "structured_samples",
    "imaginary_axis_margin",
    "CALIBRATION_PARAMS",
    "BOUNDARY_FRACTION",
]

# strict inequality ||E||_2 < epsilon is kept by aiming just inside the ball
BOUNDARY_FRACTION = 0.999

CALIBRATION_PARAMS = ("chi", "alpha", "lambda", "mu", "zeta", "gamma", "k0")


class CoarseGridWarning(UserWarning):
    """No grid node fell inside the requested pseudospectrum."""


def _array(A) -> np.ndarray:
    A = A.A if isinstance(A, SystemMatrix) else np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def _hash(A) -> str:
    if isinstance(A, SystemMatrix):
        return A.matrix_hash
    import hashlib

    return hashlib.sha256(np.ascontiguousarray(A).tobytes()).hexdigest()[:16]


# --------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int = 200
    ny: int = 200

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"empty grid window {self}")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per direction")

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.nx)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.ny)

    def shifted(self, h: complex) -> "GridSpec":
        return GridSpec(self.re_min + h.real, self.re_max + h.real,
                        self.im_min + h.imag, self.im_max + h.imag, self.nx, self.ny)

    def with_re(self, re_min: float, re_max: float) -> "GridSpec":
        return GridSpec(re_min, re_max, self.im_min, self.im_max, self.nx, self.ny)


def default_margin(A) -> float:
    return max(1.0, 0.05 * math.sqrt(norm2(_array(A))))


def default_grid(A, nx: int = 200, ny: int = 200) -> GridSpec:
    """Bounding box of the spectrum, 20% wider per side, plus ``max(1, 0.05 sqrt(||A||_2))``."""
    lam = eig(_array(A)).eigenvalues
    pad = default_margin(A)
    lo_r, hi_r = lam.real.min(), lam.real.max()
    lo_i, hi_i = lam.imag.min(), lam.imag.max()
    dr, di = 0.2 * (hi_r - lo_r), 0.2 * (hi_i - lo_i)
    return GridSpec(lo_r - dr - pad, hi_r + dr + pad, lo_i - di - pad, hi_i + di + pad, nx, ny)


@dataclass(frozen=True, eq=False)
class PseudospectrumGrid:
    """``values[i, j] = log10 s_min(z I - A)`` at ``z = re[i] + 1j * im[j]``.

    Exact singularity is stored as ``-inf``.  ``z`` lies in the
    epsilon-pseudospectrum iff ``values < log10(epsilon)``.
    """

    spec: GridSpec
    values: np.ndarray
    matrix_hash: str

    @property
    def re(self) -> np.ndarray:
        return self.spec.re

    @property
    def im(self) -> np.ndarray:
        return self.spec.im

    @property
    def z(self) -> np.ndarray:
        return self.re[:, None] + 1j * self.im[None, :]

    def inside(self, epsilon: float) -> np.ndarray:
        return self.values < math.log10(epsilon)


def resolvent_grid(A, spec: GridSpec | None = None, jobs: int | None = None) -> PseudospectrumGrid:
    """Sample ``log10 s_min(z I - A)`` on the grid nodes.

    For real ``A`` the resolvent at ``conj(z)`` has the same singular values,
    so only ``|Im z|`` is evaluated and the grid is exactly conjugate
    symmetric.
    """
    M = _array(A)
    spec = default_grid(M) if spec is None else spec
    re, im = spec.re, spec.im
    if np.isrealobj(M):
        # linspace is not bitwise symmetric; nodes equal to 1e-12 of the span share a value
        key = np.round(np.abs(im) / (1e-12 * (spec.im_max - spec.im_min)))
        _, first, inverse = np.unique(key, return_index=True, return_inverse=True)
        im_eval = np.abs(im)[first]
    else:
        im_eval, inverse = im, np.arange(im.size)
    z = (re[:, None] + 1j * im_eval[None, :]).ravel()
    s = _kernels.smin_grid(M, z, jobs).reshape(re.size, im_eval.size)
    with np.errstate(divide="ignore"):
        logs = np.log10(s)
    return PseudospectrumGrid(spec, logs[:, inverse.ravel()], _hash(A))


# --------------------------------------------------------------------------
# pointwise queries


def _smin_vec(M: np.ndarray, z: complex):
    R = z * np.eye(M.shape[0]) - M
    _, s, vh = np.linalg.svd(R)
    lo = float(s[-1])
    if lo <= np.finfo(float).eps * float(s[0]):
        lo = 0.0
    return lo, vh[-1].conj()


def _smin(M: np.ndarray, z: complex) -> float:
    s = np.linalg.svd(z * np.eye(M.shape[0]) - M, compute_uv=False)
    lo = float(s[-1])
    return 0.0 if lo <= np.finfo(float).eps * float(s[0]) else lo


def membership(A, z: complex, epsilon: float, return_witness: bool = False):
    """Whether ``z`` lies in the epsilon-pseudospectrum.

    With ``return_witness`` also returns a unit vector ``v`` with
    ``||(z I - A) v||_2 = s_min(z I - A)``, i.e. ``< epsilon`` when inside.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    M = _array(A)
    s, v = _smin_vec(M, complex(z))
    inside = s < epsilon
    return (inside, v) if return_witness else inside


def imaginary_axis_margin(A, iters: int = 80) -> tuple[float, float]:
    """``min over omega of s_min(i omega I - A)`` and the minimising ``omega``.

    This is the largest epsilon for which the complex pseudospectrum stays
    off the imaginary axis.  Local minima are searched around ``Im lambda``
    of every eigenvalue and at ``omega = 0``.
    """
    M = _array(A)
    lam = eig(M).eigenvalues
    scale = norm2(M)
    best = (math.inf, 0.0)
    centers = sorted(set([0.0] + [abs(float(l.imag)) for l in lam]))
    for c in centers:
        width = max(10.0 * float(np.min(np.abs(lam.real))), 1e-9 * scale, 1e-12)
        lo, hi = c - width, c + width
        f = lambda w: _smin(M, 1j * w)
        g = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = hi - g * (hi - lo), lo + g * (hi - lo)
        fa, fb = f(a), f(b)
        for _ in range(iters):
            if fa < fb:
                hi, b, fb = b, a, fa
                a = hi - g * (hi - lo)
                fa = f(a)
            else:
                lo, a, fa = a, b, fb
                b = lo + g * (hi - lo)
                fb = f(b)
        w = 0.5 * (lo + hi)
        for cand in (w, c):
            val = f(cand)
            if val < best[0]:
                best = (val, cand)
    return best


# --------------------------------------------------------------------------
# pseudospectral abscissa


def _rightmost(M, im, re_inside, epsilon, step0, iters):
    """Largest ``re`` on the horizontal line reached from an inside point by bisection."""
    lo = re_inside
    step = step0
    hi = lo + step
    # march right until outside; |z| > ||A|| + eps is always outside, so this ends
    while _smin(M, hi + 1j * im) < epsilon:
        lo = hi
        step *= 2.0
        hi = lo + step
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _smin(M, mid + 1j * im) < epsilon:
            lo = mid
        else:
            hi = mid
    return lo


def pseudo_abscissa(A, epsilon: float, spec: GridSpec | None = None, refine_iters: int = 60,
                    grid: PseudospectrumGrid | None = None, jobs: int | None = None) -> float:
    """Estimate ``max Re z`` over the epsilon-pseudospectrum.

    Seeds are every eigenvalue (always inside) and, per grid line, the
    rightmost grid node inside.  From each seed the boundary ``s_min = eps``
    is located by bisection along the real direction; the best candidate is
    then polished by a golden-section search over ``Im z``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    M = _array(A)
    lam = eig(M).eigenvalues
    if grid is None:
        grid = resolvent_grid(M, spec if spec is not None else default_grid(M), jobs)
    inside = grid.inside(epsilon)
    dre = (grid.spec.re_max - grid.spec.re_min) / (grid.spec.nx - 1)
    dim = (grid.spec.im_max - grid.spec.im_min) / (grid.spec.ny - 1)
    step0 = max(epsilon, 1e-14 * norm2(M))
    seeds = [(float(l.imag), float(l.real), step0) for l in lam
             if l.imag >= 0 or not np.isrealobj(M)]
    if not inside.any():
        warnings.warn(f"no grid node inside the {epsilon:g}-pseudospectrum; "
                      "refining from eigenvalues only", CoarseGridWarning, stacklevel=2)
    else:
        re, im = grid.re, grid.im
        for j in np.flatnonzero(inside.any(axis=0)):
            if np.isrealobj(M) and im[j] < 0:
                continue
            i = int(np.flatnonzero(inside[:, j])[-1])
            seeds.append((float(im[j]), float(re[i]), dre))

    best_re, best_im = -math.inf, 0.0
    for im0, re0, step in seeds:
        r = _rightmost(M, im0, re0, epsilon, step, refine_iters)
        if r > best_re:
            best_re, best_im = r, im0

    # polish in the imaginary direction around the winner
    anchor = best_re
    half = max(dim, step0)
    lo, hi = best_im - half, best_im + half

    def f(y):
        if _smin(M, anchor + 1j * y) >= epsilon:
            return -math.inf
        return _rightmost(M, y, anchor, epsilon, step0, refine_iters)

    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = hi - g * (hi - lo), lo + g * (hi - lo)
    fa, fb = f(a), f(b)
    for _ in range(40):
        if fa > fb:
            hi, b, fb = b, a, fa
            a = hi - g * (hi - lo)
            fa = f(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + g * (hi - lo)
            fb = f(b)
    return max(best_re, fa, fb)


# --------------------------------------------------------------------------
# structured perturbations


def calibrate_epsilon(p: ConstitutiveParams, w: WaveConfig | None, mode, target_param: str,
                      rel: float) -> float:
    """``||A(p with target * (1 + rel)) - A(p)||_2``: size of a relative parameter error in A."""
    if target_param not in CALIBRATION_PARAMS:
        raise KeyError(f"cannot calibrate on {target_param!r}; choose from {CALIBRATION_PARAMS}")
    if rel < 0:
        raise ValueError("relative variation must be nonnegative")
    mode = SelfActionMode.parse(mode)
    base = assemble_system(mode, p, w)
    if rel == 0:
        return 0.0
    value = p.value_of(target_param)
    moved = assemble_system(mode, p.with_value(target_param, value * (1.0 + rel)), w)
    return norm2(moved.A - base.A)


@dataclass(frozen=True, eq=False)
class StructuredCloud:
    """Eigenvalues of ``A + E_k`` for ``n_samples`` structured perturbations.

    ``eigenvalues`` has shape ``(n_samples, n)``; ``norms[k] = ||E_k||_2``.
    """

    epsilon: float
    n_samples: int
    seed: int
    sampling: str
    eigenvalues: np.ndarray
    norms: np.ndarray
    matrix_hash: str = ""
    unstable_tol: float = 0.0
    sample_max_real: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        smr = (self.eigenvalues.real.max(axis=1) if self.eigenvalues.size
               else np.empty(0))
        object.__setattr__(self, "sample_max_real", smr)

    @property
    def max_real_part(self) -> float:
        return float(self.sample_max_real.max())

    @property
    def unstable_fraction(self) -> float:
        return float(np.mean(self.sample_max_real > self.unstable_tol))

    @property
    def points(self) -> np.ndarray:
        return self.eigenvalues.ravel()


def structured_samples(A: SystemMatrix, epsilon: float, n_samples: int = 400, seed: int = 0,
                       sampling: str = "boundary", jobs: int | None = None,
                       unstable_tol: float = 0.0) -> StructuredCloud:
    """Monte-Carlo structured pseudospectrum of a 9x9 evolution matrix.

    Every sample draws three 3x3 standard-normal matrices from its own
    stream ``SeedSequence(seed, spawn_key=(k,))``, symmetrises them and
    builds ``E`` with blocks ``E1/rho, E2/rho`` in the velocity rows and
    ``E2/varsigma, E3/varsigma`` in the phason rows.  ``E`` is rescaled to
    ``||E||_2 = r * 0.999 * epsilon`` with ``r = 1`` for ``sampling="boundary"``
    and ``r ~ U(0, 1]`` for ``sampling="ball"``.
    """
    if not isinstance(A, SystemMatrix) or A.n != 9:
        raise ValueError("structured sampling needs a 9x9 system with phason friction")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if sampling not in ("boundary", "ball"):
        raise ValueError(f"unknown sampling mode {sampling!r}")
    G = np.empty((n_samples, 3, 3, 3))
    r = np.ones(n_samples)
    for k in range(n_samples):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
        G[k] = rng.standard_normal((3, 3, 3))
        if sampling == "ball":
            r[k] = 1.0 - rng.random()
    p = A.params
    E, norms = _kernels.structured_perturbations(G, p.rho, p.varsigma,
                                                 r * BOUNDARY_FRACTION * epsilon)
    lam = _kernels.perturbed_eigvals(A.A, E, jobs)
    order = np.lexsort((-lam.imag, -lam.real), axis=-1)
    lam = np.take_along_axis(lam, order, axis=1)
    return StructuredCloud(epsilon=float(epsilon), n_samples=n_samples, seed=int(seed),
                           sampling=sampling, eigenvalues=lam, norms=norms,
                           matrix_hash=A.matrix_hash, unstable_tol=unstable_tol)
