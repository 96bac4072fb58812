"""Stability verdicts, parameter sweeps and threshold search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _accel
from .errors import BracketError, ConvergenceError, InadmissibleParametersError
from .matkernel import eig, expm_apply, sort_eigenvalues, sym3_eigvals
from .model import (
    ConstitutiveParams,
    SelfActionMode,
    SystemMatrix,
    Violation,
    WaveConfig,
    assemble_system,
    check_energy_positivity,
)
from .normality import NormalityReport, normality_report
from .pseudospectra import calibrate_epsilon, structured_samples

__all__ = [
    "Spectrum",
    "Verdict",
    "StabilityVerdict",
    "StructuredOptions",
    "SweepRecord",
    "SweepResult",
    "spectrum_of",
    "classify",
    "sweep",
    "threshold_bisect",
    "transient_envelope",
    "transient_check",
    "structured_onset",
    "CROSS_CHECK_TOL",
]

CLASSIFY_TOL = 1e-6
CROSS_CHECK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    source: SystemMatrix | None = None

    @property
    def spectral_abscissa(self) -> float:
        return float(np.max(self.eigenvalues.real))

    @property
    def real_eigenvalues(self) -> np.ndarray:
        """Eigenvalues with zero imaginary part, as reals (descending)."""
        lam = self.eigenvalues
        return lam[lam.imag == 0].real


def _pm_sqrt(mu: np.ndarray) -> np.ndarray:
    out = []
    for m in mu:
        r = math.sqrt(abs(m))
        out += [complex(r), complex(-r)] if m > 0 else [complex(0, r), complex(0, -r)]
    return np.array(out)


def spectrum_of(A: SystemMatrix) -> Spectrum:
    """Eigenvalues of the evolution matrix, sorted by descending real then imaginary part.

    For the 6x6 modes ``A^2 = diag(K, K)``, so the spectrum is the set of
    ``+-sqrt`` of the eigenvalues of the symmetric ``K``; that closed form is
    returned after a consistency check against the squared general
    eigenvalues of ``A``.
    """
    if A.n == 6:
        mu = sym3_eigvals(A.blocks["K"])
        lam = _pm_sqrt(mu)
        sq = np.sort((eig(A.A).eigenvalues ** 2).real)
        ref = np.sort(np.repeat(mu, 2))
        scale = float(np.max(np.abs(mu))) or 1.0
        gap = float(np.max(np.abs(sq - ref)))
        if gap > CROSS_CHECK_TOL * scale:
            raise ConvergenceError(f"closed-form spectrum disagrees with eig by {gap:.3e}")
        # exact zeros of Re/Im from the closed form are kept; sort for determinism
        lam = lam[sort_eigenvalues(lam)]
    else:
        lam = eig(A.A).eigenvalues
    return Spectrum(lam, A)


class Verdict(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class StabilityVerdict:
    kind: Verdict
    tol_abs: float
    abscissa: float
    witnesses: tuple = ()

    @property
    def table_label(self) -> str:
        return "stable (non-asymptotic)" if self.kind is Verdict.MARGINAL else self.kind.value


def classify(s: Spectrum, tol_abs: float = CLASSIFY_TOL) -> StabilityVerdict:
    a = s.spectral_abscissa
    if a > tol_abs:
        w = tuple(complex(l) for l in s.eigenvalues if l.real > tol_abs)
        return StabilityVerdict(Verdict.UNSTABLE, tol_abs, a, w)
    if a >= -tol_abs:
        return StabilityVerdict(Verdict.MARGINAL, tol_abs, a)
    return StabilityVerdict(Verdict.STABLE, tol_abs, a)


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class StructuredOptions:
    """Monte-Carlo settings; epsilon is ``rel`` relative change of ``target`` at each point."""

    rel: float = 0.05
    target: str = "chi"
    n_samples: int = 400
    seed: int = 0
    sampling: str = "boundary"
    q: float = 0.0


@dataclass(frozen=True, eq=False)
class SweepRecord:
    value: float
    params: ConstitutiveParams
    spectrum: Spectrum
    verdict: StabilityVerdict
    violations: tuple[Violation, ...] = ()
    normality: NormalityReport | None = None
    epsilon: float | None = None
    cloud_max_real: float | None = None
    cloud_unstable_fraction: float | None = None


@dataclass(frozen=True, eq=False)
class SweepResult:
    mode: SelfActionMode
    swept_param: str
    values: np.ndarray
    records: list[SweepRecord]
    wave: WaveConfig
    structured: StructuredOptions | None = None
    meta: dict = field(default_factory=dict)


def _check_monotone(values: np.ndarray):
    if values.size == 0:
        raise ValueError("sweep needs at least one value")
    if values.size > 1:
        d = np.diff(values)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("sweep values must be strictly monotone")


def _evaluate(mode, p, w, swept, value, normality, structured, allow_inadmissible, tol_abs):
    q = p.with_value(swept, value)
    violations = tuple(check_energy_positivity(q))
    if violations and not allow_inadmissible:
        raise InadmissibleParametersError(violations, (swept, value))
    A = assemble_system(mode, q, w)
    s = spectrum_of(A)
    rec = dict(value=float(value), params=q, spectrum=s, verdict=classify(s, tol_abs),
               violations=violations)
    if normality:
        rec["normality"] = normality_report(A.A)
    if structured is not None:
        eps = calibrate_epsilon(q, w, mode, structured.target, structured.rel)
        cloud = structured_samples(A, eps, structured.n_samples, structured.seed,
                                   structured.sampling)
        rec.update(epsilon=eps, cloud_max_real=cloud.max_real_part,
                   cloud_unstable_fraction=cloud.unstable_fraction)
    return SweepRecord(**rec)


def sweep(mode, base: ConstitutiveParams, wave: WaveConfig | None, swept: str, values, *,
          normality: bool = False, structured: StructuredOptions | None = None,
          allow_inadmissible: bool = False, tol_abs: float = CLASSIFY_TOL,
          jobs: int | None = None) -> SweepResult:
    """Spectrum and verdict (plus optional normality and cloud summary) per parameter value.

    ``values`` are SI and must be strictly monotone.  Points violating energy
    positivity raise :class:`InadmissibleParametersError` unless
    ``allow_inadmissible``; then the violations are kept in the record.
    """
    mode = SelfActionMode.parse(mode)
    wave = WaveConfig() if wave is None else wave
    values = np.atleast_1d(np.asarray(values, dtype=float))
    _check_monotone(values)

    def run(a, b):
        return [_evaluate(mode, base, wave, swept, v, normality, structured,
                          allow_inadmissible, tol_abs) for v in values[a:b]]

    chunks = _accel.map_chunks(run, values.size, jobs, min_chunk=1)
    records = [r for c in chunks for r in c]
    return SweepResult(mode, swept, values, records, wave, structured)


# --------------------------------------------------------------------------
# thresholds


def _indicator(mode, base, wave, swept, value, criterion, tol_abs) -> bool:
    q = base.with_value(swept, value)
    A = assemble_system(mode, q, wave)
    if criterion == "eigen":
        return classify(spectrum_of(A), tol_abs).kind is Verdict.UNSTABLE
    eps = calibrate_epsilon(q, wave, mode, criterion.target, criterion.rel)
    cloud = structured_samples(A, eps, criterion.n_samples, criterion.seed, criterion.sampling)
    return cloud.unstable_fraction > criterion.q


def threshold_bisect(mode, base: ConstitutiveParams, wave: WaveConfig | None, swept: str,
                     bracket: tuple[float, float], criterion="eigen", tol: float = 1e5,
                     tol_abs: float = CLASSIFY_TOL) -> float:
    """Bisect for the value where the stability indicator flips.

    ``criterion`` is ``"eigen"`` (verdict Unstable) or a
    :class:`StructuredOptions` (unstable fraction above ``q``, same seed at
    every evaluation).  ``tol`` is the final bracket width in the units of
    ``swept`` (default 1e5 Pa = 1e-4 GPa).  Energy positivity is not
    enforced: the eigen thresholds lie outside the admissible window.
    """
    mode = SelfActionMode.parse(mode)
    wave = WaveConfig() if wave is None else wave
    if criterion != "eigen" and not isinstance(criterion, StructuredOptions):
        raise ValueError(f"unknown criterion {criterion!r}")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    f_lo = _indicator(mode, base, wave, swept, lo, criterion, tol_abs)
    f_hi = _indicator(mode, base, wave, swept, hi, criterion, tol_abs)
    if f_lo == f_hi:
        state = "unstable" if f_lo else "stable"
        raise BracketError(f"{swept} in [{lo:g}, {hi:g}]: indicator is {state} at both ends")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _indicator(mode, base, wave, swept, mid, criterion, tol_abs) == f_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# dynamics


def transient_envelope(A, q0, t_grid) -> np.ndarray:
    """``||exp(t A) q0||_2 / ||q0||_2`` at every ``t`` in ``t_grid``."""
    M = A.A if isinstance(A, SystemMatrix) else np.asarray(A, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if not np.all(np.isfinite(t_grid)) or np.any(t_grid < 0):
        raise ValueError("times must be finite and nonnegative")
    n0 = np.linalg.norm(q0)
    if n0 == 0:
        raise ValueError("initial state must be nonzero")
    return np.array([np.linalg.norm(expm_apply(M, t, q0)) / n0 for t in t_grid])


def transient_check(A, q0, t_grid) -> float:
    """Largest amplification of ``q0`` over the time grid."""
    return float(np.max(transient_envelope(A, q0, t_grid)))


def structured_onset(mode, base: ConstitutiveParams, wave: WaveConfig | None, swept: str,
                     values, options: StructuredOptions | None = None) -> float | None:
    """First value in ``values`` whose structured cloud has an unstable sample.

    The scan runs in the given order and stops at the first hit; ``None``
    means no onset on the grid.  Epsilon is recalibrated at every point.
    """
    mode = SelfActionMode.parse(mode)
    options = StructuredOptions() if options is None else options
    for v in np.asarray(values, dtype=float):
        if _indicator(mode, base, wave, swept, float(v), options, CLASSIFY_TOL):
            return float(v)
    return None
