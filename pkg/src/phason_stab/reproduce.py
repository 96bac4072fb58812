"""Recipes that recompute published reference numbers and compare them with stored expectations."""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .analysis import StructuredOptions, structured_onset, sweep, threshold_bisect
from .config import parse_param_value
from .model import SelfActionMode, assemble_system, params_from_mapping
from .normality import normality_report
from .pseudospectra import default_grid, default_margin, resolvent_grid

__all__ = ["Outcome", "load_expectations", "run_recipe", "run_all", "match_eigenvalues"]


@dataclass(frozen=True)
class Outcome:
    name: str
    passed: bool
    detail: str


def load_expectations(path=None) -> dict:
    if path is None:
        text = resources.files("phason_stab").joinpath("data/expectations.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def match_eigenvalues(computed, expected, re_tol: float, im_tol: float) -> float:
    """Greedy one-to-one matching; returns the worst error in units of the tolerances."""
    left = [complex(z) for z in computed]
    worst = 0.0
    for re, im in expected:
        errs = [max(abs(z.real - re) / re_tol, abs(z.imag - im) / im_tol) for z in left]
        k = int(np.argmin(errs))
        worst = max(worst, errs[k])
        left.pop(k)
    return worst


def _base(recipe):
    return params_from_mapping(recipe.get("params", {}))


def _spectrum_table(r) -> Outcome:
    values = [parse_param_value(r["param"], v) for v in r["values"]]
    res = sweep(r["mode"], _base(r), None, r["param"], values,
                allow_inadmissible=r.get("allow_inadmissible", False))
    worst = max(match_eigenvalues(rec.spectrum.eigenvalues, col, r["re_tol"], r["im_tol"])
                for rec, col in zip(res.records, r["columns"]))
    return Outcome(r["name"], worst <= 1.0, f"worst error {worst:.3f} x tolerance")


def _threshold(r) -> Outcome:
    lo, hi = (parse_param_value(r["param"], v) for v in r["bracket"])
    expect = parse_param_value(r["param"], r["expect"])
    tol = parse_param_value(r["param"], r["tol"])
    got = threshold_bisect(r["mode"], _base(r), None, r["param"], (lo, hi), tol=tol / 10)
    return Outcome(r["name"], abs(got - expect) <= tol,
                   f"threshold {got:.6g} vs {expect:.6g} (tol {tol:g})")


def _normality(r) -> Outcome:
    rep = normality_report(assemble_system(r["mode"], _base(r)).A)
    bad = []
    parts = []
    for key, (target, kind, tol) in r["expect"].items():
        got = getattr(rep, key)
        if isinstance(got, str):
            bad.append(key)
            continue
        err = abs(got - target) if kind == "abs" else abs(got - target) / abs(target)
        parts.append(f"{key}={got:.6g}")
        if err > tol:
            bad.append(key)
    return Outcome(r["name"], not bad, ", ".join(parts) + (f"; off: {bad}" if bad else ""))


def _containment(r) -> Outcome:
    A = assemble_system(r["mode"], _base(r))
    spec = default_grid(A, r["nx"], r["ny"]).with_re(0.0, default_margin(A))
    grid = resolvent_grid(A, spec)
    right = grid.re > 0
    smin = float(10.0 ** grid.values[right].min())
    return Outcome(r["name"], smin > r["epsilon"],
                   f"min s_min on Re z > 0 grid nodes = {smin:.3e} (epsilon {r['epsilon']:g})")


def _monotone_limit(r) -> Outcome:
    values = [parse_param_value(r["param"], v) for v in r["values"]]
    res = sweep(r["mode"], _base(r), None, r["param"], values)
    freqs = np.array([sorted({round(abs(z.imag), 9) for z in rec.spectrum.eigenvalues},
                             reverse=True) for rec in res.records])
    mono = bool(np.all(np.diff(freqs, axis=0) >= 0))
    err = float(np.max(np.abs(freqs[-1] - np.array(r["limits"]))))
    return Outcome(r["name"], mono and err <= r["tol"],
                   f"monotone={mono}, distance to limit {err:.3g} rad/s")


def _structured_onset(r) -> Outcome:
    p = r["param"]
    start, stop, step = (parse_param_value(p, r[k]) for k in ("start", "stop", "step"))
    values = start + step * np.arange(int(round((stop - start) / step)) + 1)
    lo, hi = (parse_param_value(p, v) for v in r["band"])
    onsets = []
    for seed in r["seeds"]:
        opts = StructuredOptions(rel=r["rel"], target=p, n_samples=r["n_samples"], seed=seed)
        onsets.append(structured_onset(r["mode"], _base(r), None, p, values, opts))
    found = [o for o in onsets if o is not None]
    inband = lambda x: x is not None and lo - 1e-9 * abs(hi) <= x <= hi + 1e-9 * abs(hi)
    if r["rule"] == "all":
        ok = all(inband(o) for o in onsets)
        stat = "all seeds"
    else:
        med = statistics.median([o if o is not None else math.inf for o in onsets])
        ok = inband(med)
        stat = f"median {med:.4g}"
    shown = ", ".join("none" if o is None else f"{o:.4g}" for o in onsets)
    return Outcome(r["name"], ok and len(found) > 0, f"onsets [{shown}], {stat}, band [{lo:g}, {hi:g}]")


_RUNNERS = {
    "spectrum_table": _spectrum_table,
    "threshold": _threshold,
    "normality": _normality,
    "containment": _containment,
    "monotone_limit": _monotone_limit,
    "structured_onset": _structured_onset,
}


def run_recipe(recipe: dict) -> Outcome:
    SelfActionMode.parse(recipe["mode"])
    return _RUNNERS[recipe["kind"]](recipe)


def run_all(expectations: dict, only=None, skip_slow: bool = False):
    for r in expectations["recipes"]:
        if only and r["name"] not in only:
            continue
        if skip_slow and r.get("slow"):
            continue
        yield run_recipe(r)
