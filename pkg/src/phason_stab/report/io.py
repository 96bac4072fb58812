"""CSV and JSON emission for result objects (formats in docs/formats.md)."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from functools import singledispatch
from pathlib import Path

import numpy as np

from ..analysis import Spectrum, StabilityVerdict, SweepResult
from ..model import ConstitutiveParams, params_to_mapping
from ..normality import NormalityReport
from ..pseudospectra import GridSpec, PseudospectrumGrid, StructuredCloud
from .contours import ContourSet

__all__ = [
    "to_dict",
    "write_json",
    "write_csv",
    "read_json",
    "grid_from_dict",
    "cloud_from_dict",
    "fmt",
]

FORMAT_VERSION = 1


def fmt(x: float) -> str:
    """17 significant digits: enough to round-trip any float64."""
    return format(float(x), ".17g")


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _float(x):
    # JSON has no inf/nan; encode them as strings
    x = float(x)
    return x if math.isfinite(x) else str(x)


@singledispatch
def to_dict(obj) -> dict:
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"no serializer for {type(obj).__name__}")


@to_dict.register
def _(obj: NormalityReport) -> dict:
    return {"type": "normality", **obj.to_dict()}


@to_dict.register
def _(obj: Spectrum) -> dict:
    d = {"type": "spectrum", "eigenvalues": [_c(z) for z in obj.eigenvalues],
         "spectral_abscissa": obj.spectral_abscissa}
    if obj.source is not None:
        d["mode"] = obj.source.mode.value
        d["matrix_hash"] = obj.source.matrix_hash
    return d


@to_dict.register
def _(obj: PseudospectrumGrid) -> dict:
    return {
        "type": "pseudospectrum_grid",
        "spec": dataclasses.asdict(obj.spec),
        "matrix_hash": obj.matrix_hash,
        "log10_smin": [[_float(v) for v in row] for row in obj.values],
    }


@to_dict.register
def _(obj: StructuredCloud) -> dict:
    return {
        "type": "structured_cloud",
        "epsilon": obj.epsilon,
        "n_samples": obj.n_samples,
        "seed": obj.seed,
        "sampling": obj.sampling,
        "matrix_hash": obj.matrix_hash,
        "max_real_part": obj.max_real_part,
        "unstable_fraction": obj.unstable_fraction,
        "norms": [float(x) for x in obj.norms],
        "eigenvalues": [[_c(z) for z in row] for row in obj.eigenvalues],
    }


@to_dict.register
def _(obj: ContourSet) -> dict:
    return {
        "type": "contours",
        "levels": list(obj.levels),
        "paths": [[[_c(z) for z in line] for line in lines] for lines in obj.paths],
    }


def _verdict(v: StabilityVerdict) -> dict:
    return {"kind": v.kind.value, "label": v.table_label, "tol_abs": v.tol_abs,
            "abscissa": v.abscissa, "witnesses": [_c(z) for z in v.witnesses]}


@to_dict.register
def _(obj: SweepResult) -> dict:
    records = []
    for r in obj.records:
        rec = {
            "value": r.value,
            "params": params_to_mapping(r.params),
            "eigenvalues": [_c(z) for z in r.spectrum.eigenvalues],
            "spectral_abscissa": r.spectrum.spectral_abscissa,
            "verdict": _verdict(r.verdict),
            "violations": [dataclasses.asdict(v) for v in r.violations],
        }
        if r.normality is not None:
            rec["normality"] = r.normality.to_dict()
        if r.epsilon is not None:
            rec.update(epsilon=r.epsilon, cloud_max_real=r.cloud_max_real,
                       cloud_unstable_fraction=r.cloud_unstable_fraction)
        records.append(rec)
    return {
        "type": "sweep",
        "mode": obj.mode.value,
        "swept_param": obj.swept_param,
        "values": [float(v) for v in obj.values],
        "wave": {"k": obj.wave.k, "n": list(obj.wave.n)},
        "structured": dataclasses.asdict(obj.structured) if obj.structured else None,
        "records": records,
    }


@to_dict.register
def _(obj: ConstitutiveParams) -> dict:
    return {"type": "params", **params_to_mapping(obj)}


def _open(path, mode="w"):
    path = Path(path)
    try:
        return path.open(mode, newline="" if "w" in mode else None)
    except OSError as exc:
        raise OSError(f"cannot open {path}: {exc.strerror or exc}") from exc


def write_json(obj, path, meta: dict | None = None) -> Path:
    """Serialize ``obj``; ``meta`` (e.g. the effective run config) is stored under ``"meta"``."""
    d = {"format_version": FORMAT_VERSION, **(obj if isinstance(obj, dict) else to_dict(obj))}
    if meta is not None:
        d["meta"] = meta
    with _open(path) as fh:
        json.dump(d, fh, indent=1, sort_keys=False, allow_nan=False)
        fh.write("\n")
    return Path(path)


def read_json(path) -> dict:
    with _open(path, "r") as fh:
        return json.load(fh)


def _comments(fh, meta: dict | None, extra: dict | None = None):
    for key, value in (extra or {}).items():
        fh.write(f"# {key}={value}\n")
    if meta is not None:
        fh.write("# config=" + json.dumps(meta, sort_keys=True) + "\n")


@singledispatch
def _write_rows(obj, w, fh, meta):
    raise TypeError(f"no CSV writer for {type(obj).__name__}")


@_write_rows.register
def _(obj: PseudospectrumGrid, w, fh, meta):
    _comments(fh, meta, {"matrix_hash": obj.matrix_hash})
    w.writerow(["re\\im"] + [fmt(y) for y in obj.im])
    for x, row in zip(obj.re, obj.values):
        w.writerow([fmt(x)] + [fmt(v) for v in row])


@_write_rows.register
def _(obj: StructuredCloud, w, fh, meta):
    _comments(fh, meta, {"seed": obj.seed, "epsilon": fmt(obj.epsilon),
                         "n_samples": obj.n_samples, "sampling": obj.sampling,
                         "matrix_hash": obj.matrix_hash})
    w.writerow(["re", "im", "sample_index"])
    for k, row in enumerate(obj.eigenvalues):
        for z in row:
            w.writerow([fmt(z.real), fmt(z.imag), k])


@_write_rows.register
def _(obj: SweepResult, w, fh, meta):
    _comments(fh, meta, {"mode": obj.mode.value})
    n = len(obj.records[0].spectrum.eigenvalues) if obj.records else 0
    header = [obj.swept_param, "verdict", "spectral_abscissa", "n_violations"]
    header += [f"lam{j}_{part}" for j in range(n) for part in ("re", "im")]
    extra = []
    if obj.records and obj.records[0].normality is not None:
        extra += ["kappa2V", "dep_c", "dep_HF", "dist_lower", "dist_upper"]
    if obj.records and obj.records[0].epsilon is not None:
        extra += ["epsilon", "cloud_max_real", "cloud_unstable_fraction"]
    w.writerow(header + extra)
    for r in obj.records:
        row = [fmt(r.value), r.verdict.kind.value, fmt(r.spectrum.spectral_abscissa),
               len(r.violations)]
        for z in r.spectrum.eigenvalues:
            row += [fmt(z.real), fmt(z.imag)]
        if r.normality is not None:
            nr = r.normality
            k = nr.kappa2V if isinstance(nr.kappa2V, str) else fmt(nr.kappa2V)
            row += [k, fmt(nr.dep_c), fmt(nr.dep_HF), fmt(nr.dist_lower), fmt(nr.dist_upper)]
        if r.epsilon is not None:
            row += [fmt(r.epsilon), fmt(r.cloud_max_real), fmt(r.cloud_unstable_fraction)]
        w.writerow(row)


@_write_rows.register
def _(obj: Spectrum, w, fh, meta):
    _comments(fh, meta)
    w.writerow(["re", "im"])
    for z in obj.eigenvalues:
        w.writerow([fmt(z.real), fmt(z.imag)])


@_write_rows.register
def _(obj: ContourSet, w, fh, meta):
    _comments(fh, meta)
    w.writerow(["log10_eps", "path_index", "re", "im"])
    for eps, lines in obj:
        for k, line in enumerate(lines):
            for z in line:
                w.writerow([fmt(math.log10(eps)), k, fmt(z.real), fmt(z.imag)])


@_write_rows.register
def _(obj: NormalityReport, w, fh, meta):
    _comments(fh, meta)
    d = obj.to_dict()
    w.writerow(list(d))
    w.writerow([v if isinstance(v, (str, bool)) else fmt(v) for v in d.values()])


def write_csv(obj, path, meta: dict | None = None) -> Path:
    """CSV with one header row; metadata goes into leading ``#`` comment lines."""
    with _open(path) as fh:
        _write_rows(obj, csv.writer(fh, lineterminator="\n"), fh, meta)
    return Path(path)


def grid_from_dict(d: dict) -> PseudospectrumGrid:
    values = np.array([[float(v) for v in row] for row in d["log10_smin"]])
    return PseudospectrumGrid(GridSpec(**d["spec"]), values, d["matrix_hash"])


def cloud_from_dict(d: dict) -> StructuredCloud:
    lam = np.array([[complex(*z) for z in row] for row in d["eigenvalues"]])
    return StructuredCloud(epsilon=d["epsilon"], n_samples=d["n_samples"], seed=d["seed"],
                           sampling=d["sampling"], eigenvalues=lam,
                           norms=np.array(d["norms"]), matrix_hash=d["matrix_hash"])
