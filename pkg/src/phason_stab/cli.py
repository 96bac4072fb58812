"""Command-line front end: ``phason-stab <command> [options]``.

Every command accepts ``--config run.json`` plus flags that override it.
Dimensional flags need units (``--chi 0.05GPa``).  Exit codes: 0 success,
1 configuration error, 2 energy admissibility failure, 3 numerical or
bracket failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from . import _accel
from .analysis import classify, spectrum_of, sweep, threshold_bisect
from .config import (
    DEFAULTS,
    RunSettings,
    load_config,
    merge,
    param_dimension,
    parse_param_value,
    validate,
)
from .errors import (
    BracketError,
    ConfigError,
    ConvergenceError,
    InadmissibleParametersError,
    SaturationError,
    SingularConfigurationError,
)
from .model import assemble_system, check_energy_positivity, require_admissible
from .pseudospectra import (
    CoarseGridWarning,
    calibrate_epsilon,
    default_grid,
    default_margin,
    imaginary_axis_margin,
    pseudo_abscissa,
    resolvent_grid,
    structured_samples,
)
from .report import (
    AxesConfig,
    default_levels,
    extract_contours,
    format_table,
    render_svg,
    write_csv,
    write_json,
)
from .reproduce import load_expectations, run_all
from .units import SI_UNIT

EXIT_OK, EXIT_CONFIG, EXIT_ADMISSIBILITY, EXIT_NUMERICAL = 0, 1, 2, 3

_PARAM_FLAGS = ("lambda", "mu", "chi", "alpha", "zeta", "gamma", "k0", "varsigma", "rho",
                "k1", "k2", "k2p", "k3", "k3p")


# --------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("model")
    g.add_argument("--config", type=Path, help="JSON run configuration")
    g.add_argument("--mode", choices=["none", "conservative", "dissipative", "complete"])
    for name in _PARAM_FLAGS:
        g.add_argument(f"--{name}", metavar="QTY", help=f"{name} with unit, e.g. 0.1GPa")
    g.add_argument("--phi", type=float, help="log of phason friction: varsigma = exp(phi) Pa*s/m^2")
    g.add_argument("--k", dest="wavenumber", metavar="QTY", help="wavenumber, e.g. 1rad/m")
    g.add_argument("--n", dest="direction", type=float, nargs=3, metavar=("X", "Y", "Z"),
                   help="propagation direction (normalised)")
    g.add_argument("--allow-inadmissible", action="store_true", default=None,
                   help="evaluate points that violate energy positivity")
    g.add_argument("--jobs", type=int, help="worker threads (default: $PHASON_STAB_JOBS or 1)")
    g.add_argument("--backend", choices=["numba", "numpy"], help="kernel backend")
    o = p.add_argument_group("output")
    o.add_argument("--out", type=Path, help="directory for CSV/JSON/SVG output")
    o.add_argument("--prefix", help="file name prefix (default 'run')")


def _structured_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("structured sampling")
    g.add_argument("--epsilon", type=float, help="perturbation size (default: calibrated)")
    g.add_argument("--rel", type=float, help="relative parameter change used for calibration")
    g.add_argument("--target", help="parameter used for calibration (default chi)")
    g.add_argument("--samples", type=int, help="number of perturbed matrices")
    g.add_argument("--seed", type=int)
    g.add_argument("--sampling", choices=["boundary", "ball"])
    g.add_argument("--q", type=float, help="unstable fraction that counts as unstable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phason-stab",
        description="Spectral and pseudospectral stability of quasicrystal plane waves.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="energy positivity of the parameter point")
    _common(p)

    p = sub.add_parser("spectrum", help="eigenvalues, verdict and normality measures")
    _common(p)

    p = sub.add_parser("pseudospectrum", help="resolvent grid, contours and SVG")
    _common(p)
    p.add_argument("--re", nargs=2, metavar=("LO", "HI"), help="real range, e.g. -10rad/s 10rad/s")
    p.add_argument("--im", nargs=2, metavar=("LO", "HI"), help="imaginary range")
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--levels", type=float, nargs="+", help="epsilon levels (descending)")
    p.add_argument("--containment-eps", type=float, dest="containment_epsilon")
    p.add_argument("--right-half-only", action="store_true", default=None,
                   help="restrict the default window to 0 <= Re z <= margin")

    p = sub.add_parser("structured", help="Monte-Carlo structured pseudospectrum")
    _common(p)
    _structured_flags(p)

    p = sub.add_parser("sweep", help="spectra over a parameter grid")
    _common(p)
    _structured_flags(p)
    p.add_argument("--param", help="parameter to vary")
    p.add_argument("--values", nargs="+", help="values with units (phi: bare numbers)")
    p.add_argument("--normality", action="store_true", default=None)
    p.add_argument("--structured", action="store_true", default=None,
                   help="add a structured cloud summary per point")

    p = sub.add_parser("threshold", help="bisection for the onset of instability")
    _common(p)
    _structured_flags(p)
    p.add_argument("--param")
    p.add_argument("--bracket", nargs=2, metavar=("LO", "HI"))
    p.add_argument("--tol", help="bracket width to stop at, with units")
    p.add_argument("--criterion", choices=["eigen", "structured"])

    p = sub.add_parser("reproduce", help="recompute stored reference results and compare")
    p.add_argument("--expectations", type=Path, help="expectation file (default: bundled)")
    p.add_argument("--only", nargs="+", help="recipe names to run")
    p.add_argument("--skip-slow", action="store_true", help="skip Monte-Carlo recipes")
    p.add_argument("--jobs", type=int)
    p.add_argument("--backend", choices=["numba", "numpy"])
    return parser


def _overrides(args) -> dict:
    """Translate flags into a config fragment (``None`` means not given)."""
    a = vars(args)
    params = {k: a[k] for k in _PARAM_FLAGS if a.get(k) is not None}
    if a.get("phi") is not None:
        params["phi"] = a["phi"]
    cfg = {
        "mode": a.get("mode"),
        "params": params,
        "wave": {"k": a.get("wavenumber"), "n": a.get("direction")},
        "allow_inadmissible": a.get("allow_inadmissible"),
        "jobs": a.get("jobs"),
        "output": {"dir": str(a["out"]) if a.get("out") else None, "prefix": a.get("prefix")},
        "grid": {"re": a.get("re"), "im": a.get("im"), "nx": a.get("nx"), "ny": a.get("ny")},
        "pseudospectrum": {"levels": a.get("levels"),
                           "containment_epsilon": a.get("containment_epsilon"),
                           "right_half_only": a.get("right_half_only")},
        "structured": {"epsilon": a.get("epsilon"), "rel": a.get("rel"), "target": a.get("target"),
                       "n_samples": a.get("samples"), "seed": a.get("seed"),
                       "sampling": a.get("sampling"), "q": a.get("q")},
        "sweep": {"param": a.get("param"), "values": a.get("values"),
                  "normality": a.get("normality"), "structured": a.get("structured")},
        "threshold": {"param": a.get("param"), "bracket": a.get("bracket"), "tol": a.get("tol"),
                      "criterion": a.get("criterion")},
    }
    return cfg


def _numeric_strings(values):
    # sweep/threshold values on the command line arrive as strings; bare numbers stay numbers
    out = []
    for v in values:
        try:
            out.append(float(v))
        except (TypeError, ValueError):
            out.append(v)
    return out


def effective_config(args) -> dict:
    file_cfg = load_config(args.config) if getattr(args, "config", None) else {}
    flags = _overrides(args)
    # friction given one way on the command line replaces the other form from the file
    fp = file_cfg.get("params", {})
    if "phi" in flags["params"] and "varsigma" in fp:
        fp = {k: v for k, v in fp.items() if k != "varsigma"}
    if "varsigma" in flags["params"] and "phi" in fp:
        fp = {k: v for k, v in fp.items() if k != "phi"}
    file_cfg = {**file_cfg, "params": fp}
    for sect in ("sweep", "threshold"):
        for key in ("values", "bracket", "tol"):
            v = flags[sect].get(key)
            if isinstance(v, list):
                flags[sect][key] = _numeric_strings(v)
            elif isinstance(v, str):
                flags[sect][key] = _numeric_strings([v])[0]
    cfg = merge(merge(DEFAULTS, file_cfg), flags)
    return validate(cfg)


# --------------------------------------------------------------------------
# commands


def _emit(settings: RunSettings, name: str, obj, csv: bool = True):
    out = settings.raw["output"]["dir"]
    if not out:
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    stem = f"{settings.raw['output']['prefix']}_{name}"
    write_json(obj, d / f"{stem}.json", meta=settings.raw)
    if csv:
        write_csv(obj, d / f"{stem}.csv", meta=settings.raw)


def _write_text(settings: RunSettings, name: str, text: str):
    out = settings.raw["output"]["dir"]
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{settings.raw['output']['prefix']}_{name}").write_text(text)


def _gate(s: RunSettings):
    s.require_friction()
    require_admissible(s.params, s.allow_inadmissible)


def cmd_check(s: RunSettings) -> int:
    violations = check_energy_positivity(s.params)
    d = s.params.derived
    print(f"derived: xi={d.xi:.6g} Pa, alpha={d.alpha:.6g} Pa, zeta={d.zeta:.6g} Pa, "
          f"gamma={d.gamma:.6g} Pa, chi={d.chi:.6g} Pa")
    if not violations:
        print("admissible: all energy positivity conditions hold")
        return EXIT_OK
    for v in violations:
        print(v)
    return EXIT_ADMISSIBILITY


def cmd_spectrum(s: RunSettings) -> int:
    _gate(s)
    A = assemble_system(s.mode, s.params, s.wave)
    spec = spectrum_of(A)
    verdict = classify(spec, s.classify_tol)
    res = sweep(s.mode, s.params, s.wave, "chi", [s.params.derived.chi],
                normality=A.n == 9, allow_inadmissible=True, tol_abs=s.classify_tol)
    print(format_table(res), end="")
    print(f"spectral abscissa: {spec.spectral_abscissa:.6g} 1/s ({verdict.table_label})")
    if A.n == 9:
        rep = res.records[0].normality
        print(f"normality: kappa2(V)={rep.kappa2V if isinstance(rep.kappa2V, str) else f'{rep.kappa2V:.6g}'}, "
              f"dep_c={rep.dep_c:.6g}, dep_HF={rep.dep_HF:.6g}, "
              f"distance in [{rep.dist_lower:.6g}, {rep.dist_upper:.6g}]")
    _emit(s, "spectrum", res)
    return EXIT_OK


def cmd_pseudospectrum(s: RunSettings) -> int:
    _gate(s)
    A = assemble_system(s.mode, s.params, s.wave)
    ps = s.raw["pseudospectrum"]
    spec = s.grid()
    if spec is None:
        g = s.raw["grid"]
        spec = default_grid(A, g["nx"], g["ny"])
        if ps["right_half_only"]:
            spec = spec.with_re(0.0, default_margin(A))
    grid = resolvent_grid(A, spec, s.jobs)
    levels = ps.get("levels") or default_levels()
    contours = extract_contours(grid, sorted(levels, reverse=True))
    lam = spectrum_of(A).eigenvalues
    eps = ps["containment_epsilon"]
    right = grid.re > 0
    print(f"grid: {spec.nx} x {spec.ny} over Re [{spec.re_min:.6g}, {spec.re_max:.6g}], "
          f"Im [{spec.im_min:.6g}, {spec.im_max:.6g}] rad/s")
    if right.any():
        smin_right = float(10.0 ** grid.values[right].min())
        inside = smin_right < eps
        print(f"min s_min over grid nodes with Re z > 0: {smin_right:.6g} "
              f"({'reaches' if inside else 'no node of'} the {eps:g}-pseudospectrum"
              f"{'' if inside else ' in Re z > 0'})")
    else:
        print("no grid node with Re z > 0")
    margin, omega = imaginary_axis_margin(A)
    print(f"imaginary-axis margin: min_w s_min(iw - A) = {margin:.6g} at w = {omega:.6g} rad/s")
    with warnings.catch_warnings():
        # eigenvalue seeds cover the case where no grid node is inside
        warnings.simplefilter("ignore", CoarseGridWarning)
        alpha_eps = pseudo_abscissa(A, eps, grid=grid)
    print(f"pseudospectral abscissa at epsilon={eps:g}: {alpha_eps:.6g} 1/s")
    _emit(s, "grid", grid)
    _emit(s, "contours", contours)
    title = f"{s.mode.value}: complex pseudospectrum"
    _write_text(s, "pseudospectrum.svg",
                render_svg(contours, lam, None,
                           AxesConfig(re_range=(spec.re_min, spec.re_max),
                                      im_range=(spec.im_min, spec.im_max), title=title)))
    return EXIT_OK


def _epsilon(s: RunSettings) -> float:
    if s.epsilon is not None:
        return float(s.epsilon)
    o = s.structured
    return calibrate_epsilon(s.params, s.wave, s.mode, o.target, o.rel)


def cmd_structured(s: RunSettings) -> int:
    _gate(s)
    A = assemble_system(s.mode, s.params, s.wave)
    eps = _epsilon(s)
    o = s.structured
    cloud = structured_samples(A, eps, o.n_samples, o.seed, o.sampling, s.jobs)
    print(f"epsilon={eps:.6g} seed={o.seed} samples={o.n_samples} sampling={o.sampling}")
    print(f"max real part: {cloud.max_real_part:.6g} 1/s")
    print(f"unstable fraction: {cloud.unstable_fraction:.4g}")
    _emit(s, "cloud", cloud)
    lam = spectrum_of(A).eigenvalues
    _write_text(s, "structured.svg",
                render_svg(None, lam, cloud.points,
                           AxesConfig(title=f"{s.mode.value}: structured cloud, eps={eps:.4g}")))
    return EXIT_OK


def cmd_sweep(s: RunSettings) -> int:
    sw = s.raw["sweep"]
    if "param" not in sw or "values" not in sw:
        raise ConfigError("sweep needs 'param' and 'values'")
    s.require_friction(sw["param"])
    values = [parse_param_value(sw["param"], v) for v in sw["values"]]
    res = sweep(s.mode, s.params, s.wave, sw["param"], values, normality=sw["normality"],
                structured=s.structured if sw["structured"] else None,
                allow_inadmissible=s.allow_inadmissible, tol_abs=s.classify_tol, jobs=s.jobs)
    print(format_table(res), end="")
    for r in res.records:
        if r.epsilon is not None:
            print(f"{sw['param']}={r.value:.6g}: epsilon={r.epsilon:.6g}, cloud max Re={r.cloud_max_real:.6g}, "
                  f"unstable fraction={r.cloud_unstable_fraction:.4g}")
    _emit(s, "sweep", res)
    return EXIT_OK


def cmd_threshold(s: RunSettings) -> int:
    t = s.raw["threshold"]
    if "param" not in t or "bracket" not in t:
        raise ConfigError("threshold needs 'param' and 'bracket'")
    name = t["param"]
    s.require_friction(name)
    lo, hi = (parse_param_value(name, v) for v in t["bracket"])
    tol = parse_param_value(name, t["tol"]) if "tol" in t else 1e-4 * abs(hi - lo)
    crit = "eigen" if t["criterion"] == "eigen" else s.structured
    value = threshold_bisect(s.mode, s.params, s.wave, name, (lo, hi), crit, tol, s.classify_tol)
    seed = "" if crit == "eigen" else f" (structured, seed {s.structured.seed})"
    dim = param_dimension(name)
    unit = SI_UNIT[dim] if dim else ""
    print(f"threshold {name} = {value:.8g} {unit}{seed}".replace("  ", " "))
    _write_text(s, "threshold.json", json.dumps({"param": name, "value": value, "config": s.raw},
                                                indent=1) + "\n")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    exp = load_expectations(args.expectations)
    failures = 0
    for outcome in run_all(exp, only=args.only, skip_slow=args.skip_slow):
        print(f"{'PASS' if outcome.passed else 'FAIL'} {outcome.name}: {outcome.detail}", flush=True)
        failures += not outcome.passed
    return EXIT_OK if failures == 0 else EXIT_NUMERICAL


_COMMANDS = {
    "check": cmd_check,
    "spectrum": cmd_spectrum,
    "pseudospectrum": cmd_pseudospectrum,
    "structured": cmd_structured,
    "sweep": cmd_sweep,
    "threshold": cmd_threshold,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "backend", None):
            _accel.set_backend(args.backend)
        if args.command == "reproduce":
            if args.jobs:
                os.environ["PHASON_STAB_JOBS"] = str(args.jobs)
            return cmd_reproduce(args)
        cfg = effective_config(args)
        print("# config: " + json.dumps(cfg, sort_keys=True))
        settings = RunSettings(cfg)
        return _COMMANDS[args.command](settings)
    except (ConfigError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InadmissibleParametersError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except (BracketError, ConvergenceError, SaturationError, SingularConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
