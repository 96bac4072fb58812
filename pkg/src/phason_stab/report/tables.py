"""Plain-text tables with one column per parameter value, eigenvalues down the rows."""

from __future__ import annotations

from ..analysis import SweepResult

__all__ = ["format_eigenvalue", "format_table"]

_UNIT = {"chi": ("GPa", 1e9), "alpha": ("GPa", 1e9), "lambda": ("GPa", 1e9), "mu": ("GPa", 1e9),
         "zeta": ("GPa", 1e9), "gamma": ("GPa", 1e9), "k0": ("GPa/m^2", 1e9),
         "varsigma": ("GPa*s/m^2", 1e9), "phi": ("", 1.0), "rho": ("kg/m^3", 1.0)}


def format_eigenvalue(z: complex, digits: int = 2) -> str:
    re, im = z.real, z.imag
    if im == 0:
        return f"{re:+.{digits}f}" if abs(re) >= 10.0 ** -digits else f"{re:+.{digits}e}"
    body = f"{abs(im):.{digits}f}i"
    if re == 0:
        return ("-" if im < 0 else "") + body
    rs = f"{re:.{digits}f}" if abs(re) >= 10.0 ** -digits else f"{re:.1e}"
    return f"{rs}{'-' if im < 0 else '+'}{body}"


def format_table(result: SweepResult, digits: int = 2) -> str:
    unit, scale = _UNIT.get(result.swept_param, ("SI", 1.0))
    head = f"{result.swept_param} [{unit}]" if unit else result.swept_param
    cols = [[f"{v / scale:g}"] for v in result.values]
    for col, rec in zip(cols, result.records):
        col += [format_eigenvalue(z, digits) for z in rec.spectrum.eigenvalues]
        col.append(rec.verdict.table_label)
    rows = [head] + ["sigma(A) [rad/s]"] + [""] * (len(cols[0]) - 3) + ["verdict"]
    widths = [max(len(s) for s in c) for c in cols]
    wl = max(len(r) for r in rows)
    lines = []
    for k, label in enumerate(rows):
        cells = [c[k].rjust(w) for c, w in zip(cols, widths)]
        lines.append(label.ljust(wl) + " | " + " | ".join(cells))
        if k == 0:
            lines.append("-" * len(lines[-1]))
    return "\n".join(lines) + "\n"
