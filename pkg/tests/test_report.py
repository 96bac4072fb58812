from __future__ import annotations

import csv
import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from phason_stab.analysis import StructuredOptions, spectrum_of, sweep
from phason_stab.model import GPA, assemble_system, quasicrystal_params
from phason_stab.normality import normality_report
from phason_stab.pseudospectra import GridSpec, PseudospectrumGrid, default_grid, resolvent_grid, structured_samples
from phason_stab.report import (
    PALETTE,
    AxesConfig,
    cloud_from_dict,
    default_levels,
    extract_contours,
    format_table,
    grid_from_dict,
    make_transform,
    read_json,
    render_svg,
    write_csv,
    write_json,
)


def field_grid(f, spec):
    re, im = spec.re, spec.im
    return PseudospectrumGrid(spec, f(re[:, None] + 1j * im[None, :]), "test")


def data_rows(path):
    lines = path.read_text().splitlines()
    return [l for l in lines if not l.startswith("#")], [l for l in lines if l.startswith("#")]


# -- contours ------------------------------------------------------------------


def test_default_levels():
    lv = default_levels(4)
    np.testing.assert_allclose(np.log10(lv), [-0.75, -1.5, -2.25, -3.0])


def test_constant_grid_no_contours():
    g = field_grid(lambda z: np.zeros(z.shape), GridSpec(-1, 1, -1, 1, 10, 10))
    cs = extract_contours(g, [10.0, 1.0, 0.1])
    assert all(lines == [] for lines in cs.paths)


def test_circle_contour():
    z0 = 0.3 - 0.2j
    spec = GridSpec(-2, 2, -2, 2, 201, 201)
    g = field_grid(lambda z: np.log10(np.abs(z - z0)), spec)
    cell = math.hypot(4 / 200, 4 / 200)
    for eps in (1.0, 0.5, 0.1):
        (lines,) = extract_contours(g, [eps]).paths
        assert len(lines) == 1
        line = lines[0]
        assert np.max(np.abs(np.abs(line - z0) - eps)) <= 2 * cell
        assert abs(line[0] - line[-1]) <= cell


def test_vertices_on_cell_edges():
    spec = GridSpec(-2, 2, -2, 2, 41, 41)
    g = field_grid(lambda z: np.log10(np.abs(z) + 1e-3), spec)
    (lines,) = extract_contours(g, [0.7]).paths
    dx = 4 / 40
    for z in np.concatenate(lines):
        on_v = abs((z.real + 2) / dx - round((z.real + 2) / dx)) < 1e-9
        on_h = abs((z.imag + 2) / dx - round((z.imag + 2) / dx)) < 1e-9
        assert on_v or on_h


def test_saddle_resolution():
    # two wells: a level above the saddle gives one curve, below gives two
    spec = GridSpec(-2, 2, -1, 1, 81, 41)
    with np.errstate(divide="ignore"):
        # the wells sit on grid nodes, exercising the -inf sentinel too
        g = field_grid(lambda z: np.log10(np.abs(z - 1) * np.abs(z + 1)), spec)
    assert len(extract_contours(g, [2.0]).paths[0]) == 1
    assert len(extract_contours(g, [0.5]).paths[0]) == 2


def test_level_validation():
    g = field_grid(lambda z: np.abs(z), GridSpec(-1, 1, -1, 1, 5, 5))
    with pytest.raises(ValueError):
        extract_contours(g, [0.1, 1.0])
    with pytest.raises(ValueError):
        extract_contours(g, [-1.0])


def test_out_of_range_level_empty():
    g = field_grid(lambda z: np.abs(z), GridSpec(-1, 1, -1, 1, 5, 5))
    assert extract_contours(g, [1e-20]).paths == [[]]


def _inside_polygon(pt, poly):
    x, y = pt.real, pt.imag
    inside = False
    for a, b in zip(poly, np.roll(poly, -1)):
        if (a.imag > y) != (b.imag > y):
            xc = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if x < xc:
                inside = not inside
    return inside


def test_nested_levels_on_dissipative_grid(dissipative_A):
    g = resolvent_grid(dissipative_A, default_grid(dissipative_A, 80, 80))
    levels = [10.0 ** (-0.75 * j) for j in range(-5, 0)]
    cs = extract_contours(g, levels)
    # a smaller level's sublevel set lies inside the larger one's: nodes agree
    for a, b in zip(levels, levels[1:]):
        assert np.all(g.inside(a) | ~g.inside(b))
    # closed inner curves lie inside some outer curve
    for outer, inner in zip(cs.paths, cs.paths[1:]):
        closed = [l for l in outer if abs(l[0] - l[-1]) < 1e-12]
        for line in inner:
            if closed:
                assert any(_inside_polygon(line[0], c) for c in closed)


# -- SVG -----------------------------------------------------------------------


def test_empty_svg_valid():
    root = ET.fromstring(render_svg())
    assert root.tag.endswith("svg")


def test_svg_deterministic(dissipative_A):
    g = resolvent_grid(dissipative_A, default_grid(dissipative_A, 40, 40))
    cs = extract_contours(g, default_levels(4))
    lam = spectrum_of(dissipative_A).eigenvalues
    cloud = structured_samples(dissipative_A, 3000.0, 20, seed=1)
    a = render_svg(cs, lam, cloud.points, AxesConfig(title="x"))
    b = render_svg(cs, lam, cloud.points, AxesConfig(title="x"))
    assert a == b
    root = ET.fromstring(a)
    ns = "{http://www.w3.org/2000/svg}"
    assert root.find(f".//{ns}line[@id='imag-axis']").get("stroke-dasharray")
    assert len(root.findall(f".//{ns}path[@class='eig']")) == 9
    assert len(root.findall(f".//{ns}circle")) == 20 * 9
    colours = {p.get("stroke") for p in root.findall(f".//{ns}polyline")}
    assert colours <= set(PALETTE)


def test_svg_unstable_markers():
    s = spectrum_of(assemble_system("none", quasicrystal_params(chi=1.7 * GPA)))
    axes = AxesConfig(re_range=(-500, 500), im_range=(-7000, 7000))
    svg = render_svg(None, s.eigenvalues, None, axes)
    T = make_transform(axes, [])
    for x0 in (365.64, -365.64):
        x, y = T(complex(x0, 0))
        assert f"M{x - 4:.2f},{y - 4:.2f}" in svg


# -- files ---------------------------------------------------------------------


def test_sweep_json_round_trip(tmp_path):
    res = sweep("dissipative", quasicrystal_params(phi=19), None, "chi",
                np.array([0.1, 0.5]) * GPA, normality=True,
                structured=StructuredOptions(n_samples=10))
    path = write_json(res, tmp_path / "s.json", meta={"cmd": "sweep"})
    back = read_json(path)
    assert back["meta"] == {"cmd": "sweep"}
    assert back["records"][1]["verdict"]["kind"] == res.records[1].verdict.kind.value
    lam = np.array([complex(*z) for z in back["records"][0]["eigenvalues"]])
    np.testing.assert_array_equal(lam, res.records[0].spectrum.eigenvalues)
    again = json.loads(json.dumps(back))
    assert again == back


def test_sweep_csv_rows(tmp_path):
    res = sweep("none", quasicrystal_params(), None, "chi", np.array([0.1, 0.2, 0.3]) * GPA)
    rows, comments = data_rows(write_csv(res, tmp_path / "s.csv", meta={"a": 1}))
    assert len(rows) == len(res.records) + 1
    header = next(csv.reader([rows[0]]))
    assert header[:4] == ["chi", "verdict", "spectral_abscissa", "n_violations"]
    assert any(c.startswith("# config=") for c in comments)
    first = next(csv.reader([rows[1]]))
    assert float(first[0]) == res.values[0]


def test_grid_csv_and_json(tmp_path, dissipative_A):
    g = resolvent_grid(dissipative_A, default_grid(dissipative_A, 12, 9))
    rows, comments = data_rows(write_csv(g, tmp_path / "g.csv"))
    assert len(rows) == 12 + 1
    assert all(len(next(csv.reader([r]))) == 9 + 1 for r in rows)
    assert comments == [f"# matrix_hash={dissipative_A.matrix_hash}"]
    back = grid_from_dict(read_json(write_json(g, tmp_path / "g.json")))
    np.testing.assert_array_equal(back.values, g.values)
    assert back.spec == g.spec


def test_grid_json_inf_sentinel(tmp_path):
    g = resolvent_grid(np.diag([0.0, 1.0]), GridSpec(0, 1, -1, 1, 2, 3))
    assert np.isneginf(g.values[0, 1])
    back = grid_from_dict(read_json(write_json(g, tmp_path / "g.json")))
    assert np.isneginf(back.values[0, 1])


def test_cloud_csv_header_and_round_trip(tmp_path, dissipative_A):
    c = structured_samples(dissipative_A, 2000.0, 5, seed=11)
    rows, comments = data_rows(write_csv(c, tmp_path / "c.csv"))
    assert "# seed=11" in comments
    assert any(l.startswith("# epsilon=2000") for l in comments)
    assert len(rows) == 5 * 9 + 1
    z = complex(*map(float, next(csv.reader([rows[1]]))[:2]))
    assert z == c.eigenvalues[0, 0]
    back = cloud_from_dict(read_json(write_json(c, tmp_path / "c.json")))
    np.testing.assert_array_equal(back.eigenvalues, c.eigenvalues)
    assert back.seed == 11


def test_normality_and_contour_outputs(tmp_path, dissipative_A):
    rep = normality_report(dissipative_A.A)
    rows, _ = data_rows(write_csv(rep, tmp_path / "n.csv"))
    assert len(rows) == 2
    g = resolvent_grid(dissipative_A, default_grid(dissipative_A, 30, 30))
    cs = extract_contours(g, default_levels(3))
    d = read_json(write_json(cs, tmp_path / "c.json"))
    assert d["type"] == "contours" and len(d["paths"]) == 3
    rows, _ = data_rows(write_csv(cs, tmp_path / "c.csv"))
    assert rows[0] == "log10_eps,path_index,re,im"


def test_write_errors_carry_path(tmp_path):
    with pytest.raises(OSError, match="missing"):
        write_json({"a": 1}, tmp_path / "missing" / "x.json")


def test_seventeen_digits(tmp_path):
    s = spectrum_of(assemble_system("none", quasicrystal_params(chi=0.3 * GPA)))
    rows, _ = data_rows(write_csv(s, tmp_path / "s.csv"))
    vals = [float(x) for r in rows[1:] for x in r.split(",")]
    np.testing.assert_array_equal(vals, [p for z in s.eigenvalues for p in (z.real, z.imag)])


def test_table_layout():
    res = sweep("none", quasicrystal_params(), None, "chi", np.array([0.05, 1.7]) * GPA,
                allow_inadmissible=True)
    text = format_table(res)
    assert "chi [GPa]" in text
    assert "+365.64" in text
    assert "6492.24i" in text
    assert "stable (non-asymptotic)" in text and "unstable" in text
