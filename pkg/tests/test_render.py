import re

import pytest

from qcap.render import ChartSpec, Series, preset_spec, read_columns, render_chart, render_svg


def _write_csv(path, text):
    path.write_text(text)
    return str(path)


BASIC = "x,a,b\n0,0.1,0.9\n1,0.2,0.8\n2,0.3,0.7\n3,0.4,0.6\n"


def _spec(csv_path, out="out.svg", series=None):
    series = series or (Series("a", "solid", "series a"),
                        Series("b", "dotted", "series b"))
    return ChartSpec(csv_path, "x", tuple(series), "x", "y", (0.0, 1.0), out)


def test_svg_deterministic(tmp_path):
    path = _write_csv(tmp_path / "d.csv", BASIC)
    spec = _spec(path, out=str(tmp_path / "d.svg"))
    first = render_svg(spec)
    second = render_svg(spec)
    assert first == second
    render_chart(spec)
    render_chart(ChartSpec(path, "x", spec.series, "x", "y", (0.0, 1.0),
                           str(tmp_path / "d2.svg")))
    assert (tmp_path / "d.svg").read_bytes() == (tmp_path / "d2.svg").read_bytes()


def test_polyline_point_counts(tmp_path):
    path = _write_csv(tmp_path / "c.csv", BASIC)
    svg = render_svg(_spec(path))
    polylines = re.findall(r'<polyline points="([^"]+)"', svg)
    assert len(polylines) == 2
    for pts in polylines:
        assert len(pts.split()) == 4  # one vertex per non-empty row


def test_gap_breaks_polyline(tmp_path):
    text = "x,a\n0,0.1\n1,\n2,0.3\n3,0.4\n4,nan\n5,0.6\n6,0.7\n"
    path = _write_csv(tmp_path / "g.csv", text)
    svg = render_svg(_spec(path, series=(Series("a", "dashed", "a"),)))
    polylines = re.findall(r'<polyline points="([^"]+)"', svg)
    circles = re.findall(r"<circle ", svg)
    # runs: [0], [0.3, 0.4], [0.6, 0.7] -> one marker and two 2-point lines
    assert len(polylines) == 2
    assert all(len(p.split()) == 2 for p in polylines)
    assert len(circles) == 1


def test_single_row_renders_markers_only(tmp_path):
    path = _write_csv(tmp_path / "s.csv", "x,a,b\n1.5,0.25,0.5\n")
    svg = render_svg(_spec(path))
    assert "<polyline" not in svg
    assert svg.count("<circle") == 2
    assert svg.startswith("<?xml")


def test_missing_column_error_names_column(tmp_path):
    path = _write_csv(tmp_path / "m.csv", "x,a\n0,1\n")
    with pytest.raises(ValueError, match="'b'"):
        render_svg(_spec(path))


def test_non_numeric_cell_error_reports_line(tmp_path):
    path = _write_csv(tmp_path / "n.csv", "x,a,b\n0,0.1,0.9\n1,oops,0.8\n")
    with pytest.raises(ValueError, match="line 3"):
        render_svg(_spec(path))


def test_styles_validated():
    with pytest.raises(ValueError, match="style"):
        Series("a", "wavy", "a")


def test_y_range_validated(tmp_path):
    path = _write_csv(tmp_path / "y.csv", BASIC)
    with pytest.raises(ValueError):
        ChartSpec(path, "x", (Series("a", "solid", "a"),), "x", "y",
                  (1.0, 1.0), "out.svg")
    with pytest.raises(ValueError):
        ChartSpec(path, "x", (Series("a", "solid", "a"),), "x", "y",
                  (0.0, float("inf")), "out.svg")


def test_dash_patterns_in_output(tmp_path):
    path = _write_csv(tmp_path / "p.csv", BASIC)
    svg = render_svg(_spec(path, series=(Series("a", "dotted", "a"),
                                         Series("b", "dashed", "b"))))
    assert 'stroke-dasharray="2,5"' in svg
    assert 'stroke-dasharray="9,6"' in svg


def test_read_columns_gap_semantics(tmp_path):
    path = _write_csv(tmp_path / "r.csv", "x,a\n0,1\n1,\n2,nan\n3,4\n")
    data = read_columns(path, ["x", "a"])
    assert data["a"] == [1.0, None, None, 4.0]


def test_presets(tmp_path):
    rows = ["x,lambda_t1,lambda_t2,lambda_t3,norm_AB,norm_AinvBinv,c_unital,"
            "c_lower_raw,c_upper_raw,c_lower,c_upper,c_chi"]
    rows += [f"{x},0,0,0,1,1,0.5,0.2,0.8,0.2,0.8,0.5" for x in (0.1, 0.2, 0.3)]
    path = _write_csv(tmp_path / "sweep.csv", "\n".join(rows) + "\n")
    for name, xlabel in (("fig1", "gamma t"), ("fig2", "p")):
        spec = preset_spec(name, path, str(tmp_path / f"{name}.svg"))
        svg = render_svg(spec)
        assert xlabel in svg
        assert svg.count("<polyline") == 3
    with pytest.raises(ValueError):
        preset_spec("fig3", path, "x.svg")
