import pytest

from ctpe.svgplot import plot_curve_svg


def _rows(n=10):
    return [(2**i, 10.0 / 2**i, 0.1, 4) for i in range(n)]


def test_plot_writes_markers(tmp_path):
    out = tmp_path / "curve.svg"
    plot_curve_svg(_rows(10), str(out), title="decay")
    text = out.read_text()
    assert text.startswith("<svg")
    assert text.count("<circle") == 10
    assert "decay" in text


def test_plot_guide_line(tmp_path):
    out = tmp_path / "curve.svg"
    plot_curve_svg(_rows(8), str(out), guide_slope=-1.0)
    text = out.read_text()
    assert "stroke-dasharray" in text
    assert "slope -1.000" in text


def test_plot_rejects_empty():
    with pytest.raises(ValueError, match="no data rows"):
        plot_curve_svg([], "/tmp/never.svg")


def test_plot_rejects_nonpositive():
    with pytest.raises(ValueError, match="positive"):
        plot_curve_svg([(1, 0.0, 0.0, 1), (2, 1.0, 0.0, 1)], "/tmp/never.svg")
