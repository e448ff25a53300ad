from stkde.evaluation import CurvePoint, PAICurve
from stkde.plotting import plot_pai_curves


def _curve(scale):
    return PAICurve(tuple(CurvePoint(float(k), k, k * scale / 100, scale, k < 8) for k in range(1, 11)))


def test_png_written_and_reproducible(tmp_path):
    curves = {"stkde": _curve(3.0), "skde": _curve(2.0), "custom": _curve(1.0)}
    a = plot_pai_curves(curves, tmp_path / "a" / "pai.png", title="t")
    b = plot_pai_curves(curves, tmp_path / "b.png", title="t")
    assert a.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert a.read_bytes() == b.read_bytes()
