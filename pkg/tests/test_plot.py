import xml.etree.ElementTree as ET

import pytest

from nrmselect.experiment import SweepRow
from nrmselect.plot import emit_plot, render_svg

NS = {"s": "http://www.w3.org/2000/svg"}


def _row(lam, rank, bound=None):
    return SweepRow(lam, bound, rank, 0.0, 1.0)


def _parse(svg):
    return ET.fromstring(svg.encode())


def test_single_row(tmp_path):
    path = tmp_path / "one.svg"
    emit_plot([_row(1.0, 2, 3)], path)
    root = ET.parse(path).getroot()
    assert len(root.findall(".//s:g[@id='solved-points']/s:circle", NS)) == 1
    assert len(root.findall(".//s:g[@id='certificates']/s:path", NS)) == 1


def test_monotone_data_gives_nonincreasing_steps():
    rows = [_row(l, r) for l, r in [(0.5, 4), (1.0, 3), (2.0, 3), (3.0, 1), (4.0, 0)]]
    root = _parse(render_svg(rows, lambda_max=4.0))
    pts = root.find(".//s:polyline[@id='solved-rank']", NS).get("points").split()
    xy = [tuple(map(float, p.split(","))) for p in pts]
    xs = [x for x, _ in xy]
    ys = [y for _, y in xy]
    assert xs == sorted(xs)
    # svg y grows downward, so nonincreasing rank means nondecreasing y
    assert ys == sorted(ys)
    assert len(xy) == 2 * len(rows) - 1


def test_no_certificates_omits_layer():
    root = _parse(render_svg([_row(1.0, 2), _row(2.0, 1)]))
    assert root.find(".//s:g[@id='certificates']", NS) is None


def test_sequence_lines():
    root = _parse(render_svg([_row(1.0, 2), _row(3.0, 0)], lambda_max=3.5,
                             boundaries=[("lambda_2", 2.0), ("lambda_3", 99.0)]))
    lines = root.findall(".//s:g[@id='sequence']/s:line", NS)
    # out-of-range boundary skipped, lambda_max drawn
    assert len(lines) == 2


def test_empty_rows_rejected():
    with pytest.raises(ValueError):
        render_svg([])


def test_rendering_is_deterministic():
    rows = [_row(0.1 * i, 5 - i // 2, 6) for i in range(1, 10)]
    assert render_svg(rows, 1.0) == render_svg(list(reversed(rows)), 1.0)
