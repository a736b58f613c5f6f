import xml.etree.ElementTree as ET

import pytest

from evmcheck.svg import Series, _nice_ticks, render, write_svg


def test_render_is_valid_xml_with_legend():
    text = render([Series("one", [0, 1, 2], [1, 2, 3]), Series("two", [0, 1], [2, None], "dashed", True)],
                  "t", "x", "y")
    root = ET.fromstring(text)
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}polyline")) == 2
    labels = [t.text for t in root.findall(f"{ns}text")]
    assert "one" in labels and "two" in labels


def test_missing_values_break_lines():
    text = render([Series("gap", [0, 1, 2, 3, 4], [1, 2, None, 3, 4])], "t", "x", "y")
    assert text.count("<polyline") == 2


def test_nothing_to_plot():
    with pytest.raises(ValueError):
        render([Series("empty", [0, 1], [None, None])], "t", "x", "y")


def test_ticks_cover_range():
    ticks = _nice_ticks(0.05, 0.95)
    assert ticks[0] >= 0.05 and ticks[-1] <= 0.95 and len(ticks) >= 3
    assert _nice_ticks(5, 5)


def test_write_svg(tmp_path):
    p = write_svg(tmp_path / "a.svg", [Series("s", [0, 1], [0, 1])], "title & more", "x", "y")
    assert "title &amp; more" in p.read_text()
