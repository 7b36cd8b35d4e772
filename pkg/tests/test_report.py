from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from mmas.report import csv_header, dumps, line_plot, verdict_timeline


def test_csv_header_layout():
    assert ",".join(csv_header(3)) == "t,beta,r,phi,phidot,beta_hat,r_hat,phi_hat,phidot_hat,w_1,w_2,w_3,inclusion"


def test_dumps_sorted_and_nan_safe():
    s = dumps({"b": float("nan"), "a": np.float64(1.5), "c": [np.inf, -np.inf]})
    assert json.loads(s) == {"a": 1.5, "b": "NaN", "c": ["Infinity", "-Infinity"]}
    assert s.index('"a"') < s.index('"b"')


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50))
def test_line_plot_is_wellformed_svg(ys):
    t = np.arange(len(ys), dtype=float)
    svg = line_plot("t", t, [("y", np.array(ys))])
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert svg == line_plot("t", t, [("y", np.array(ys))])


def test_line_plot_thins_long_series():
    t = np.linspace(0, 1, 10_001)
    svg = line_plot("t", t, [("y", np.sin(t))])
    pts = svg.split('points="')[1].split('"')[0].split()
    assert len(pts) <= 2001


def test_timeline_bands():
    svg = verdict_timeline(np.arange(6.0), np.array([1, 1, 0, -1, -1, 1]))
    ET.fromstring(svg)
    assert svg.count("#d62728") == 2  # one band plus legend swatch
    assert not math.isnan(len(svg))
