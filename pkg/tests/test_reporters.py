"""
JSON and CSV rendering of results.
"""

import json

import numpy as np
import pytest

from mmclt.models import DyadicSeries
from mmclt.reporter.csv_out import format_cell, render_csv
from mmclt.reporter.json_out import dumps, envelope, to_jsonable


class TestJson:

    def test_non_finite_floats(self):
        assert to_jsonable([float("inf"), -float("inf"), float("nan")]) == ["inf", "-inf", "nan"]

    def test_numpy_values(self):
        data = to_jsonable({"a": np.arange(3), "b": np.float64(0.5), "c": np.bool_(True)})
        assert data == {"a": [0, 1, 2], "b": 0.5, "c": True}

    def test_models_and_sets(self):
        series = DyadicSeries(N=1.0, M=2.0, partial_sums=[0.5], tail=float("inf"))
        assert to_jsonable(series) == {"N": 1.0, "M": 2.0, "partial_sums": [0.5], "tail": "inf"}
        assert to_jsonable({3, 1, 2}) == [1, 2, 3]

    def test_unknown_type(self):
        with pytest.raises(TypeError):
            to_jsonable(object())

    def test_dumps_is_canonical(self):
        text = dumps({"b": 1, "a": [0.1, float("inf")]})
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [0.1, "inf"], "b": 1}

    def test_envelope_keys(self):
        env = envelope("validate", {"tol": 1e-9}, None, {}, {"ok": True})
        assert sorted(env) == ["command", "config", "inputs", "result", "seed", "tool"]


class TestCsv:

    @pytest.mark.parametrize(
        "value,expected",
        [(None, ""), (True, "true"), (np.bool_(False), "false"), (0.1, "0.10000000000000001"),
         (float("inf"), "inf"), (3, "3"), ("a", "a")],
    )
    def test_format_cell(self, value, expected):
        assert format_cell(value) == expected

    def test_render_with_header(self):
        assert render_csv([(0, 1.5), (1, None)], ["i", "v"]) == "i,v\n0,1.5\n1,\n"

    def test_render_without_header(self):
        assert render_csv([[0.0, 1.0]]) == "0,1\n"
