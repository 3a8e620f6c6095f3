import json
import math

import numpy as np
import pytest

from pssmp_limits.path_engine import GridPath, JumpDriftPath
from pssmp_limits.report_writer import path_rows, render_csv, render_json, write_text


def test_render_json_handles_numpy_and_non_finite():
    report = {
        "b": np.float64(1.5),
        "a": [np.int64(2), math.inf, -math.inf, math.nan],
        "c": np.array([0.25, np.inf]),
        "d": np.bool_(True),
    }
    text = render_json(report)
    decoded = json.loads(text)
    assert decoded == {"a": [2, "inf", "-inf", "nan"], "b": 1.5, "c": [0.25, "inf"], "d": True}
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")


def test_render_csv_uses_repr_for_floats():
    text = render_csv([{"v": 0.1, "n": np.int64(3)}, {"v": 1.0 / 3.0, "n": 4}])
    lines = text.splitlines()
    assert lines[0] == "v,n"
    assert lines[1] == "0.1,3"
    assert float(lines[2].split(",")[0]) == 1.0 / 3.0


def test_render_csv_empty():
    assert render_csv([]) == ""
    assert render_csv([], header=["a", "b"]) == "a,b\n"


def test_write_text_is_atomic(tmp_path):
    target = tmp_path / "nested" / "report.json"
    write_text("{}\n", str(target))
    assert target.read_text() == "{}\n"
    assert [p.name for p in target.parent.iterdir()] == ["report.json"]


def test_write_text_stdout(capsys):
    write_text("hello\n", "-")
    assert capsys.readouterr().out == "hello\n"


def test_path_rows():
    grid = path_rows(GridPath(0.5, [0.0, 1.0, 2.5]))
    assert grid[-1] == {"t": 1.0, "xi": 2.5}
    jumps = path_rows(JumpDriftPath(0.25, [1.0, 2.0], [0.5, 0.75], 3.0))
    assert jumps[1] == {"time": 2.0, "size": 0.75, "drift": 0.25, "horizon": 3.0}
    with pytest.raises(TypeError):
        path_rows(object())
