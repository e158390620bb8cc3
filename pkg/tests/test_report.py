import json
from fractions import Fraction

import mpmath
import numpy as np

from mkpoly.report import SCHEMA, build_report, dumps_report, gram_csv, to_jsonable, write_text
from mkpoly.symlaurent import orbit_sum
from mkpoly.torus_measure import NoConvergence


def test_to_jsonable_numbers():
    assert to_jsonable(complex(1, 2)) == {"re": 1.0, "im": 2.0}
    assert to_jsonable(complex(3, 0)) == 3.0
    assert to_jsonable(Fraction(1, 4)) == 0.25
    assert to_jsonable(mpmath.mpf("0.5")) == 0.5
    assert to_jsonable(np.float64(2.5)) == 2.5
    assert to_jsonable(np.int64(7)) == 7
    assert to_jsonable(np.bool_(True)) is True
    assert to_jsonable(np.array([[1.0, 2.0]])) == [[1.0, 2.0]]
    assert to_jsonable({(1, 2): [Fraction(1, 2)]}) == {"(1, 2)": [0.5]}


def test_to_jsonable_polynomial():
    data = to_jsonable({"p": orbit_sum((1,))})
    assert data["p"]["rank"] == 1
    assert len(data["p"]["terms"]) == 2


def test_build_report_with_error():
    report = build_report("gram", {"max_deg": 3}, error=NoConvergence("still changing"))
    assert report["schema"] == SCHEMA
    assert report["passed"] is False
    assert report["error"] == {"type": "NoConvergence", "message": "still changing"}
    assert "result" not in report


def test_dumps_report_is_sorted_and_stable():
    report = build_report("spectrum", {"m": 2, "a": 1}, {"z": 1, "b": 2}, passed=True)
    text = dumps_report(report)
    assert text == dumps_report(json.loads(text))
    assert text.index('"command"') < text.index('"config"') < text.index('"passed"')
    assert json.loads(text)["passed"] is True


def test_gram_csv():
    text = gram_csv([(0,), (1,)], np.array([[1.0, 1e-13], [1e-13, 1.0]]))
    lines = text.splitlines()
    assert lines[0] == "label,0,1"
    assert lines[1].startswith("0,1.0,")
    assert len(lines) == 3


def test_gram_csv_quotes_multi_part_labels():
    text = gram_csv([(1, 0)], [[1.0]])
    assert text.splitlines() == ['label,"1,0"', '"1,0",1.0']


def test_write_text(tmp_path, capsys):
    target = tmp_path / "nested" / "report.json"
    write_text("hello\n", str(target))
    assert target.read_text() == "hello\n"
    write_text("to stdout\n", None)
    assert capsys.readouterr().out == "to stdout\n"
