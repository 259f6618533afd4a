import json
import math

from cotrans.report import MAX_WITNESSES, Report, render


def test_empty_report():
    assert render(Report("empty")) == "no checks run"


def test_passing_rows_ok():
    r = Report("pass")
    c = r.check("law")
    c.record(1e-12, True)
    c.record(3e-12, True)
    text = render(r)
    assert "law" in text and text.splitlines()[1].endswith("ok")
    assert r.passed and c.max_residual == 3e-12 and c.samples == 2


def test_failing_rows_first_with_witnesses():
    r = Report("mixed")
    r.check("fine").record(0.0, True)
    bad = r.check("broken")
    for i in range(MAX_WITNESSES + 3):
        bad.record(1.0, False, {"i": i})
    lines = render(r).splitlines()
    assert lines[1].startswith("broken") and lines[1].endswith("fail")
    assert lines[2].startswith("    witness: {'i': 0}")
    assert bad.failures == MAX_WITNESSES + 3 and len(bad.witnesses) == MAX_WITNESSES
    assert not r.passed and r.failing() == [bad]


def test_non_finite_residuals_serialize():
    r = Report("nan")
    r.check("x").record(math.nan, False)
    d = r.to_dict()
    assert d["checks"][0]["max_residual"] == "inf"
    json.dumps(d)
    assert "inf" in render(d)


def test_merge_prefixes():
    a, b = Report("a"), Report("b")
    b.check("law").record(0.0, True)
    b.extras["n"] = 1
    a.merge(b, prefix="sub ")
    assert a["sub law"].samples == 1 and a.extras == {"sub n": 1}
