import csv
import io
from fractions import Fraction

import pytest

from conftest import reachable_instances
from orsched.core import build_instance
from orsched.io import dumps_instance
from orsched.report import COLUMNS, RatioReportRow, build_report, decimal12, max_ratio, report_csv, worker_count

POLICIES = ["lpt", "input", "random:1"]


def _corpus(path, instances):
    path.mkdir(exist_ok=True)
    for k, inst in enumerate(instances):
        (path / f"inst{k:03d}.json").write_text(dumps_instance(inst), encoding="utf-8")
    return path


def _parse(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_two_machine_corpus(tmp_path, monkeypatch):
    monkeypatch.setenv("ORSCHED_THREADS", "1")
    insts = reachable_instances(31, 200, n_max=6, m_choices=(2,), p_max=4, r_max=5)
    rows = build_report(_corpus(tmp_path / "c", insts), POLICIES)
    assert len(rows) == 600 and all(r.status == "ok" for r in rows)
    assert max_ratio(rows) <= Fraction(3, 2)
    assert not any(r.violates for r in rows)
    parsed = _parse(report_csv(rows))
    assert list(parsed[0].keys()) == COLUMNS
    for row, cells in zip(rows, parsed):
        assert Fraction(int(cells["ratio_num"]), int(cells["ratio_den"])) == row.ratio
        assert cells["bound"] == "1.5"


def test_single_machine_corpus_is_exact(tmp_path, monkeypatch):
    monkeypatch.setenv("ORSCHED_THREADS", "1")
    insts = reachable_instances(32, 40, n_max=6, m_choices=(1,), p_max=4, r_max=5)
    rows = build_report(_corpus(tmp_path / "c", insts), POLICIES)
    assert {r.ratio for r in rows} == {1}


def test_empty_corpus(tmp_path):
    (tmp_path / "c").mkdir()
    rows = build_report(tmp_path / "c", POLICIES)
    assert rows == [] and max_ratio(rows) is None
    assert report_csv(rows) == ",".join(COLUMNS) + "\n"


def test_skipped_and_infeasible_rows(tmp_path, monkeypatch):
    monkeypatch.setenv("ORSCHED_THREADS", "1")
    big = build_instance(2, [(f"j{i}", 1, 0) for i in range(9)])
    cyc = build_instance(2, [("a", 1, 0), ("b", 1, 0)], [("a", "b"), ("b", "a")])
    rows = build_report(_corpus(tmp_path / "c", [big, cyc]), ["lpt"])
    assert [r.status for r in rows] == ["skipped", "infeasible"]
    cells = _parse(report_csv(rows))
    assert cells[0]["ratio"] == "" and cells[0]["bound"] == ""


def test_parallel_matches_serial(tmp_path, monkeypatch):
    insts = reachable_instances(33, 12, n_max=6, m_choices=(2, 3), p_max=4, r_max=5)
    corpus = _corpus(tmp_path / "c", insts)
    monkeypatch.setenv("ORSCHED_THREADS", "1")
    serial = report_csv(build_report(corpus, POLICIES))
    monkeypatch.setenv("ORSCHED_THREADS", "3")
    assert report_csv(build_report(corpus, POLICIES)) == serial


def test_worker_cap(monkeypatch):
    monkeypatch.setenv("ORSCHED_THREADS", "1")
    assert worker_count() == 1
    monkeypatch.setenv("ORSCHED_THREADS", "lots")
    with pytest.raises(ValueError):
        worker_count()


def test_violation_flag_and_decimals():
    row = RatioReportRow("x", 2, 2, "lpt", "ok", opt=Fraction(2), ls=Fraction(4))
    assert row.ratio == 2 and row.violates
    assert decimal12(Fraction(1, 3)) == "0.333333333333"
    assert decimal12(Fraction(2, 3)) == "0.666666666667"
