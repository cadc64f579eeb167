from __future__ import annotations

import csv
import json

import pytest

from safeplan.report import load_report_records, write_report


def _record(category, **kw):
    base = {"category": category, "t_v": None, "failed_action_index": None,
            "n_sat": 0, "n_total": 3, "executed_steps": 0, "message": "m"}
    base.update(kw)
    return base


@pytest.fixture()
def records():
    return [
        _record("c5", n_sat=3),
        _record("c1"),
        _record("c2", t_v=2, executed_steps=2),
        _record("c4", n_sat=1, executed_steps=4, l_ref=8),
    ]


def test_write_report_emits_csv_and_figures(records, tmp_path):
    paths = write_report(records, tmp_path, default_l_ref=4)
    assert paths["summary"].name == "summary.csv"
    with paths["summary"].open() as handle:
        rows = list(csv.DictReader(handle))
    assert [row["category"] for row in rows] == ["c5", "c1", "c2", "c4"]
    assert float(rows[0]["reward"]) == 1.0
    assert float(rows[1]["reward"]) == -1.0
    assert abs(float(rows[2]["reward"]) - (-0.75)) < 1e-9  # -0.9 + 0.3*(2/4)
    # per-record l_ref wins over the default
    assert rows[3]["l_ref"] == "8"
    for key in ("categories", "rewards"):
        assert paths[key].suffix == ".png"
        assert paths[key].stat().st_size > 1000


def test_missing_l_ref_is_an_error(records, tmp_path):
    with pytest.raises(ValueError, match="l_ref"):
        write_report([_record("c5", n_sat=3)], tmp_path)


def test_jsonl_loader_skips_blank_lines():
    text = json.dumps(_record("c5", n_sat=3)) + "\n\n" + json.dumps(_record("c1"))
    assert len(load_report_records(text)) == 2


def test_report_cli_end_to_end(records, tmp_path, capsys):
    from safeplan.cli import main

    reports = tmp_path / "reports.jsonl"
    reports.write_text("\n".join(json.dumps(r) for r in records))
    out_dir = tmp_path / "figs"
    code = main(["report", str(reports), "--out", str(out_dir),
                 "--l-ref", "4"])
    assert code == 0
    out = capsys.readouterr().out
    assert "summary" in out
    assert (out_dir / "summary.csv").exists()
    assert (out_dir / "categories.png").exists()
    assert (out_dir / "rewards.png").exists()
