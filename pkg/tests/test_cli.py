import json

import pytest

from patchlens.cli import main, render_tables_text
from patchlens.tracealign import table_from_dict

from helpers import CORPUS

BUG = str(CORPUS / "bug05_midpoint_overflow")


def test_analyze_json(tmp_path, capsys):
    out = tmp_path / "tables.json"
    assert main(["analyze", "--bug", BUG, "--out", str(out)]) == 0
    tables = json.loads(out.read_text())
    assert tables
    for t in tables:
        table_from_dict(t)  # conforms to the documented schema
    assert tables[0]["frame"] == "midpoint"


def test_analyze_text_color_tags(tmp_path):
    out = tmp_path / "tables.txt"
    assert main(["analyze", "--bug", BUG, "--format", "text", "--out", str(out)]) == 0
    text = out.read_text()
    assert "[R]" in text
    assert "[G1]" in text


def test_rank_text(capsys):
    assert main(["rank", "--bug", BUG]) == 0
    out = capsys.readouterr().out
    assert "representatives" in out
    assert "distance" in out


def test_gen_reproduces_bundled_patches(tmp_path):
    out = tmp_path / "patches.json"
    assert main(["gen", "--bug", BUG, "--out", str(out)]) == 0
    generated = json.loads(out.read_text())
    bundled = json.loads((CORPUS / "bug05_midpoint_overflow" / "patches.json").read_text())
    assert {p["replacement"] for p in generated} == {p["replacement"] for p in bundled}


def test_rank_with_patches_override(tmp_path, capsys):
    override = tmp_path / "patches.json"
    assert main(["gen", "--bug", BUG, "--out", str(override)]) == 0
    assert main(["rank", "--bug", BUG, "--patches", str(override)]) == 0
    out = capsys.readouterr().out
    assert "representatives" in out


def test_gen_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["gen", "--bug", BUG, "--seed", "77", "--out", str(a)]) == 0
    assert main(["gen", "--bug", BUG, "--seed", "77", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_eval_report(tmp_path):
    out = tmp_path / "report.json"
    assert main(["eval", "--corpus", str(CORPUS), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert set(report["means"]) == {"original", "similarity_only", "ifix"}
    assert len(report["per_bug"]) >= 10


def test_eval_byte_identical_runs(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    main(["eval", "--corpus", str(CORPUS), "--out", str(a)])
    main(["eval", "--corpus", str(CORPUS), "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_analyze_text_matches_golden(tmp_path):
    out = tmp_path / "tables.txt"
    bug = str(CORPUS / "bug09_reliability_condition")
    assert main(["analyze", "--bug", bug, "--format", "text", "--out", str(out)]) == 0
    golden = CORPUS.parent / "tests" / "golden" / "bug09_tables.txt"
    assert out.read_text() == golden.read_text()


def test_analyze_byte_identical_runs(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["analyze", "--bug", BUG, "--out", str(a)]) == 0
    assert main(["analyze", "--bug", BUG, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_missing_bug_dir_is_domain_error(capsys):
    assert main(["rank", "--bug", "does/not/exist"]) == 1
    assert "error:" in capsys.readouterr().err


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_render_tables_text_marks_occurrences():
    data = {
        "frame": "f",
        "frame_index": 0,
        "columns": ["buggy", "p1"],
        "rows": [{
            "line": 7,
            "occurrence": 2,
            "occurrence_count": 3,
            "display_name": "pos",
            "kind": "var-def",
            "values": ["3", None],
            "merge_spans": [[0, 0], [1, 1]],
            "colors": ["red", "neutral"],
            "nav_target": {"file": "x.mini", "line": 7},
        }],
    }
    text = render_tables_text([table_from_dict(data)])
    assert "7#2" in text
    assert "—" in text
    assert "[R]3" in text
