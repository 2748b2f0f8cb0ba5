import json

import pytest

from gazekit.cli import main
from gazekit.ingest import GAZE_LOG_HEADER


@pytest.fixture
def log_file(tmp_path):
    rows = [GAZE_LOG_HEADER]
    t = 0
    for cx, cy in ((100, 100), (900, 600), (400, 300), (1200, 200)):
        for _ in range(30):
            rows.append(f"{t},{cx},{cy},1")
            t += 10
    path = tmp_path / "gaze.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


@pytest.fixture
def pipeline(tmp_path, log_file):
    rec = tmp_path / "rec.json"
    fix = tmp_path / "fix.csv"
    assert main(["ingest", str(log_file), "--screen", "1366x768", "-o", str(rec)]) == 0
    assert main(["fixate", str(rec), "-o", str(fix)]) == 0
    return tmp_path, rec, fix


def test_ingest_writes_recording(pipeline):
    _, rec, _ = pipeline
    doc = json.loads(rec.read_text())
    assert doc["screen"] == {"width": 1366, "height": 768}
    assert len(doc["samples"]) == 120


def test_fixate_writes_csv(pipeline):
    _, _, fix = pipeline
    lines = fix.read_text().strip().splitlines()
    assert lines[0] == "cx_px,cy_px,onset_ms,duration_ms,n"
    assert len(lines) == 5  # header + 4 fixations


def test_cluster_sweep(pipeline):
    tmp, _, fix = pipeline
    out = tmp / "model.json"
    assert main(["cluster", str(fix), "--method", "kmeans", "--sweep", "2..4",
                 "--seed", "3", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [e["k"] for e in doc["table"]] == [2, 3, 4]
    assert doc["model"]["k"] in (2, 3, 4)
    assert doc["model"]["config"]["seed"] == 3


def test_cluster_fixed_k_em(pipeline):
    tmp, _, fix = pipeline
    out = tmp / "model.json"
    assert main(["cluster", str(fix), "--method", "em", "--k", "2", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["model"]["method"] == "em"
    assert len(doc["model"]["weights"]) == 2


def test_sequence_report(pipeline, tmp_path):
    tmp, _, fix = pipeline
    meta = tmp_path / "meta.json"
    meta.write_text(json.dumps({"aoi": [{"name": "band", "rect": [0, 0, 1366, 350]}]}))
    out = tmp / "seq.json"
    assert main(["sequence", str(fix), "--screen", "1366x768", "--aoi", str(meta),
                 "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["first_region"] == "top-left"
    assert len(doc["labels"]) == 4
    assert doc["aoi_ratios"]["band"] == 0.75  # (100,100), (400,300), (1200,200) in band


def test_render_all_layers(pipeline):
    tmp, _, fix = pipeline
    png = tmp / "heat.png"
    assert main(["render", "heatmap", str(fix), "--screen", "1366x768", "-o", str(png)]) == 0
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    for layer in ("gazeplot", "scatter"):
        out = tmp / f"{layer}.svg"
        assert main(["render", layer, str(fix), "--screen", "1366x768", "-o", str(out)]) == 0
        assert out.read_bytes().startswith(b"<svg ")


def test_render_window_and_gradient(pipeline):
    tmp, _, fix = pipeline
    out = tmp / "scatter.svg"
    assert main(["render", "scatter", str(fix), "--screen", "1366x768",
                 "--window", "0,350", "--low", "0000ff", "-o", str(out)]) == 0
    data = out.read_bytes()
    assert data.count(b"<circle") == 2
    assert b"#0000ff" in data


def test_stats_commands(tmp_path, capsys):
    table = tmp_path / "groups.csv"
    table.write_text("6,8,4,5,3,4\n8,12,9,11,6,8\n13,9,11,8,7,12\n")
    assert main(["stats", "anova", str(table)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["f"] == pytest.approx(315 / 34, rel=1e-9)

    matrix = tmp_path / "matrix.csv"
    matrix.write_text("3,5,4\n6,8,7\n2,3,5\n")
    assert main(["stats", "rmanova", str(matrix)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["f"] == pytest.approx(25 / 7, rel=1e-9)
    assert (doc["df1"], doc["df2"]) == (2, 4)

    pairs = tmp_path / "pairs.csv"
    pairs.write_text("1,2\n2,4\n3,6\n4,8\n")
    assert main(["stats", "corr", str(pairs)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["r"] == 1.0


def test_error_reported_as_json(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("wrong,header\n1,2,3,4\n")
    assert main(["ingest", str(bad), "--screen", "100x100"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["code"] == "SchemaError"
