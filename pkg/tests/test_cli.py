"""End-to-end tests of the command-line interface."""

import json

import pytest

from heliocast.cli import main


def test_generate_row_count(tmp_path, capsys):
    out = tmp_path / "synth.csv"
    assert main(["generate", "--days", "1", "--seed", "7", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 289  # header + 24*12 records
    assert lines[0] == "timestamp,irradiance_wm2,temperature_k"


def test_generate_is_idempotent(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    main(["generate", "--days", "2", "--seed", "3", "--out", str(a)])
    main(["generate", "--days", "2", "--seed", "3", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_summarize_prints_table(capsys):
    assert main(["summarize"]) == 0
    out = capsys.readouterr().out
    assert "Month" in out and "Irradiance" in out and "Temperature" in out
    assert "count" in out and "50%" in out
    assert "seasons:" in out


def test_correlate_writes_matrix(tmp_path):
    out = tmp_path / "corr.csv"
    assert main(["correlate", "--out", str(out), "--features", "temp,hour"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",temperature,hour,irradiance"
    assert len(lines) == 4


def test_train_then_export_plots(tmp_path):
    data = tmp_path / "data.csv"
    main(["generate", "--days", "2", "--seed", "5", "--out", str(data)])
    model = tmp_path / "gbr.hcm"
    assert main(["train", "--model", "gbr", "--data", str(data), "--out", str(model)]) == 0
    assert model.exists()
    payload = json.loads(model.read_text())
    assert payload["kind"] == "gbr"
    assert payload["trained_at"] is None
    assert payload["metrics"]["scope"] == "train"

    plot = tmp_path / "plot.csv"
    assert (
        main(
            [
                "export-plots",
                "--model",
                str(model),
                "--data",
                str(data),
                "--day",
                "2020-05-02",
                "--out",
                str(plot),
            ]
        )
        == 0
    )
    lines = plot.read_text().splitlines()
    assert lines[0] == "timestamp,actual_wm2,predicted_wm2,temperature_k"
    assert len(lines) == 289


def test_train_is_idempotent(tmp_path):
    a = tmp_path / "a.hcm"
    b = tmp_path / "b.hcm"
    main(["train", "--model", "tree", "--out", str(a)])
    main(["train", "--model", "tree", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_evaluate_writes_reports_and_is_deterministic(tmp_path):
    data = tmp_path / "data.csv"
    main(["generate", "--days", "1", "--seed", "9", "--out", str(data)])
    out_a = tmp_path / "ra"
    out_b = tmp_path / "rb"
    for out in (out_a, out_b):
        code = main(
            ["evaluate", "--data", str(data), "--out-dir", str(out), "--seed", "42"]
        )
        assert code == 0
    for name in ("report.csv", "report.txt", "evaluation.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    csv_lines = (out_a / "report.csv").read_text().splitlines()
    assert csv_lines[0] == "model,mse,rmse,mae,r2"
    assert len(csv_lines) == 9  # header + eight models
    payload = json.loads((out_a / "evaluation.json").read_text())
    assert len(payload["rows"]) == 8
    assert payload["dataset_fingerprint"]


def test_export_plots_missing_day_fails(tmp_path):
    model = tmp_path / "m.hcm"
    main(["train", "--model", "linear", "--out", str(model)])
    code = main(
        ["export-plots", "--model", str(model), "--day", "1999-01-01", "--out", str(tmp_path / "p.csv")]
    )
    assert code == 1


def test_missing_data_file_fails_cleanly(tmp_path, capsys):
    code = main(["summarize", "--data", str(tmp_path / "absent.csv")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_subcommand_exits_with_usage():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2


def test_bad_feature_token_fails(tmp_path):
    assert main(["correlate", "--out", str(tmp_path / "c.csv"), "--features", "wind"]) == 1
