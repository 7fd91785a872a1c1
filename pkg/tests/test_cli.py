"""End-to-end command-line interface checks."""
import numpy as np
import pytest

from fuzzykd.cli import main
from fuzzykd.data import bundled_path
from fuzzykd.serialize import load_model


@pytest.fixture()
def iris_csv():
    return str(bundled_path("iris"))


def test_train_teacher_saves_model(tmp_path, iris_csv, capsys):
    out = tmp_path / "teacher.json"
    rc = main(["train-teacher", "--data", iris_csv, "--rules", "4",
               "--seed", "1", "--out", str(out)])
    assert rc == 0
    model = load_model(out)
    assert model.order == 3
    assert "saved teacher" in capsys.readouterr().out


def test_train_student_saves_model(tmp_path, iris_csv, capsys):
    out = tmp_path / "student.json"
    rc = main(["train-student", "--data", iris_csv, "--rules", "4",
               "--epochs", "5", "--seed", "1", "--out", str(out)])
    assert rc == 0
    assert load_model(out).n_classes == 3
    assert "saved student" in capsys.readouterr().out


def test_distill_writes_model_and_trace(tmp_path, iris_csv):
    out = tmp_path / "distilled.json"
    trace = tmp_path / "trace.txt"
    rc = main(["distill", "--data", iris_csv, "--rules", "4",
               "--epochs", "5", "--seed", "1", "--out", str(out),
               "--trace-out", str(trace)])
    assert rc == 0
    lines = trace.read_text().strip().splitlines()
    assert lines[0].startswith("epoch=1 tckl=")
    assert load_model(out).order == 1


def test_evaluate_report_is_reproducible(tmp_path, iris_csv):
    args = ["evaluate", "--data", iris_csv, "--method", "distill-dkd",
            "--rules", "4", "--folds", "3", "--seed", "2", "--no-time"]
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"aggregate dataset=iris.csv method=distill-dkd" in a.read_bytes()


def test_evaluate_stdout_default(iris_csv, capsys):
    rc = main(["evaluate", "--data", iris_csv, "--method", "student-only",
               "--rules", "2", "--folds", "2", "--seed", "0", "--no-time"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "fold dataset=" in out and "acc_mean=" in out


def test_sweep_emits_one_line_per_value(tmp_path, iris_csv):
    out = tmp_path / "sweep.txt"
    rc = main(["sweep", "--data", iris_csv, "--param", "tau", "--rules", "2",
               "--folds", "2", "--epochs", "5", "--seed", "0",
               "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 1  # single --temp candidate
    assert lines[0].startswith("sweep parameter=tau")


def test_explain_round_trip(tmp_path, iris_csv, capsys):
    model = tmp_path / "student.json"
    main(["train-student", "--data", iris_csv, "--rules", "2",
          "--epochs", "3", "--seed", "1", "--out", str(model)])
    capsys.readouterr()
    rc = main(["explain", "--model", str(model),
               "--sample", "0.2,0.4,0.1,0.3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "Rule 1:" in out and "Predicted class:" in out


def test_env_var_override(tmp_path, iris_csv, monkeypatch, capsys):
    monkeypatch.setenv("FUZZYKD_EPOCHS", "2")
    out = tmp_path / "student.json"
    rc = main(["train-student", "--data", iris_csv, "--rules", "2",
               "--seed", "1", "--out", str(out)])
    assert rc == 0
    assert "2 epochs" in capsys.readouterr().out


def test_missing_file_exits_nonzero(capsys):
    rc = main(["evaluate", "--data", "/nonexistent.csv"])
    assert rc == 2
    assert "fuzzykd: error:" in capsys.readouterr().err


def test_gridsearch_small(tmp_path):
    # tiny synthetic file keeps the coarse grid tractable
    rng = np.random.default_rng(0)
    rows = []
    for cls, lo in ((0, 0.0), (1, 0.7)):
        for _ in range(12):
            a, b = rng.uniform(lo, lo + 0.3, 2)
            rows.append(f"{a:.4f},{b:.4f},{cls}")
    path = tmp_path / "toy.csv"
    path.write_text("\n".join(rows) + "\n")
    out = tmp_path / "report.txt"
    rc = main(["gridsearch", "--data", str(path), "--method", "student-only",
               "--folds", "2", "--seed", "0", "--no-time",
               "--out", str(out)])
    assert rc == 0
    assert "aggregate" in out.read_text()
