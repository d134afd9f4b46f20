import json

import pytest

from prcbench.cli import main, _parse_range, UsageError


@pytest.fixture(scope="module")
def tiny_suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    code = main(
        [
            "generate",
            "--qubits", "2..3",
            "--depths", "2..4",
            "--seed", "42",
            "--out-dir", str(out),
            "--stage1-iters", "150",
            "--stage2-iters", "50",
        ]
    )
    assert code == 0
    return out


def test_parse_range_forms():
    assert _parse_range("2..6") == [2, 3, 4, 5, 6]
    assert _parse_range("2,5,9") == [2, 5, 9]
    assert _parse_range("7") == [7]
    with pytest.raises(UsageError):
        _parse_range("5..2")
    with pytest.raises(UsageError):
        _parse_range("two")


def test_generate_writes_expected_files(tiny_suite):
    files = sorted(p.name for p in tiny_suite.iterdir())
    assert "suite.json" in files
    # 2 qubit counts x 3 depths
    assert sum(1 for f in files if f.startswith("prc_n")) == 6


def test_generate_rerun_identical_bytes(tiny_suite, tmp_path):
    out2 = tmp_path / "again"
    code = main(
        [
            "generate",
            "--qubits", "2..3",
            "--depths", "2..4",
            "--seed", "42",
            "--out-dir", str(out2),
            "--stage1-iters", "150",
            "--stage2-iters", "50",
        ]
    )
    assert code == 0
    for name in sorted(p.name for p in tiny_suite.iterdir()):
        assert (out2 / name).read_bytes() == (tiny_suite / name).read_bytes()


def test_generate_usage_errors(tmp_path):
    assert main(["generate", "--qubits", "2..3", "--depths", "1..3",
                 "--out-dir", str(tmp_path)]) == 2
    assert main(["generate", "--qubits", "1..3", "--depths", "2..3",
                 "--out-dir", str(tmp_path)]) == 2
    assert main(["generate", "--qubits", "x", "--depths", "2..3",
                 "--out-dir", str(tmp_path)]) == 2


def test_bench_report_export_pipeline(tiny_suite, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"reps": 3, "threshold": 2, "master_seed": 5}))
    matrix = tmp_path / "matrix.json"
    csv = tmp_path / "matrix.csv"
    code = main(
        [
            "bench",
            "--suite", str(tiny_suite / "suite.json"),
            "--config", str(config),
            "--out", str(matrix),
            "--csv", str(csv),
        ]
    )
    assert code == 0
    assert matrix.exists() and csv.exists()
    assert csv.read_text().startswith("n,d,status,")

    heat = tmp_path / "heat.svg"
    assert main(["report", "--mode", "heatmap", str(matrix), "--out", str(heat)]) == 0
    assert heat.exists() and heat.with_suffix(".csv").exists()

    hist = tmp_path / "hist.svg"
    assert main(
        ["report", "--mode", "histogram", str(matrix), "--cell", "3,4", "--out", str(hist)]
    ) == 0
    assert "<svg" in hist.read_text()

    delta = tmp_path / "delta.svg"
    assert main(
        ["report", "--mode", "delta", str(matrix), str(matrix), "--out", str(delta)]
    ) == 0
    assert delta.exists()

    qdir = tmp_path / "qasm"
    assert main(["export-qasm", "--suite", str(tiny_suite / "suite.json"),
                 "--out-dir", str(qdir)]) == 0
    qasm_files = sorted(p.name for p in qdir.iterdir())
    assert "gate_counts.csv" in qasm_files
    assert sum(1 for f in qasm_files if f.endswith(".qasm")) == 6

    # export determinism
    qdir2 = tmp_path / "qasm2"
    assert main(["export-qasm", "--suite", str(tiny_suite / "suite.json"),
                 "--out-dir", str(qdir2)]) == 0
    for name in qasm_files:
        assert (qdir2 / name).read_bytes() == (qdir / name).read_bytes()


def test_bench_deterministic_across_jobs(tiny_suite, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"reps": 2, "threshold": 1, "master_seed": 9}))
    outs = []
    for jobs, name in ((1, "a.json"), (3, "b.json")):
        out = tmp_path / name
        assert main(
            [
                "bench",
                "--suite", str(tiny_suite / "suite.json"),
                "--config", str(config),
                "--out", str(out),
                "--jobs", str(jobs),
            ]
        ) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_bench_malformed_config_exit_2(tiny_suite, tmp_path):
    config = tmp_path / "bad.json"
    config.write_text("{nope")
    out = tmp_path / "m.json"
    assert main(
        ["bench", "--suite", str(tiny_suite / "suite.json"),
         "--config", str(config), "--out", str(out)]
    ) == 2
    config.write_text(json.dumps({"reps": "many"}))
    assert main(
        ["bench", "--suite", str(tiny_suite / "suite.json"),
         "--config", str(config), "--out", str(out)]
    ) == 2


def test_bench_missing_suite_file_exit_1(tiny_suite, tmp_path):
    manifest = json.loads((tiny_suite / "suite.json").read_text())
    broken_dir = tmp_path / "broken"
    broken_dir.mkdir()
    (broken_dir / "suite.json").write_text(json.dumps(manifest))
    for name in manifest["circuits"].values():
        if name != "prc_n2_d2.json":
            (broken_dir / name).write_text((tiny_suite / name).read_text())
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"reps": 2, "threshold": 1}))
    out = tmp_path / "m.json"
    code = main(
        ["bench", "--suite", str(broken_dir / "suite.json"),
         "--config", str(config), "--out", str(out)]
    )
    assert code == 1


def test_report_delta_wrong_arity_exit_2(tiny_suite, tmp_path):
    out = tmp_path / "d.svg"
    assert main(["report", "--mode", "delta", "whatever.json", "--out", str(out)]) == 2


def test_missing_subcommand_exit_2():
    assert main([]) == 2


def test_output_dir_env_default(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv("PRCBENCH_OUTPUT_DIR", str(target))
    code = main(
        [
            "generate",
            "--qubits", "2",
            "--depths", "2",
            "--seed", "1",
            "--stage1-iters", "30",
            "--stage2-iters", "0",
        ]
    )
    assert code == 0
    assert (target / "suite.json").exists()
