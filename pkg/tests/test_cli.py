"""End-to-end CLI behavior: outputs, determinism, and error reporting."""

import json

import pytest

from ising2d.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_simulate_json_and_determinism(tmp_path, capsys):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    args = ["simulate", "--size", "8x8", "--beta", "0.3", "--sweeps", "300",
            "--burnin", "50", "--seed", "7"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    payload = json.loads(out1.read_text())
    assert payload["config"]["seed"] == 7
    assert payload["config"]["version"]
    assert 0.0 <= payload["result"]["m_abs"] <= 1.0
    assert payload["result"]["n_samples"] == 250


def test_simulate_distributed_matches_single_worker(tmp_path, capsys):
    base = ["simulate", "--size", "8x8", "--beta", "0.3", "--sweeps", "60",
            "--burnin", "10", "--seed", "3"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(base + ["--out", str(a)]) == 0
    assert main(base + ["--workers", "2x2", "--out", str(b)]) == 0
    ra = json.loads(a.read_text())["result"]
    rb = json.loads(b.read_text())["result"]
    assert ra == rb


@pytest.mark.parametrize("argv,fragment", [
    (["simulate", "--size", "7x8", "--beta", "0.3"], "even"),
    (["simulate", "--size", "8", "--beta", "0.3"], "HxW"),
    (["simulate", "--size", "8x8", "--beta", "0.3",
      "--sweeps", "10", "--burnin", "10"], "burn-in"),
    (["simulate", "--size", "8x8", "--beta", "0.3", "--workers", "0x2"],
     "mesh"),
    (["scan", "--size", "8x8", "--out", "/tmp/x.csv", "--sweeps", "50",
      "--burnin", "5"], "--temps or --trange"),
    (["scan", "--size", "8x8", "--out", "/tmp/x.csv", "--trange", "1:0:0.1",
      "--sweeps", "50", "--burnin", "5"], "empty range"),
    (["bench", "--meshes", "1x1"], "exactly one"),
    (["bench", "--per-worker", "8x8", "--global", "8x8"], "exactly one"),
])
def test_bad_arguments_exit_2(argv, fragment, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert fragment in err
    assert err.startswith("error:")


def test_scan_csv_and_figure(tmp_path, capsys):
    csv_path, fig_path = tmp_path / "scan.csv", tmp_path / "scan.png"
    code, out, _ = run(capsys, "scan", "--size", "8x8",
                       "--trange", "0.9:1.1:0.1", "--units", "tc",
                       "--sweeps", "200", "--burnin", "40", "--jobs", "1",
                       "--out", str(csv_path), "--fig", str(fig_path))
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    json.loads(lines[0][len("# config: "):])  # the embedded config is JSON
    header = lines[1].split(",")
    assert header == ["T", "T_over_Tc", "m_abs", "m_abs_se", "m2", "m4",
                      "binder", "binder_se", "energy_per_site", "n_samples"]
    assert len(lines) == 2 + 3  # three temperature rows
    assert fig_path.exists() and fig_path.stat().st_size > 0


def test_scan_absolute_units(tmp_path, capsys):
    csv_path = tmp_path / "scan.csv"
    code, _, _ = run(capsys, "scan", "--size", "8x8", "--temps", "2.0,2.5",
                     "--units", "abs", "--sweeps", "100", "--burnin", "10",
                     "--jobs", "1", "--out", str(csv_path))
    assert code == 0
    rows = csv_path.read_text().splitlines()[2:]
    assert [r.split(",")[0] for r in rows] == ["2.0", "2.5"]


def test_bench_json_and_figure(tmp_path, capsys):
    out_path, fig_path = tmp_path / "bench.json", tmp_path / "bench.png"
    code, _, _ = run(capsys, "bench", "--per-worker", "16x16",
                     "--meshes", "1x1", "--timed", "10", "--warmup", "1",
                     "--power-watts", "65", "--out", str(out_path),
                     "--fig", str(fig_path))
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert payload["mode"] == "weak"
    row = payload["rows"][0]
    assert row["efficiency"] == 1.0
    assert row["nj_per_flip"] > 0
    assert payload["published_baselines"]
    assert fig_path.exists() and fig_path.stat().st_size > 0


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert out.count("[PASS]") == 7
    assert "[FAIL]" not in out
