"""End-to-end CLI tests (exit codes, formats, manifests, reproducibility)."""

import json
import subprocess
import sys

from zetaspan.cli import main


def run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "zetaspan.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


def test_phi_m6(tmp_path):
    res = run_cli(["phi", "--M", "6", "--deltas", "0,1"], tmp_path)
    assert res.returncode == 0
    assert res.stdout.count("-> 1") == 4
    assert "varpi = 2.157479" in res.stdout


def test_phi_identically_zero(tmp_path):
    res = run_cli(["phi", "--M", "6", "--deltas", "0,0"], tmp_path)
    assert res.returncode == 0
    assert "phi identically 0" in res.stdout
    assert "varpi = 0" in res.stdout


def test_validation_error_exit_code(tmp_path):
    res = run_cli(["phi", "--M", "6", "--deltas", "0,3"], tmp_path)
    assert res.returncode == 2
    assert "delta_J < M/2" in res.stderr


def test_params_file_flow(tmp_path):
    cfg = tmp_path / "m37.cfg"
    cfg.write_text("M = 37\ndeltas = 2,3,4,5,6,7,8,9,10,11\n")
    res = run_cli(["constant-c", "--params", str(cfg)], tmp_path)
    assert res.returncode == 0
    assert "1.026022" in res.stdout


def test_verify_small_and_precondition_warning(tmp_path):
    res = run_cli(["verify", "--M", "6", "--deltas", "0,1", "--s", "4",
                   "--r", "2", "--n", "17"], tmp_path)
    assert res.returncode == 0
    assert "PASS" in res.stdout

    res = run_cli(["verify", "--M", "6", "--deltas", "0,1", "--s", "4",
                   "--r", "2", "--n", "3"], tmp_path)
    assert res.returncode == 0
    assert "skipped with warning" in res.stdout

    res = run_cli(["verify", "--M", "6", "--deltas", "0,0", "--s", "4",
                   "--r", "2", "--n", "17"], tmp_path)
    assert res.returncode == 0
    assert "Phi_n=1 " in res.stdout.replace("Phi_n=1\n", "Phi_n=1 ")


def test_claim_theorem1(tmp_path):
    res = run_cli(["claim", "theorem1"], tmp_path)
    assert res.returncode == 0
    assert "1.009388" in res.stdout


def test_manifest_and_reproducibility(tmp_path):
    out1 = tmp_path / "a.txt"
    out2 = tmp_path / "b.txt"
    man = tmp_path / "m.json"
    r1 = run_cli(["--out", str(out1), "--manifest", str(man),
                  "varpi", "--M", "6", "--deltas", "0,1"], tmp_path)
    assert r1.returncode == 0
    doc = json.loads(man.read_text())
    assert doc["command"] == "varpi"
    assert doc["version"]
    assert doc["precision"] == 128
    assert "wall_clock_s" in doc
    r2 = run_cli(["--out", str(out2), "--manifest", str(man),
                  "varpi", "--M", "6", "--deltas", "0,1"], tmp_path)
    assert r2.returncode == 0
    assert out1.read_bytes() == out2.read_bytes()
    # replaying the manifest reproduces the same output bytes
    first = out2.read_bytes()
    out2.unlink()
    r3 = run_cli(["replay", str(man)], tmp_path)
    assert r3.returncode == 0
    assert out2.read_bytes() == first


def test_precision_doubling_nests(tmp_path):
    import mpmath
    outs = []
    for prec in ("128", "256"):
        res = run_cli(["--format", "json", "--precision", prec,
                       "varpi", "--M", "6", "--deltas", "0,1"], tmp_path)
        assert res.returncode == 0
        outs.append(json.loads(res.stdout)["varpi"])
    with mpmath.workprec(300):
        v1, e1 = mpmath.mpf(outs[0]["value"]), mpmath.mpf(outs[0]["error_bound"])
        v2, e2 = mpmath.mpf(outs[1]["value"]), mpmath.mpf(outs[1]["error_bound"])
        assert v1 - e1 <= v2 - e2 and v2 + e2 <= v1 + e1


def test_search_cli_outputs_and_determinism(tmp_path):
    args = ["search", "--M-max", "6", "--delta-max", "2", "--J-max", "2",
            "--strategy", "exhaustive", "--top", "3"]
    r1 = run_cli(args, tmp_path)
    assert r1.returncode == 0
    csv_text = (tmp_path / "search_results.csv").read_text()
    assert csv_text.splitlines()[0] == "M,J,deltas,varpi,C_lower,C_upper,seconds"
    json1 = json.loads((tmp_path / "search_results.json").read_text())
    assert json1["ranking"][0]["M"] == 6
    assert json1["ranking"][0]["deltas"] == [0, 1]
    r2 = run_cli(args, tmp_path)
    json2 = json.loads((tmp_path / "search_results.json").read_text())
    assert json1 == json2


def test_search_cache_resume(tmp_path):
    args = ["search", "--M-max", "5", "--delta-max", "1", "--J-max", "1",
            "--strategy", "exhaustive", "--top", "2",
            "--cache", str(tmp_path / "cache.json")]
    r1 = run_cli(args, tmp_path)
    assert r1.returncode == 0
    assert (tmp_path / "cache.json").exists()
    json1 = (tmp_path / "search_results.json").read_text()
    r2 = run_cli(args, tmp_path)
    assert r2.returncode == 0
    assert (tmp_path / "search_results.json").read_text() == json1


def test_build_form_outputs(tmp_path):
    res = run_cli(["build-form", "--M", "6", "--deltas", "0,1", "--s", "4",
                   "--r", "2", "--n", "3", "--table", str(tmp_path / "t")],
                  tmp_path)
    assert res.returncode == 0
    assert "Phi_n" in res.stdout and "rho_3" in res.stdout
    table = (tmp_path / "t.n3.tsv").read_text()
    assert len(table.splitlines()) > 10


def test_asympt_command_small(tmp_path):
    res = run_cli(["asympt", "--M", "5", "--deltas", "1,1,2,2", "--s", "4",
                   "--r", "1", "--numerator-bricks"], tmp_path)
    assert res.returncode == 0
    assert "x0 = " in res.stdout
    assert "alpha_hat" in res.stdout


def test_main_callable_directly(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = main(["varpi", "--M", "6", "--deltas", "0,1"])
    assert code == 0
    assert "varpi = 2.157479" in capsys.readouterr().out
