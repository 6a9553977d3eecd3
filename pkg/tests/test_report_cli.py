from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from switchmlsi import __version__, cli, report
from switchmlsi.report import Claim


def test_clean_handles_numpy_and_fractions():
    out = json.loads(report.dumps({"a": np.int64(3), "b": np.float64(0.5), "c": Fraction(1, 3), "d": np.arange(2),
                                   "e": float("inf"), "f": np.bool_(True)}))
    assert out == {"a": 3, "b": 0.5, "c": "1/3", "d": [0, 1], "e": "inf", "f": True}


def test_overall_status():
    assert report.overall([Claim("a", "x", "PASS"), Claim("b", "y", "REPORTED")]) == "PASS"
    assert report.overall([Claim("a", "x", "PASS"), Claim("b", "y", "FAIL")]) == "FAIL"


def test_envelope_and_sidecar(tmp_path):
    body = report.envelope("demo", {"seed": 1}, [Claim("a", "x", "PASS")], {"v": 1}, {"tol": 1e-8})
    assert body["version"] == __version__ and body["tolerances"] == {"tol": 1e-8}
    p = report.write_report(tmp_path, "demo", body, started=0.0)
    assert json.loads(p.read_text())["claims"][0]["status"] == "PASS"
    meta = json.loads((tmp_path / "demo.meta.json").read_text())
    assert "written_at" in meta and "written_at" not in p.read_text()


def test_out_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv(report.OUT_ENV, str(tmp_path / "r"))
    assert report.out_dir() == tmp_path / "r"
    assert (tmp_path / "r").is_dir()


def test_cli_enumerate_lines(capsys):
    assert cli.main(["enumerate", "--n", "5", "--d", "2", "--simple"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2040
    assert all(len(x.split()) == 25 for x in lines[:5])


def test_cli_enumerate_multi(capsys):
    assert cli.main(["enumerate", "--n", "4", "--d", "2", "--multi"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 282


def test_cli_space_too_large_exit_code(capsys):
    assert cli.main(["enumerate", "--n", "9", "--d", "3"]) == cli.EXIT_TOO_LARGE


def test_cli_library_error_exit_code(tmp_path):
    rc = cli.main(["mix", "--n", "4", "--d", "2", "--mode", "exact", "--tmax", "1", "--out-dir", str(tmp_path)])
    assert rc == cli.EXIT_FAIL


def test_cli_mix_exact_report(tmp_path):
    out = tmp_path / "report.json"
    assert cli.main(["mix", "--n", "4", "--d", "2", "--eps", "0.25", "--mode", "exact", "--out", str(out)]) == 0
    body = json.loads(out.read_text())
    assert body["status"] == "PASS"
    oracle = next(c for c in body["claims"] if c["id"] == "mix.oracle")
    assert oracle["measured"]["diff"] <= 1e-8
    assert (tmp_path / "mix_exact_n4_d2.csv").exists() and (tmp_path / "mix_exact_n4_d2.png").exists()
    assert body["parameters"]["seed"] == 0 and body["parameters"]["eps"] == 0.25


def test_cli_aux_and_chain(tmp_path):
    assert cli.main(["aux", "--n", "4", "--d", "2", "--m", "1", "--check", "psi", "--check", "beta",
                     "--out-dir", str(tmp_path)]) == 0
    assert cli.main(["chain", "--n", "4", "--d", "2", "--kind", "Qc", "--export", "--out-dir", str(tmp_path)]) == 0
    exported = json.loads((tmp_path / "chain_Qc_n4_d2.chain.json").read_text())
    assert len(exported["states"]) == 282


def test_cli_flow_and_regularize(tmp_path):
    assert cli.main(["flow", "--n", "4", "--d", "2", "--out-dir", str(tmp_path)]) == 0
    assert cli.main(["regularize", "--n", "4", "--d", "2", "--count", "50", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "regularize_n4_d2_s0_entropy.png").exists()


def test_cli_mlsi(tmp_path):
    assert cli.main(["mlsi", "--n", "4", "--d", "2", "--budget", "20", "--out-dir", str(tmp_path)]) == 0


def test_cli_simulate_outputs(tmp_path):
    assert cli.main(["simulate", "--n", "8", "--d", "2", "--runs", "300", "--reference", "2000",
                     "--T-grid", "0", "5", "20", "--out-dir", str(tmp_path)]) == 0
    csv = (tmp_path / "simulate_n8_d2_s0.csv").read_text().splitlines()
    assert csv[0] == "T,mean,var,tv_lower,tv_hist" and len(csv) == 4
    assert (tmp_path / "simulate_n8_d2_s0.png").exists()


def test_cli_reports_are_byte_identical(tmp_path):
    for k in (1, 2):
        assert cli.main(["regularize", "--n", "4", "--d", "2", "--count", "30", "--seed", "4", "--no-figures",
                         "--out-dir", str(tmp_path / str(k))]) == 0
    a = (tmp_path / "1" / "regularize_n4_d2_s4.json").read_bytes()
    b = (tmp_path / "2" / "regularize_n4_d2_s4.json").read_bytes()
    assert a == b


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.main([])
