import json
import subprocess
import sys

import pytest

from majlab.cli import main

CONFIG = """n = 800
p = 0.3
k = 3
lambda = ["1/3","1/3","1/3"]
n_trials = 5
master_seed = 3
"""


@pytest.fixture
def cfg_file(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text(CONFIG)
    return f


def test_simulate_writes_outputs(cfg_file, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg_file), "--out", str(out)]) == 0
    assert (out / "trials.csv").read_text().count("\n") == 6
    assert json.loads((out / "summary.json").read_text())["n_trials"] == 5
    assert "wrote 5 trials" in capsys.readouterr().out


def test_simulate_thread_independent(cfg_file, tmp_path, monkeypatch):
    main(["simulate", "--config", str(cfg_file), "--out", str(tmp_path / "a"), "--threads", "1"])
    monkeypatch.setenv("MAJLAB_THREADS", "4")
    main(["simulate", "--config", str(cfg_file), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trials.csv").read_bytes() == (tmp_path / "b" / "trials.csv").read_bytes()


def test_fix_modes_are_exclusive(cfg_file, tmp_path):
    with pytest.raises(SystemExit):
        main(["simulate", "--config", str(cfg_file), "--out", str(tmp_path), "--fix-graph", "--fix-config"])


def test_fix_config_recorded(cfg_file, tmp_path):
    out = tmp_path / "fc"
    main(["simulate", "--config", str(cfg_file), "--out", str(out), "--fix-config"])
    assert "resample_config_per_trial = false" in (out / "config.txt").read_text()


def test_override_and_bad_config(cfg_file, tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg_file), "--out", str(out), "--set", "n_trials=2"]) == 0
    assert (out / "trials.csv").read_text().count("\n") == 3
    assert main(["simulate", "--config", str(cfg_file), "--out", str(out), "--set", "p=2"]) == 2
    assert "error" in capsys.readouterr().err


def test_verify_exit_codes(cfg_file, tmp_path):
    out = tmp_path / "v"
    main(["simulate", "--config", str(cfg_file), "--out", str(out)])
    js = tmp_path / "v.json"
    # a sweep-only claim on a single experiment is not applicable, which does not fail the run
    assert main(["verify", "--records", str(out), "--claims", "ROUND1_ELIM,VARIANCE_BOUND", "--json", str(js)]) == 0
    verdicts = json.loads(js.read_text())
    assert [v["claim_id"] for v in verdicts] == ["ROUND1_ELIM", "VARIANCE_BOUND"]
    assert verdicts[0]["pass"] and verdicts[1]["status"] == "not-applicable"
    with pytest.raises(SystemExit):
        main(["verify", "--records", str(out), "--claims", "NOT_A_CLAIM"])


def test_verify_failure_exit(tmp_path):
    # n = 30 is far too small for round-1 elimination under a skewed law
    cfg = tmp_path / "s.cfg"
    cfg.write_text('n = 30\np = 0.3\nk = 3\nlambda = ["2/5","7/20","1/4"]\nn_trials = 20\nmaster_seed = 1\n')
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "s")])
    assert main(["verify", "--records", str(tmp_path / "s"), "--claims", "ROUND1_ELIM"]) == 1


def test_verify_degree_gap_from_seeds(cfg_file, tmp_path):
    out = tmp_path / "d"
    main(["simulate", "--config", str(cfg_file), "--out", str(out)])
    js = tmp_path / "d.json"
    main(["verify", "--records", str(out), "--claims", "DEGREE_GAP", "--json", str(js)])
    v = json.loads(js.read_text())[0]
    assert v["claim_id"] == "DEGREE_GAP"
    assert v["status"] in ("pass", "fail", "not-applicable")


def test_sweep_and_verify(cfg_file, tmp_path, capsys):
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(cfg_file), "--axis", "n", "--values", "400,800,1600", "--out", str(out)]) == 0
    fits = json.loads(capsys.readouterr().out)
    assert "tie_slope" in fits
    js = tmp_path / "sw.json"
    main(["verify", "--records", str(out), "--claims", "TIE_SET_SCALING", "--json", str(js)])
    assert json.loads(js.read_text())[0]["status"] in ("pass", "fail")


def test_sweep_rejects_bad_values(cfg_file, tmp_path):
    assert main(["sweep", "--config", str(cfg_file), "--axis", "p", "--values", "0.1,0.5,1.5", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--config", str(cfg_file), "--axis", "n", "--values", "", "--out", str(tmp_path)]) == 2


def test_oracle_profile_and_tie(capsys):
    assert main(["oracle", "profile", "--params", "s=1,1", "n_of_v=2", "parts=2,2"]) == 0
    assert capsys.readouterr().out.strip() == "2/3"
    main(["oracle", "tie", "--params", "n_i=1", "n_j=1", "p=0.5"])
    assert float(capsys.readouterr().out) == pytest.approx(0.5)


def test_oracle_llt_csv_and_flag(capsys):
    main(["oracle", "llt", "--params", "n_v_star=3000", "n_of_v=600", "parts=1000,1000,1000", "window=3"])
    cap = capsys.readouterr()
    assert cap.out.splitlines()[0] == "delta_vec,exact,approx,rel_err"
    assert len(cap.out.splitlines()) == 1 + 49
    assert "normalisation: standard" in cap.err


def test_oracle_missing_parameter():
    with pytest.raises(SystemExit):
        main(["oracle", "tie", "--params", "n_i=1"])


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "majlab.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for sub in ("simulate", "sweep", "verify", "oracle"):
        assert sub in r.stdout
