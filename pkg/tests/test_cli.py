import json
import subprocess
import sys

import pytest

from plstats import cli, montecarlo
from plstats.errors import NonConvergenceError


def run(argv, capsys):
    code = cli.parse_and_dispatch(argv)
    out, err = capsys.readouterr()
    return code, out, err


SIM = ["simulate", "--n", "30", "--f", "x2", "--comparison", "fixed_k", "--k", "1", "--replications", "40"]


def test_theory_example(capsys):
    code, out, _ = run(["theory", "--law", "wigner", "--f", "x2", "--m4", "3", "--sigma2", "1"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["total"] == pytest.approx(4.0, abs=1e-9)
    assert {"main_term", "fourth_moment_term", "diagonal_term", "total", "node_count"} <= set(rep)


def test_theory_sample_cov_literal_flag(capsys):
    _, out, _ = run(["theory", "--law", "mp", "--f", "x", "--m4", "5", "--literal-fourth-moment-term"], capsys)
    assert json.loads(out)["total"] == pytest.approx(2.0, abs=1e-9)
    _, out, _ = run(["theory", "--law", "mp", "--f", "x", "--m4", "5"], capsys)
    assert json.loads(out)["total"] == pytest.approx(4.0, abs=1e-9)


def test_theory_nonconvergence_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise NonConvergenceError("wigner_variance[x]", 1.0, 2.0, 1e-7)

    monkeypatch.setattr(cli, "wigner_variance", boom)
    code, _, err = run(["theory", "--law", "wigner", "--f", "x"], capsys)
    assert code == 3 and json.loads(err)["error"] == "nonconvergence"


def test_sampling_clt_exhaustive(capsys):
    code, out, _ = run(["sampling-clt", "--n", "4", "--k", "2", "--g", "identity", "--exhaustive"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["lemma_b2"][0]["j"] == 1
    assert rep["lemma_b2"][0]["r2"] == 0 and rep["lemma_b2"][0]["r4"] == 0
    assert rep["max_form_gap"] == 0 and rep["max_conditional_mean"] == 0


def test_sampling_clt_monte_carlo(capsys):
    code, out, _ = run(["sampling-clt", "--n", "200", "--k", "20", "--reps", "500", "--seed", "3"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert {"variance_empirical", "variance_exact", "ks_distance"} <= set(rep)


def test_simulate_missing_n(capsys):
    code, _, err = run(["simulate", "--f", "x", "--comparison", "full_linear", "--replications", "5", "--seed", "1"], capsys)
    assert code == 2
    assert any("ensemble.n" in p for p in json.loads(err)["problems"])


def test_seed_is_required(capsys):
    code, _, err = run(SIM, capsys)
    assert code == 2 and "--seed" in err
    code, _, _ = run(SIM + ["--seed", "1", "--seed-from-entropy"], capsys)
    assert code == 2


def test_seed_from_entropy_is_recorded(tmp_path, capsys):
    code, _, _ = run(SIM + ["--seed-from-entropy", "--output-dir", str(tmp_path)], capsys)
    assert code in (0, 4)
    resolved = json.loads((tmp_path / "config.resolved.json").read_text())
    assert isinstance(resolved["master_seed"], int)


def test_config_errors_listed_together(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"ensemble": {"type": "wigner", "n": 10}, "comparison": "fixed_k", "f": "nope",
                               "replications": 1, "bogus": 2}))
    code, _, err = run(["simulate", "--config", str(cfg), "--seed", "1"], capsys)
    problems = json.loads(err)["problems"]
    assert code == 2 and len(problems) >= 4


def test_output_layout_workers_and_round_trip(tmp_path, capsys):
    montecarlo.clear_cache()
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run(SIM + ["--seed", "9", "--workers", "1", "--output-dir", str(a)], capsys)[0] in (0, 4)
    montecarlo.clear_cache()
    assert run(SIM + ["--seed", "9", "--workers", "2", "--output-dir", str(b)], capsys)[0] in (0, 4)
    assert sorted(p.name for p in a.iterdir()) == ["config.resolved.json", "limit_samples.csv", "report.json", "samples.csv"]
    for name in ("report.json", "samples.csv", "limit_samples.csv", "config.resolved.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    montecarlo.clear_cache()
    run(["simulate", "--config", str(a / "config.resolved.json"), "--output-dir", str(c)], capsys)
    assert (a / "report.json").read_bytes() == (c / "report.json").read_bytes()
    code, out, _ = run(["compare", "--dir", str(a)], capsys)
    assert code == 0 and json.loads(out)["identical"] is True


def test_compare_one_sample_round_trip(tmp_path, capsys):
    argv = ["simulate", "--n", "20", "--f", "x", "--comparison", "full_linear", "--replications", "30", "--seed", "4",
            "--output-dir", str(tmp_path)]
    run(argv, capsys)
    code, out, _ = run(["compare", "--dir", str(tmp_path)], capsys)
    rep = json.loads(out)
    assert rep["mode"] == "one_sample" and rep["identical"] is True
    code, out, _ = run(["compare", "--samples", str(tmp_path / "samples.csv"), "--normal-variance", "1"], capsys)
    assert code == 0 and 0 <= json.loads(out)["ks_distance"] <= 1


def test_env_overrides(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("PLSTAT_OUTPUT_DIR", str(tmp_path / "env"))
    monkeypatch.setenv("PLSTAT_WORKERS", "2")
    run(SIM + ["--seed", "2"], capsys)
    assert (tmp_path / "env" / "report.json").exists()
    monkeypatch.setenv("PLSTAT_WORKERS", "many")
    assert run(SIM + ["--seed", "2"], capsys)[0] == 2


def test_threshold_failure_exit_code(capsys):
    code, out, _ = run(SIM + ["--seed", "1", "--ks-max", "0"], capsys)
    assert code == 4 and json.loads(out)["pass"] is False


def test_rigidity_outputs(tmp_path, capsys):
    code, out, _ = run(["rigidity", "--n", "50", "--seed", "1", "--output-dir", str(tmp_path)], capsys)
    assert code == 0
    header = (tmp_path / "profile.csv").read_text().splitlines()[0]
    assert header == "j,eigenvalue,location,deviation,weighted"
    assert len((tmp_path / "profile.csv").read_text().splitlines()) == 51


def test_rigidity_edge_checks(capsys):
    code, out, _ = run(["rigidity", "--n", "1000", "--edge-checks", "--soft-constant", "56.548667764616276"], capsys)
    assert code == 0 and json.loads(out)["pass"] is True
    code, out, _ = run(["rigidity", "--n", "1000", "--edge-checks"], capsys)
    assert code == 4 and json.loads(out)["hard_edge_ok"] is True


def test_catalog(capsys):
    code, out, _ = run(["catalog"], capsys)
    names = {f["name"] for f in json.loads(out)["functions"]}
    assert code == 0 and {"x", "x2", "sin", "bump"} <= names


def test_no_subcommand(capsys):
    assert run([], capsys)[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "plstats", "theory", "--law", "sc", "--f", "x", "--m4", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["total"] == pytest.approx(2.0, abs=1e-9)
