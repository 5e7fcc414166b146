import json
import subprocess
import sys

import pytest

from teichkit.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VERDICT, main
from teichkit.grid import GridSpec


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def report(argv, capsys):
    code, out = run(argv + ["--json"], capsys)
    return code, json.loads(out)


def test_embed_zero(tmp_path, capsys):
    code, rep = report(["embed", "--fixture", "zero", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK and rep["report"]["b_norm"] == 0
    assert (tmp_path / "embed_zero_form.csv").exists()
    assert (tmp_path / "embed_zero_report.json").exists()
    assert rep["grid_hash"] == GridSpec().grid_hash()
    assert rep["report"]["fixture"] == {"mu": "zero"}


def test_embed_constant(capsys):
    code, rep = report(["embed", "--fixture", "const0.1"], capsys)
    assert code == EXIT_OK and rep["report"]["b_norm"] >= 0.149


def test_linearize_quadratic(tmp_path, capsys):
    code, rep = report(["linearize", "--fixture", "quadratic", "--out", str(tmp_path), "--csv"], capsys)
    assert code == EXIT_OK and abs(rep["report"]["taylor2"] - 0.4) < 1e-3
    assert (tmp_path / "linearize_quadratic_h.csv").exists()


def test_linearize_from_csv(tmp_path, capsys):
    import teichkit.fixtures as fx
    fx.germ("quadratic").restrict(0.2).to_csv(tmp_path / "g.csv")
    code, rep = report(["linearize", "--germ-csv", str(tmp_path / "g.csv"), "--a", "0.5"], capsys)
    assert code == EXIT_OK and rep["report"]["fixture"] == {"germ_csv": "g.csv"}
    assert abs(rep["report"]["taylor2"] - 0.4) < 1e-3


@pytest.mark.parametrize("argv", [["bogus"], ["embed", "--nope"], ["embed", "--fixture", "nope"],
                                  ["embed"], ["norm", "--fixture", "zero", "--space", "Lq:2"],
                                  ["mori", "--fixture", "zero", "--grid", "missing.json"]])
def test_usage_errors(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_USAGE


def test_verdict_failure(capsys):
    code, rep = report(["aw", "--fixture", "form_random", "--tol", "1e-12"], capsys)
    assert code == EXIT_VERDICT and rep["verdict"] == "fail"


def test_numerical_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"solver_max_iter": 2}))
    code, _ = run(["solve", "--fixture", "generic", "--config", str(cfg)], capsys)
    assert code == EXIT_NUMERICAL


def test_deterministic_reports(tmp_path, capsys):
    for d in ("a", "b"):
        assert main(["mori", "--fixture", "generic", "--out", str(tmp_path / d), "--csv"]) == EXIT_OK
    capsys.readouterr()
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    assert "mori_generic_report.json" in names and "mori_generic_exponents.csv" in names
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_grid_file_and_norms(tmp_path, capsys):
    g = tmp_path / "grid.json"
    g.write_text(GridSpec.coarse().to_json())
    code, rep = report(["norm", "--fixture", "ap2", "--space", "Ap:2", "--space", "B0", "--grid", str(g)],
                       capsys)
    assert code == EXIT_OK and rep["grid_hash"] == GridSpec.coarse().grid_hash()
    assert rep["report"]["spaces"]["Ap:2"]["member"] and rep["report"]["spaces"]["B0"]["member"]
    code, rep = report(["norm", "--fixture", "form_w2", "--grid", "coarse"], capsys)
    assert rep["report"]["object"] == "form" and rep["report"]["b_norm"] > 0


def test_coset_and_solve(tmp_path, capsys):
    code, rep = report(["coset", "--fixture", "bel0", "--base", "nu_z", "--space", "B0"], capsys)
    assert code == EXIT_OK and rep["report"]["fixture"] == {"mu": "bel0", "nu": "nu_z"}
    code, rep = report(["solve", "--fixture", "const0.1", "--kind", "disk", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK and "solve_const0.1_disk_inner.csv" in rep["artifacts"]


def test_conjugate_and_extend(capsys):
    code, rep = report(["conjugate", "--fixture", "sine", "--mobius", "hyp0.5", "--promotion"], capsys)
    assert code == EXIT_OK and rep["report"]["promotion"]["verdict"] == "consistent"
    code, rep = report(["conjugate", "--fixture", "cusp0.3", "--promotion"], capsys)
    assert code == EXIT_OK and rep["verdict"] == "indeterminate"
    code, rep = report(["extend", "--fixture", "identity", "--grid", "coarse"], capsys)
    assert code == EXIT_OK and rep["report"]["symmetric_evidence"] == "symmetric"


def test_suite_subset(capsys):
    code, rep = report(["suite", "--criteria", "6", "--grid", "coarse"], capsys)
    assert code == EXIT_OK and rep["report"]["passed"] == 1
    assert "seconds" not in rep["report"]["criteria"][0]


def test_fixtures_listing_and_entry_point():
    out = subprocess.run([sys.executable, "-m", "teichkit.cli", "fixtures"], capture_output=True,
                         text=True, check=True).stdout
    cat = json.loads(out)
    assert "quadratic" in cat["germs"] and "bel0" in cat["fields"]
    bad = subprocess.run([sys.executable, "-m", "teichkit.cli", "frobnicate"], capture_output=True)
    assert bad.returncode == EXIT_USAGE
