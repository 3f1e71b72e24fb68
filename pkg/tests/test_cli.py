import io
import json

import pytest

from di_kit.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("sub", [[], ["curve"], ["bound"], ["chsh"], ["equiv-check"], ["sdp-selftest"]])
def test_help_exits_zero(sub, capsys):
    assert main(sub + ["--help"]) == 0


def test_unknown_flag_and_subcommand():
    assert run("bound", "--qber", "0", "--nonsense")[0] == 1
    assert run("frobnicate")[0] == 1
    assert run()[0] == 1


def test_bound_examples():
    code, out, _ = run("bound", "--qber", "0", "--epsilon", "0")
    assert code == 0 and json.loads(out)["rate"] == 1.0
    code, out, _ = run("bound", "--qber", "0.02", "--anticom-norm", "0")
    assert code == 0 and json.loads(out)["rate"] == pytest.approx(0.858559, abs=1e-5)
    assert json.loads(out)["tier"] == "analytic-prop2"
    code, out, _ = run("bound", "--qber", "0.02", "--epsilon", "0", "--tier", "thm1")
    assert code == 0 and json.loads(out)["rate"] == pytest.approx(0.717119, abs=1e-5)
    code, out, _ = run("bound", "--qber", "0.02", "--moment-bound", "0")
    assert json.loads(out)["rate"] == pytest.approx(0.717119, abs=1e-5)


def test_bound_conflicts():
    assert run("bound", "--qber", "0", "--epsilon", "0", "--anticom-norm", "0")[0] == 1
    assert run("bound", "--qber", "0", "--epsilon", "0", "--tier", "prop2")[0] == 1
    assert run("bound", "--qber", "0")[0] == 1
    assert run("bound", "--epsilon", "0")[0] == 1
    assert run("bound", "--qber", "0", "--anticom-norm", "3")[0] == 1


def test_curve_writes_outputs(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"qber_grid": [0.0, 0.021538461538461538]}))
    out_csv = tmp_path / "curve.csv"
    code, _, _ = run("curve", "--config", str(cfg), "--out", str(out_csv))
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "qber,rate_no_switch,rate_one_switch,rate_two_switch,tier,status"
    assert len(lines) == 3
    assert json.loads((tmp_path / "curve.certificates.json").read_text())["points"]
    assert "0.0671372" in (tmp_path / "curve.reference.csv").read_text()


def test_curve_fig2_grid(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{}")
    out_csv = tmp_path / "c.csv"
    assert run("curve", "--config", str(cfg), "--out", str(out_csv))[0] == 0
    assert len(out_csv.read_text().splitlines()) == 15


def test_curve_config_errors(tmp_path, monkeypatch):
    monkeypatch.delenv("DI_KIT_ENTROPY_TIER", raising=False)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"qber_grid": []}))
    code, _, err = run("curve", "--config", str(cfg), "--out", str(tmp_path / "x.csv"))
    assert code == 1 and "qber_grid must be non-empty" in err
    cfg.write_text(json.dumps({"tier": "npo-entropy"}))
    code, _, err = run("curve", "--config", str(cfg), "--out", str(tmp_path / "x.csv"))
    assert code == 1 and "enable_entropy_tier" in err
    cfg.write_text(json.dumps({"speed": 3}))
    code, _, err = run("curve", "--config", str(cfg), "--out", str(tmp_path / "x.csv"))
    assert code == 1 and "speed" in err
    cfg.write_text("{not json")
    assert run("curve", "--config", str(cfg), "--out", str(tmp_path / "x.csv"))[0] == 1
    assert run("curve", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "x.csv"))[0] == 1


def test_curve_partial_failure_exit_two(tmp_path, monkeypatch):
    from di_kit import pipeline
    from di_kit.errors import SolverError

    def broken(*a, **k):
        raise SolverError("injected")

    monkeypatch.setattr(pipeline, "long_range_anticom_bound", broken)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"qber_grid": [0.0]}))
    out_csv = tmp_path / "c.csv"
    code, _, err = run("curve", "--config", str(cfg), "--out", str(out_csv))
    assert code == 2 and out_csv.exists() and "failed" in out_csv.read_text()


def test_curve_deterministic(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"qber_grid": [0.0, 0.01, 0.02]}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run("curve", "--config", str(cfg), "--out", str(a))
    run("curve", "--config", str(cfg), "--out", str(b), "--jobs", "2")
    assert a.read_bytes() == b.read_bytes()


def test_chsh():
    code, out, _ = run("chsh", "--visibility", "0.99")
    rep = json.loads(out)
    assert code == 0
    assert rep["anticom_sq_max"] == pytest.approx(0.31206385, abs=1e-6)
    assert run("chsh", "--visibility", "2")[0] == 1


def test_equiv_check():
    code, out, _ = run("equiv-check", "--trials", "5", "--seed", "7")
    assert code == 0 and "max statistics deviation" in out
    assert run("equiv-check", "--trials", "0")[0] == 1
    code, _, err = run("equiv-check", "--trials", "3", "--seed", "11", "--corrupt-marginal")
    assert code == 2 and "MarginalMismatch" in err and "seed 11" in err


def test_sdp_selftest():
    code, out, _ = run("sdp-selftest")
    assert code == 0 and "tsirelson_chsh_level1" in out
    assert run("sdp-selftest")[1] == out
    code, _, err = run("sdp-selftest", "--inject-loose-tolerance")
    assert code == 2 and "failed" in err


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "di_kit", "bound", "--qber", "0", "--epsilon", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["rate"] == 1.0
