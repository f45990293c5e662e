import json

import numpy as np
import pytest

from vibheom import cli, load_scenario
from vibheom.config import config_to_dict
from vibheom.dynamics import AuditReport
from vibheom.integrate import StiffnessError
from vibheom.output import read_csv, trajectory_header


def write_config(path, name="fig2a-c", final=0.02, label="tiny", **extra):
    doc = config_to_dict(load_scenario(name))
    doc["label"] = label
    doc["integrator"]["final_time"] = final
    doc["output"]["tau"] = final
    doc.update(extra)
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def tiny(tmp_path):
    return write_config(tmp_path / "tiny.json")


def test_simulate_writes_deterministic_csv(tiny, tmp_path, capsys):
    assert cli.main(["simulate", "--config", str(tiny), "--out", str(tmp_path / "a")]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["label"] == "tiny" and printed["n_ados"] == 210
    assert cli.main(["simulate", "--config", str(tiny), "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "tiny.csv").read_bytes()
    assert a == (tmp_path / "b" / "tiny.csv").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0].split(",") == trajectory_header(6)
    assert len(lines) == 22
    assert "e" in lines[1].split(",")[1]


def test_summary_recomputed_from_csv(tiny, tmp_path):
    cli.main(["simulate", "--config", str(tiny), "--out", str(tmp_path)])
    cols = read_csv(tmp_path / "tiny.csv")
    summary = json.loads((tmp_path / "tiny.summary.json").read_text())
    t, tau = cols["t_ps"], summary["tau_ps"]
    yy, q = cols["rho_YY"], cols["Q"]
    offline = {
        "avg_rho_YY": np.trapezoid(yy, t) / tau,
        "avg_rho_YY_transfer": np.trapezoid(yy - yy[0], t) / tau,
        "avg_neg_Q": np.trapezoid(np.minimum(q, 0.0), t) / tau,
        "avg_abs_coh": np.trapezoid(cols["abs_coh"], t) / tau,
    }
    for key, val in offline.items():
        assert abs(summary[key] - val) <= 1e-12 * max(1.0, abs(val)), key


def test_dump_matrices_and_debug_bath(tiny, tmp_path, capsys):
    assert cli.main(["simulate", "--config", str(tiny), "--out", str(tmp_path),
                     "--dump-matrices", "--debug-bath"]) == 0
    out = capsys.readouterr().out
    assert "nu=" in out and "remainder Delta" in out and "210 ADOs" in out and "steps:" in out
    rows = (tmp_path / "tiny_H.txt").read_text().splitlines()
    H = np.array([[complex(*map(float, z.split(","))) for z in r.split()] for r in rows])
    assert H.shape == (14, 14)
    np.testing.assert_array_equal(H, H.conj().T)
    for name in ("rho0", "Q1", "Q2"):
        assert (tmp_path / f"tiny_{name}.txt").exists()


def test_scenario_name_accepted(capsys):
    assert cli.main(["scenarios"]) == 0
    out = capsys.readouterr().out
    for name in ("fig1", "fig1-nocoupling", "fig2a-c", "fig2d-f", "fig2g-i", "fig2-baselines",
                 "fig3", "fig4", "fig5-appB", "fig-mixed"):
        assert name in out


@pytest.mark.parametrize("argv", [
    ["simulate", "--config", "no-such-file.json"],
    ["sweep-lambda", "--config", "fig4", "--values", "6,2,20"],
    ["sweep-lambda", "--config", "fig4", "--values", "a,b"],
    ["sweep-purity", "--config", "fig2a-c"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_bad_documents_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"integrator": {"final_time": -1}}')
    assert cli.main(["simulate", "--config", str(bad)]) == 2
    assert "final time" in capsys.readouterr().err
    bad.write_text("{not json")
    assert cli.main(["simulate", "--config", str(bad)]) == 2


def test_stiffness_exit_3(tiny, monkeypatch, capsys):
    def boom(cfg):
        raise StiffnessError("step size collapsed")
    monkeypatch.setattr(cli, "simulate", boom)
    assert cli.main(["simulate", "--config", str(tiny)]) == 3
    assert "collapsed" in capsys.readouterr().err


def test_sweep_lambda_records_failures(tmp_path, monkeypatch, capsys):
    cfg = write_config(tmp_path / "sw.json", final=0.01, sweep={"parameter": "lambda", "values": [2, 6, 12]})
    real = cli.sweep_lambda

    def flaky(cfg, x):
        if cfg.bath.reorganization == 6:
            raise StiffnessError("too stiff")
        return cli.simulate(cfg)

    monkeypatch.setattr(cli, "sweep_lambda", lambda base, values, **kw: real(base, values, runner=lambda c: flaky(c, 0), **kw))
    assert cli.main(["sweep-lambda", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    captured = capsys.readouterr()
    assert "FAILED" in captured.out and "too stiff" in captured.err
    assert "21.7" in captured.out
    table = read_csv(tmp_path / "o" / "tiny_lambda_sweep.csv")
    np.testing.assert_array_equal(table["lambda"], [2.0, 12.0])


def test_sweep_purity_from_values(tmp_path, capsys):
    cfg = write_config(tmp_path / "p.json", final=0.01)
    assert cli.main(["sweep-purity", "--config", str(cfg), "--values", "1.0,0.75"]) == 0
    out = capsys.readouterr().out
    assert "0.375" in out


def test_audit_threshold(monkeypatch, capsys):
    report = AuditReport("x", {"L=10->12": {"rho_YY": 2e-3, "mandel_Q": 1e-3}}, 1.0)
    monkeypatch.setattr(cli, "convergence_audit", lambda cfg: report)
    assert cli.main(["audit", "--config", "fig2g-i"]) == 0
    assert cli.main(["audit", "--config", "fig2g-i", "--threshold", "1e-3"]) == 1
    assert "L=10->12" in capsys.readouterr().out
