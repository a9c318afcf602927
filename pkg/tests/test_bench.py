import json

import numpy as np
import pytest

from spacetime_lsq.bench import (
    ConvergenceRecord,
    Experiment,
    ExperimentConfig,
    _policy_label,
    fit_order,
    read_records,
    run,
    write_csv,
)
from spacetime_lsq.cli import main as cli_main


def write_config(path, **overrides):
    data = {
        "experiment": "OdeConvergence",
        "K_values": [4, 8, 12, 16],
        "steps_values": [32, 64],
    }
    data.update(overrides)
    path.write_text(json.dumps(data))
    return path


def strip_wall_time(csv_path):
    lines = csv_path.read_text().splitlines()
    return [ln.rsplit(",", 1)[0] for ln in lines]


# ------------------------------------------------------------------- config


def test_config_defaults_and_parsing(tmp_path):
    cfg = ExperimentConfig.from_json(write_config(tmp_path / "c.json"))
    assert cfg.experiment is Experiment.ODE_CONVERGENCE
    assert cfg.a == 5.0 and cfg.omega == 20.0
    assert cfg.K_values == [4, 8, 12, 16]
    assert cfg.N == 16 and cfg.tau == 0.5
    assert cfg.c1 == 1.0 and cfg.c2 == 0.5


def test_config_rejects_unknown_keys(tmp_path):
    path = write_config(tmp_path / "c.json", typo_field=3)
    with pytest.raises(ValueError, match="typo_field"):
        ExperimentConfig.from_json(path)


def test_config_requires_experiment(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"K_values": [4]}))
    with pytest.raises(ValueError):
        ExperimentConfig.from_json(path)


def test_config_eta0_as_pair(tmp_path):
    path = write_config(tmp_path / "c.json", eta0=[0.5, -1.0])
    cfg = ExperimentConfig.from_json(path)
    assert cfg.eta0 == 0.5 - 1.0j


def test_paper_scale_overlay(tmp_path):
    path = write_config(tmp_path / "c.json", paper_scale={"K_values": [6], "omega": 3.0})
    base = ExperimentConfig.from_json(path)
    assert base.K_values == [4, 8, 12, 16] and base.omega == 20.0
    scaled = ExperimentConfig.from_json(path, paper_scale=True)
    assert scaled.K_values == [6] and scaled.omega == 3.0


def test_pde_config_checks_step_alignment(tmp_path):
    path = write_config(
        tmp_path / "c.json",
        experiment="PdeConvergence",
        steps_values=[48],
        sample_count=32,
    )
    with pytest.raises(ValueError, match="divisible"):
        ExperimentConfig.from_json(path)


def test_empty_sweep_rejected(tmp_path):
    path = write_config(tmp_path / "c.json", K_values=[])
    with pytest.raises(ValueError):
        ExperimentConfig.from_json(path)


def test_policy_labels():
    assert _policy_label(1, 0) == "chebyshev_L=K"
    assert _policy_label(1, 8) == "chebyshev_L=K+8"
    assert _policy_label(2, 0) == "chebyshev_L=2K"


# ---------------------------------------------------------------- csv / fit


def test_csv_roundtrip(tmp_path):
    records = [
        ConvergenceRecord("chebyshev", 8, 0.125, 7, 0.01),
        ConvergenceRecord("rk4", 64, 3.5e-9, None, 0.002),
    ]
    path = tmp_path / "out.csv"
    write_csv(records, path)
    text = path.read_text()
    assert text.splitlines()[0] == "method,param,error,iterations,wall_time_s"
    assert ",,"  in text.splitlines()[2]  # empty iterations cell for rk4
    back = read_records(path)
    assert [(r.method, r.param, r.error, r.iterations) for r in back] == [
        ("chebyshev", 8, 0.125, 7),
        ("rk4", 64, 3.5e-9, None),
    ]


def test_fit_order_recovers_synthetic_slope():
    records = [
        ConvergenceRecord("m", n, 2.7 * n**-2.0, None, 0.0) for n in (8, 16, 32, 64, 128)
    ]
    assert abs(fit_order(records) - 2.0) < 1e-10


def test_fit_order_drops_roundoff_floor():
    records = [
        ConvergenceRecord("m", n, 5.0 * n**-4.0, None, 0.0) for n in (8, 16, 32, 64, 128, 256)
    ]
    records += [ConvergenceRecord("m", n, 1e-15, None, 0.0) for n in (512, 1024)]
    assert abs(fit_order(records) - 4.0) < 1e-8


def test_fit_order_requires_enough_points():
    records = [ConvergenceRecord("m", n, 1.0 / n, None, 0.0) for n in (2, 4, 8)]
    with pytest.raises(ValueError):
        fit_order(records)


def test_fit_order_filters_by_method():
    good = [ConvergenceRecord("a", n, n**-3.0, None, 0.0) for n in (4, 8, 16, 32)]
    noise = [ConvergenceRecord("b", n, 1.0, None, 0.0) for n in (4, 8, 16, 32)]
    assert abs(fit_order(good + noise, method="a") - 3.0) < 1e-8


def test_fit_order_uses_finest_half():
    # coarse points saturated at 0.5, fine points clean second order
    records = [ConvergenceRecord("m", n, 0.5, None, 0.0) for n in (2, 4)]
    records += [ConvergenceRecord("m", n, n**-2.0, None, 0.0) for n in (64, 128, 256, 512, 1024, 2048)]
    assert abs(fit_order(records) - 2.0) < 0.05


# --------------------------------------------------------------------- runs


def test_ode_convergence_run_products(tmp_path):
    cfg = ExperimentConfig.from_json(write_config(tmp_path / "c.json"))
    records = run(cfg, out_dir=tmp_path / "out")
    methods = {r.method for r in records}
    assert methods == {"chebyshev", "crank_nicolson", "rk4"}
    cheb = [r for r in records if r.method == "chebyshev"]
    assert [r.param for r in cheb] == [4, 8, 12, 16]
    assert all(r.iterations is not None for r in cheb)
    assert all(r.iterations is None for r in records if r.method == "rk4")
    assert (tmp_path / "out" / "OdeConvergence.csv").exists()
    svg = (tmp_path / "out" / "OdeConvergence.svg").read_text()
    assert "<svg" in svg


def test_csv_deterministic_modulo_wall_time(tmp_path):
    path = write_config(tmp_path / "c.json")
    cfg = ExperimentConfig.from_json(path)
    run(cfg, out_dir=tmp_path / "a")
    run(cfg, out_dir=tmp_path / "b")
    a = strip_wall_time(tmp_path / "a" / "OdeConvergence.csv")
    b = strip_wall_time(tmp_path / "b" / "OdeConvergence.csv")
    assert a == b


def test_thread_pool_preserves_record_order(tmp_path, monkeypatch):
    path = write_config(tmp_path / "c.json")
    cfg = ExperimentConfig.from_json(path)
    serial = run(cfg, out_dir=tmp_path / "s")
    monkeypatch.setenv("BENCH_THREADS", "4")
    threaded = run(cfg, out_dir=tmp_path / "t")
    key = lambda rs: [(r.method, r.param, r.error, r.iterations) for r in rs]
    assert key(serial) == key(threaded)


def test_aliasing_run_labels(tmp_path):
    path = write_config(
        tmp_path / "c.json",
        experiment="OdeAliasing",
        K_values=[8, 12],
        L_policies=[[1, 0], [2, 0]],
    )
    cfg = ExperimentConfig.from_json(path)
    records = run(cfg, out_dir=tmp_path / "out")
    assert {r.method for r in records} == {"chebyshev_L=K", "chebyshev_L=2K"}
    assert (tmp_path / "out" / "OdeAliasing.csv").exists()


def test_pde_run_small(tmp_path):
    path = write_config(
        tmp_path / "c.json",
        experiment="PdeConvergence",
        N=4,
        K_values=[8, 16],
        steps_values=[32],
        sample_count=8,
        reference_steps=256,
        richardson_tol=1e-5,
    )
    cfg = ExperimentConfig.from_json(path)
    records = run(cfg, out_dir=tmp_path / "out")
    cheb = [r for r in records if r.method == "chebyshev"]
    assert cheb[1].error < cheb[0].error  # refinement helps
    assert {r.method for r in records} == {"chebyshev", "crank_nicolson", "rk4"}


# ---------------------------------------------------------------------- cli


def test_cli_run_and_fit(tmp_path, capsys):
    path = write_config(tmp_path / "c.json", steps_values=[32, 64, 128, 256])
    assert cli_main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "OdeConvergence" in out
    rc = cli_main(["fit", "--csv", str(tmp_path / "o" / "OdeConvergence.csv"),
                   "--method", "rk4"])
    assert rc == 0
    assert "order" in capsys.readouterr().out


def test_cli_missing_config_is_generic_failure(tmp_path, capsys):
    assert cli_main(["run", "--config", str(tmp_path / "nope.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_oracle_failure_exit_code(tmp_path, capsys):
    path = write_config(
        tmp_path / "c.json",
        experiment="PdeConvergence",
        N=4,
        K_values=[4],
        steps_values=[8],
        sample_count=4,
        reference_steps=8,
        richardson_tol=1e-30,
    )
    assert cli_main(["run", "--config", str(path)]) == 2
    assert "reference validation failed" in capsys.readouterr().err


def test_cli_paper_scale_flag(tmp_path, capsys):
    path = write_config(
        tmp_path / "c.json",
        K_values=[4, 8, 12, 16],
        paper_scale={"K_values": [4, 8]},
    )
    assert cli_main(["run", "--config", str(path), "--out", str(tmp_path / "o"),
                     "--paper-scale"]) == 0
    records = read_records(tmp_path / "o" / "OdeConvergence.csv")
    cheb_params = [r.param for r in records if r.method == "chebyshev"]
    assert cheb_params == [4, 8]
