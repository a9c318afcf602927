"""Benchmark experiments: convergence curves, iteration counts, timings.

Each experiment consumes a JSON config, produces an ordered list of
:class:`ConvergenceRecord` rows, and writes ``<Experiment>.csv`` plus a
log-log ``<Experiment>.svg``.  Record values are deterministic for a fixed
config; ``wall_time_s`` is the only column that varies between runs.
"""

from __future__ import annotations

import csv
import enum
import json
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields as dataclass_fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import ode as ode_mod
from . import pde as pde_mod
from .baselines import integrate_two_sided
from .lsq import pcg_solve
from .ode import CosineOde, sup_error
from .pde import PeriodicSchrodinger, c0_error, gaussian_initial_field, reference_solution
from .torus import MovingCosinePotential

__all__ = [
    "Experiment",
    "ExperimentConfig",
    "ConvergenceRecord",
    "run",
    "fit_order",
    "read_records",
    "write_csv",
]


class Experiment(enum.Enum):
    ODE_CONVERGENCE = "OdeConvergence"
    ODE_ALIASING = "OdeAliasing"
    PDE_CONVERGENCE = "PdeConvergence"
    PDE_TIMING = "PdeTiming"
    PDE_ERROR_VS_TIME = "PdeErrorVsTime"


_PDE_EXPERIMENTS = {
    Experiment.PDE_CONVERGENCE,
    Experiment.PDE_TIMING,
    Experiment.PDE_ERROR_VS_TIME,
}

_TIMING_EXPERIMENTS = {Experiment.PDE_TIMING, Experiment.PDE_ERROR_VS_TIME}


@dataclass
class ConvergenceRecord:
    method: str
    param: int
    error: float
    iterations: Optional[int]
    wall_time_s: float


@dataclass
class ExperimentConfig:
    """Every physical and numerical constant of a run lives here, so CI and
    paper-scale runs differ only by config (plus the --paper-scale merge)."""

    experiment: Experiment
    # scalar problem
    a: float = 5.0
    omega: float = 20.0
    eta0: complex = 1.0 + 0.0j
    # sweeps
    K_values: list = field(default_factory=lambda: [8, 16, 24, 32, 40, 48, 56, 64])
    steps_values: list = field(default_factory=lambda: [2**p for p in range(5, 13)])
    L_policies: list = field(default_factory=lambda: [[1, 0], [1, 8], [2, 0]])
    tau_values: list = field(default_factory=lambda: [1.0, 0.5, 0.25, 0.125])
    # torus problem
    N: int = 16
    tau: float = 0.5
    c1: float = 1.0
    c2: float = 0.5
    amplitudes: list = field(default_factory=lambda: [1.0, 1.0, 1.0])
    sigma: Optional[float] = None
    sample_count: int = 32
    reference_steps: int = 4096
    richardson_tol: float = 1e-9
    # solver knobs
    cg_tol: float = 1e-12
    cg_maxit: Optional[int] = None
    seed: int = 0
    timing_reps: int = 3
    out: Optional[str] = None

    def __post_init__(self):
        for name in ("K_values", "steps_values", "L_policies", "tau_values"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if self.experiment in _PDE_EXPERIMENTS:
            bad = [s for s in self.steps_values if s % self.sample_count != 0]
            if bad:
                raise ValueError(
                    f"steps_values {bad} not divisible by sample_count={self.sample_count}"
                )
            if self.reference_steps % self.sample_count != 0:
                raise ValueError("reference_steps must be divisible by sample_count")

    @classmethod
    def from_json(cls, path, paper_scale: bool = False) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        overrides = data.pop("paper_scale", {})
        if paper_scale:
            data.update(overrides)
        if "experiment" not in data:
            raise ValueError("config must name an 'experiment'")
        data["experiment"] = Experiment(data["experiment"])
        if "eta0" in data and isinstance(data["eta0"], (list, tuple)):
            data["eta0"] = complex(data["eta0"][0], data["eta0"][1])
        known = {f.name for f in dataclass_fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def _thread_count():
    return max(1, int(os.environ.get("BENCH_THREADS", "1")))


def _pmap(fn, items, parallel=True):
    n = _thread_count()
    if not parallel or n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _timed(fn, reps):
    elapsed = []
    result = None
    for _ in range(reps):
        t0 = time.perf_counter()
        result = fn()
        elapsed.append(time.perf_counter() - t0)
    return result, statistics.median(elapsed)


def _ode_of(cfg) -> CosineOde:
    return CosineOde(a=cfg.a, omega=cfg.omega, eta0=cfg.eta0)


def _ode_rhs(ode):
    def rhs_op(t, y):
        return -1j * ode.a * np.cos(ode.omega * t) * y

    return rhs_op


def _cheb_record(cfg, ode, K, L, label, reps=1):
    problem = ode_mod.build_problem(ode, K, L, cg_tol=cfg.cg_tol, cg_maxit=cfg.cg_maxit)
    (coeffs, diag), wall = _timed(lambda: pcg_solve(problem), reps)
    err = sup_error(coeffs, ode)
    return ConvergenceRecord(label, K, err, diag.iterations, wall)


def _baseline_ode_record(cfg, ode, steps, method, reps=1):
    rhs_op = _ode_rhs(ode)
    y0 = np.asarray(complex(ode.eta0))
    traj, wall = _timed(lambda: integrate_two_sided(rhs_op, y0, steps, method=method), reps)
    exact = ode_mod.exact_solution(ode, traj.times)
    err = float(np.max(np.abs(traj.states - exact)))
    return ConvergenceRecord(method, steps, err, None, wall)


def _run_ode_convergence(cfg):
    ode = _ode_of(cfg)
    records = _pmap(lambda K: _cheb_record(cfg, ode, K, K, "chebyshev"), cfg.K_values)
    records += _pmap(
        lambda s: _baseline_ode_record(cfg, ode, s, "crank_nicolson"), cfg.steps_values
    )
    records += _pmap(lambda s: _baseline_ode_record(cfg, ode, s, "rk4"), cfg.steps_values)
    return records


def _policy_label(mult, add):
    if mult == 1:
        return "chebyshev_L=K" if add == 0 else f"chebyshev_L=K+{add}"
    return f"chebyshev_L={mult}K"


def _run_ode_aliasing(cfg):
    ode = _ode_of(cfg)
    records = []
    for mult, add in cfg.L_policies:
        label = _policy_label(mult, add)
        records += _pmap(
            lambda K, m=mult, a=add, lab=label: _cheb_record(
                cfg, ode, K, int(m * K) + a, lab
            ),
            cfg.K_values,
        )
    return records


def _pde_setup(cfg, tau=None):
    pot = MovingCosinePotential(cfg.c1, cfg.c2, tuple(cfg.amplitudes))
    u0 = gaussian_initial_field(cfg.N, cfg.sigma)
    p = PeriodicSchrodinger(cfg.N, cfg.tau if tau is None else tau, pot, u0)
    samples = np.linspace(-1.0, 1.0, cfg.sample_count + 1)
    reference = reference_solution(
        p, samples, steps=cfg.reference_steps, richardson_tol=cfg.richardson_tol
    )
    return p, samples, reference


def _pde_cheb_record(cfg, p, samples, reference, K, reps=1):
    problem = pde_mod.build_problem(p, K, cg_tol=cfg.cg_tol, cg_maxit=cfg.cg_maxit)
    (coeffs, diag), wall = _timed(lambda: pcg_solve(problem), reps)
    err = c0_error(coeffs, reference, samples)
    return ConvergenceRecord("chebyshev", K, err, diag.iterations, wall)


def _pde_baseline_record(cfg, p, samples, reference, steps, method, reps=1):
    rhs_op = pde_mod._interaction_rhs(p)
    traj, wall = _timed(
        lambda: integrate_two_sided(rhs_op, p.u0, steps, method=method), reps
    )
    err = max(
        float(np.linalg.norm(traj.state_at(t) - reference[i]))
        for i, t in enumerate(samples)
    )
    return ConvergenceRecord(method, steps, err, None, wall)


def _run_pde(cfg, reps, parallel):
    p, samples, reference = _pde_setup(cfg)
    records = _pmap(
        lambda K: _pde_cheb_record(cfg, p, samples, reference, K, reps),
        cfg.K_values,
        parallel=parallel,
    )
    for method in ("crank_nicolson", "rk4"):
        records += _pmap(
            lambda s, m=method: _pde_baseline_record(cfg, p, samples, reference, s, m, reps),
            cfg.steps_values,
            parallel=parallel,
        )
    return records


_DISPATCH = {
    Experiment.ODE_CONVERGENCE: lambda cfg: _run_ode_convergence(cfg),
    Experiment.ODE_ALIASING: lambda cfg: _run_ode_aliasing(cfg),
    Experiment.PDE_CONVERGENCE: lambda cfg: _run_pde(cfg, reps=1, parallel=True),
    Experiment.PDE_TIMING: lambda cfg: _run_pde(cfg, reps=cfg.timing_reps, parallel=False),
    Experiment.PDE_ERROR_VS_TIME: lambda cfg: _run_pde(
        cfg, reps=cfg.timing_reps, parallel=False
    ),
}


def write_csv(records, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "param", "error", "iterations", "wall_time_s"])
        for r in records:
            writer.writerow(
                [
                    r.method,
                    r.param,
                    repr(float(r.error)),
                    "" if r.iterations is None else r.iterations,
                    repr(float(r.wall_time_s)),
                ]
            )


def read_records(path):
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                ConvergenceRecord(
                    method=row["method"],
                    param=int(row["param"]),
                    error=float(row["error"]),
                    iterations=int(row["iterations"]) if row["iterations"] else None,
                    wall_time_s=float(row["wall_time_s"]),
                )
            )
    return records


def _write_plot(records, path, experiment):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    by_method = {}
    for r in records:
        by_method.setdefault(r.method, []).append(r)
    for method, rows in by_method.items():
        rows = sorted(rows, key=lambda r: r.param)
        if experiment is Experiment.PDE_TIMING:
            xs = [r.param for r in rows]
            ys = [r.wall_time_s for r in rows]
            ax.set_xlabel("K / steps")
            ax.set_ylabel("wall time [s]")
        elif experiment is Experiment.PDE_ERROR_VS_TIME:
            xs = [r.wall_time_s for r in rows]
            ys = [r.error for r in rows]
            ax.set_xlabel("wall time [s]")
            ax.set_ylabel("C0 error")
        else:
            xs = [r.param for r in rows]
            ys = [r.error for r in rows]
            ax.set_xlabel("K / steps")
            ax.set_ylabel("sup error")
        pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
        if pts:
            ax.loglog(*zip(*pts), marker="o", label=method)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def run(config: ExperimentConfig, out_dir=None):
    """Execute one experiment; writes CSV + SVG and returns the records."""
    out = Path(out_dir if out_dir is not None else (config.out or "."))
    out.mkdir(parents=True, exist_ok=True)
    records = _DISPATCH[config.experiment](config)
    write_csv(records, out / f"{config.experiment.value}.csv")
    _write_plot(records, out / f"{config.experiment.value}.svg", config.experiment)
    return records


def fit_order(records, method=None, floor=1e-12) -> float:
    """Least-squares convergence order from (param, error) pairs.

    Records at or below the roundoff floor are dropped; the fit then uses
    the finest half of what remains (at least 4 points) so saturated
    coarse-grid points do not pollute the slope.  Returns the positive
    order (minus the log-log slope).
    """
    rows = [r for r in records if method is None or r.method == method]
    rows = sorted(rows, key=lambda r: r.param)
    rows = [r for r in rows if r.error > floor]
    if len(rows) < 4:
        raise ValueError("need at least 4 records above the roundoff floor")
    window = rows[-max(4, (len(rows) + 1) // 2):]
    slope = np.polyfit(
        np.log([r.param for r in window]), np.log([r.error for r in window]), 1
    )[0]
    return float(-slope)
