"""Scalar model problem: ``i u' = a cos(omega t) u`` on (-1, 1).

The closed-form solution ``eta0 * exp(-i a sin(omega t) / omega)`` makes
this the calibration target for the space-time solver: errors are sampled
pointwise against it, so every digit of a convergence curve is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .chebyshev import ChebKind, ChebSeries, cheb_eval
from .lsq import LsqProblem, pcg_solve

__all__ = [
    "CosineOde",
    "exact_solution",
    "build_problem",
    "solve_ode",
    "sup_error",
    "affine_interval_map",
    "CosineOdeSolver",
]


@dataclass
class CosineOde:
    """Amplitude ``a``, frequency ``omega``, initial value ``eta0``."""

    a: float
    omega: float
    eta0: complex = 1.0 + 0.0j


def exact_solution(ode: CosineOde, t):
    """``eta0 * exp(-i a sin(omega t) / omega)``; the ``omega = 0`` limit is
    ``eta0 * exp(-i a t)``.  Unit-modulus times ``|eta0|`` for every t."""
    t = np.asarray(t, dtype=float)
    if ode.omega == 0.0:
        phase = ode.a * t
    else:
        phase = ode.a * np.sin(ode.omega * t) / ode.omega
    out = ode.eta0 * np.exp(-1j * phase)
    return complex(out) if out.ndim == 0 else out


def build_problem(
    ode: CosineOde,
    K: int,
    L: Optional[int] = None,
    cg_tol: float = 1e-12,
    cg_maxit: Optional[int] = None,
) -> LsqProblem:
    """Least-squares instance for the scalar problem (spatial shape ``()``)."""
    if L is None:
        L = K
    a, omega = ode.a, ode.omega

    def skew_op(t, z):
        return a * np.cos(omega * t) * z

    def skew_batch(nodes, values):
        return (a * np.cos(omega * nodes)) * values

    return LsqProblem(
        K=K,
        L=L,
        eta0=np.asarray(complex(ode.eta0)),
        skew_op=skew_op,
        cg_tol=cg_tol,
        cg_maxit=cg_maxit,
        skew_batch=skew_batch,
    )


def solve_ode(ode: CosineOde, K, L=None, cg_tol=1e-12, cg_maxit=None):
    """Solve and wrap the minimizer as a first-kind :class:`ChebSeries`.

    Returns ``(series, diagnostics)``.
    """
    problem = build_problem(ode, K, L, cg_tol=cg_tol, cg_maxit=cg_maxit)
    coeffs, diag = pcg_solve(problem)
    return ChebSeries(ChebKind.FIRST, coeffs), diag


def sup_error(u, ode: CosineOde, num_points: int = 1000) -> float:
    """Max pointwise error against the exact solution.

    Sampled at ``num_points`` uniformly spaced t in [-1, 1], endpoints
    included.
    """
    ts = np.linspace(-1.0, 1.0, num_points)
    vals = cheb_eval(u, ts)
    return float(np.max(np.abs(vals - exact_solution(ode, ts))))


def affine_interval_map(t0: float, t1: float):
    """Affine change of variables between ``(t0, t1)`` and ``(-1, 1)``.

    Returns ``(to_unit, from_unit, scale)`` with ``scale = (t1 - t0) / 2``;
    posing a problem on a general interval multiplies its right-hand side by
    ``scale`` after substitution (the same rescaling the torus problem uses
    for its physical half-width).
    """
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    mid = 0.5 * (t0 + t1)
    scale = 0.5 * (t1 - t0)

    def to_unit(t):
        return (np.asarray(t, dtype=float) - mid) / scale

    def from_unit(s):
        return mid + scale * np.asarray(s, dtype=float)

    return to_unit, from_unit, scale


class CosineOdeSolver(BaseEstimator):
    """Estimator-style front-end for the scalar solver.

    ``fit`` consumes a :class:`CosineOde` and stores the Chebyshev
    coefficients; ``predict`` evaluates the fitted series at times in
    [-1, 1].  Hyperparameters follow the usual get_params/set_params
    protocol so the class clones cleanly.
    """

    def __init__(self, K=64, L=None, cg_tol=1e-12, cg_maxit=None):
        self.K = K
        self.L = L
        self.cg_tol = cg_tol
        self.cg_maxit = cg_maxit

    def fit(self, ode: CosineOde, y=None):
        series, diag = solve_ode(
            ode, self.K, self.L, cg_tol=self.cg_tol, cg_maxit=self.cg_maxit
        )
        self.series_ = series
        self.diagnostics_ = diag
        self.n_iter_ = diag.iterations
        return self

    def predict(self, t):
        check_is_fitted(self, "series_")
        return cheb_eval(self.series_, t)
