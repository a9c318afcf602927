"""Reference time integrators: Crank-Nicolson, classical RK4, Picard.

All steppers march ``y' = rhs_op(t, y)`` with ``rhs_op(t, y) = -i H(t) y``
on a uniform grid whose first entry holds the initial datum.  The grid may
run backward (negative step); the returned trajectory is always sorted by
increasing time.  States are complex arrays of any shape (0-d for scalars).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .validation import check_uniform_grid

__all__ = [
    "StepMethod",
    "SteppedTrajectory",
    "InnerSolveError",
    "PicardDivergenceError",
    "crank_nicolson",
    "rk4",
    "picard_duhamel",
    "integrate_two_sided",
]


class StepMethod(enum.Enum):
    CRANK_NICOLSON = "crank_nicolson"
    RK4 = "rk4"
    PICARD = "picard"


@dataclass
class SteppedTrajectory:
    times: np.ndarray
    states: np.ndarray
    method: StepMethod

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("one state per time point required")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def state_at(self, t, tol=1e-10):
        idx = np.searchsorted(self.times, t)
        for j in (max(idx - 1, 0), min(idx, len(self.times) - 1)):
            if abs(self.times[j] - t) <= tol:
                return self.states[j]
        raise KeyError(f"time {t} not on the trajectory grid")


class InnerSolveError(RuntimeError):
    """Implicit-step solve failed to converge."""


class PicardDivergenceError(RuntimeError):
    """Picard residual grew over three consecutive iterations."""


def _as_trajectory(times, states, method):
    if times[1] < times[0]:
        times = times[::-1].copy()
        states = states[::-1].copy()
    return SteppedTrajectory(times, states, method)


def _cgnr(apply_a, apply_ah, b, x0, tol, maxit):
    # CG on the normal equations A^H A x = A^H b; A is a small perturbation
    # of the identity here, so this converges in a handful of iterations.
    x = x0.copy()
    ahb = apply_ah(b)
    target = tol * np.sqrt(np.vdot(ahb, ahb).real)
    r = ahb - apply_ah(apply_a(x))
    rs = np.vdot(r, r).real
    if np.sqrt(rs) <= target:
        return x
    p = r.copy()
    for _ in range(maxit):
        q = apply_ah(apply_a(p))
        alpha = rs / np.vdot(p, q).real
        x += alpha * p
        r -= alpha * q
        rs_next = np.vdot(r, r).real
        if np.sqrt(rs_next) <= target:
            return x
        p = r + (rs_next / rs) * p
        rs = rs_next
    raise InnerSolveError(
        f"implicit step not converged in {maxit} iterations "
        f"(residual {np.sqrt(rs):.3e}, target {target:.3e})"
    )


def crank_nicolson(
    rhs_op,
    y0,
    t_grid,
    midpoint: bool = False,
    inner_tol: float = 1e-13,
    inner_maxit: int = 200,
) -> SteppedTrajectory:
    """Trapezoidal (Crank-Nicolson) stepping, order 2.

    Solves ``(Id + (i dt/2) H(t_e)) y_{n+1} = (Id - (i dt/2) H(t_e')) y_n``
    where the evaluation times are the interval endpoints by default, or
    both the midpoint when ``midpoint=True``.  Scalar states use exact
    division; array states solve the (non-Hermitian) implicit system by CG
    on the normal equations, which relies on each ``H(t)`` being
    self-adjoint — true for every problem in this package.
    """
    grid, dt = check_uniform_grid(t_grid)
    y = np.asarray(y0, dtype=complex)
    states = np.empty((grid.size,) + y.shape, dtype=complex)
    states[0] = y
    scalar = y.ndim == 0

    for n in range(grid.size - 1):
        t_lo, t_hi = grid[n], grid[n + 1]
        if midpoint:
            t_exp = t_imp = 0.5 * (t_lo + t_hi)
        else:
            t_exp, t_imp = t_lo, t_hi
        if scalar:
            h_exp = 1j * complex(rhs_op(t_exp, np.asarray(1.0 + 0.0j)))
            h_imp = 1j * complex(rhs_op(t_imp, np.asarray(1.0 + 0.0j)))
            y = y * (1.0 - 0.5j * dt * h_exp) / (1.0 + 0.5j * dt * h_imp)
        else:
            b = y + (dt / 2.0) * rhs_op(t_exp, y)

            def apply_a(z):
                return z - (dt / 2.0) * rhs_op(t_imp, z)

            def apply_ah(z):
                return z + (dt / 2.0) * rhs_op(t_imp, z)

            y = _cgnr(apply_a, apply_ah, b, y, inner_tol, inner_maxit)
        states[n + 1] = y
    return _as_trajectory(grid, states, StepMethod.CRANK_NICOLSON)


def rk4(rhs_op, y0, t_grid) -> SteppedTrajectory:
    """Classical four-stage Runge-Kutta, order 4."""
    grid, dt = check_uniform_grid(t_grid)
    y = np.asarray(y0, dtype=complex)
    states = np.empty((grid.size,) + y.shape, dtype=complex)
    states[0] = y
    for n in range(grid.size - 1):
        t = grid[n]
        k1 = rhs_op(t, y)
        k2 = rhs_op(t + dt / 2.0, y + (dt / 2.0) * k1)
        k3 = rhs_op(t + dt / 2.0, y + (dt / 2.0) * k2)
        k4 = rhs_op(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[n + 1] = y
    return _as_trajectory(grid, states, StepMethod.RK4)


def picard_duhamel(
    free_op,
    bounded_op,
    forcing,
    u0,
    t_grid,
    iters: int,
    history=None,
) -> SteppedTrajectory:
    """Fixed-point (Picard) iteration on the Duhamel integral form.

    Iterates ``Phi(u)(t) = e^{-i t H0} u0 - i int_0^t e^{-i (t-s) H0}
    (f(s) - B(s) u(s)) ds`` starting from the free flow, with composite
    trapezoid in s; the fixed point solves ``i u' = H0 u - B(t) u + f``
    (note the sign carried by ``B``).  The free propagator enters only
    through ``free_op(dt, y) = e^{-i dt H0} y``, applied mode-wise/diagonal
    by the caller, so one sweep costs one pass over the grid.

    Parameters
    ----------
    free_op : callable ``(dt, y) -> y``
    bounded_op : callable ``(t, y) -> y`` or None for ``B = 0``
    forcing : callable ``t -> element`` or None for ``f = 0``
    u0 : initial datum at ``t = 0`` (the grid must start there)
    t_grid : uniform grid starting at 0 (may run backward)
    iters : number of Picard sweeps (>= 1)
    history : list, optional
        If given, the sup-norm update sizes ``max_n |u^{m} - u^{m-1}|`` are
        appended per sweep.

    Raises
    ------
    PicardDivergenceError
        If the update size grows over three consecutive sweeps.
    """
    grid, dt = check_uniform_grid(t_grid)
    if abs(grid[0]) > 1e-14:
        raise ValueError("Picard grid must start at t = 0")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    u0 = np.asarray(u0, dtype=complex)
    n = grid.size

    current = np.empty((n,) + u0.shape, dtype=complex)
    for j in range(n):
        current[j] = free_op(grid[j], u0)

    prev_size = None
    growth_streak = 0
    for _ in range(iters):
        g = np.empty_like(current)
        for j in range(n):
            term = -bounded_op(grid[j], current[j]) if bounded_op is not None else 0.0
            if forcing is not None:
                term = term + forcing(grid[j])
            g[j] = free_op(-grid[j], np.asarray(term, dtype=complex))
        accum = np.zeros_like(u0)
        new = np.empty_like(current)
        new[0] = u0
        for j in range(1, n):
            accum = accum + (dt / 2.0) * (g[j - 1] + g[j])
            new[j] = free_op(grid[j], u0 - 1j * accum)
        diff = (np.abs(new - current) ** 2).reshape(n, -1).sum(axis=1)
        size = float(np.sqrt(diff.max()))
        if history is not None:
            history.append(size)
        if prev_size is not None and size > prev_size:
            growth_streak += 1
            if growth_streak >= 3:
                raise PicardDivergenceError(
                    f"update size grew 3 sweeps in a row (last {size:.3e})"
                )
        else:
            growth_streak = 0
        prev_size = size
        current = new
    return _as_trajectory(grid, current, StepMethod.PICARD)


def integrate_two_sided(rhs_op, y0, n_steps: int, method="rk4", **kwargs) -> SteppedTrajectory:
    """March the interval (-1, 1) from the centered datum ``y0`` at t = 0.

    Runs ``n_steps // 2`` steps forward to +1 and the same number backward
    to -1 with the requested stepper, then splices the halves into one
    increasing trajectory (``n_steps`` must be even).
    """
    if n_steps < 2 or n_steps % 2 != 0:
        raise ValueError("n_steps must be an even integer >= 2")
    half = n_steps // 2
    forward = np.linspace(0.0, 1.0, half + 1)
    backward = np.linspace(0.0, -1.0, half + 1)
    stepper = {"rk4": rk4, "crank_nicolson": crank_nicolson}[
        method.value if isinstance(method, StepMethod) else str(method)
    ]
    fwd = stepper(rhs_op, y0, forward, **kwargs)
    bwd = stepper(rhs_op, y0, backward, **kwargs)
    times = np.concatenate([bwd.times[:-1], fwd.times])
    states = np.concatenate([bwd.states[:-1], fwd.states])
    return SteppedTrajectory(times, states, fwd.method)
