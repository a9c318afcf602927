"""Space-time least-squares engine.

The unknown is a first-kind Chebyshev series in time whose coefficients live
in some Hilbert space: a complex array ``u`` of shape ``(K, *spatial)`` with
``spatial = ()`` for scalar problems and ``(N, N)`` for 2-D Fourier fields.
The minimized functional is

    E_w(u) = ||u(0) - eta0||^2 + int_{-1}^{1} w(t) ||i u'(t) - B(t) u(t)||^2 dt

with the weight ``w(t) = sqrt(1 - t^2)`` and ``B(t)`` the problem's bounded
(skew) operator, applied through collocation at the Gauss-Chebyshev nodes.
Minimization is equivalent to the Hermitian positive-definite system
``Q u = rhs`` solved here matrix-free with preconditioned conjugate
gradient; the preconditioner inverts the free (``B = 0``) normal operator
exactly in closed form.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .chebyshev import (
    collocate,
    diff_to_second_kind,
    diff_transpose,
    eval_at_zero_row,
    extend,
    first_to_second_kind,
    gauss_cheb,
    second_to_first_transpose,
    truncate,
    uncollocate,
)
from .validation import as_hilbert_element, check_truncations

__all__ = [
    "LsqProblem",
    "SolveDiagnostics",
    "CgNonConvergence",
    "apply_residual",
    "apply_residual_adjoint",
    "apply_normal",
    "rhs",
    "free_precond_solve",
    "energy",
    "pcg_solve",
]


@dataclass
class LsqProblem:
    """One least-squares instance.

    Parameters
    ----------
    K : int
        Number of first-kind Chebyshev coefficients in time.
    L : int
        Number of collocation nodes, ``L >= K`` (``L = K`` is the default
        choice everywhere; larger L refines the treatment of the skew term
        but not the trial space).
    eta0 : ndarray
        Initial datum at ``t = 0``; its shape fixes the spatial shape.
    skew_op : callable ``(t, element) -> element``
        Application of the bounded operator ``B(t)`` (must be self-adjoint
        for each fixed t; the adjoint of the collocated residual relies on
        it).
    cg_tol : float
        Relative preconditioned-residual stopping tolerance.
    cg_maxit : int, optional
        Iteration cap; defaults to ``10 K``.
    skew_batch : callable ``(nodes, values) -> values``, optional
        Vectorized form of ``skew_op`` over all nodes at once (``values``
        has shape ``(L, *spatial)``).  Optional fast path; must agree with
        ``skew_op``.
    """

    K: int
    L: int
    eta0: np.ndarray
    skew_op: Callable[[float, np.ndarray], np.ndarray]
    cg_tol: float = 1e-12
    cg_maxit: Optional[int] = None
    skew_batch: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        self.K, self.L = check_truncations(self.K, self.L)
        self.eta0 = as_hilbert_element(self.eta0, "eta0")
        if not (0.0 < self.cg_tol < 1.0):
            raise ValueError(f"cg_tol must lie in (0, 1), got {self.cg_tol}")
        if self.cg_maxit is not None and self.cg_maxit < 1:
            raise ValueError("cg_maxit must be >= 1")

    @property
    def spatial_shape(self):
        return self.eta0.shape

    @property
    def maxit(self):
        return self.cg_maxit if self.cg_maxit is not None else 10 * self.K


@dataclass
class SolveDiagnostics:
    iterations: int
    final_relative_residual: float
    wall_time: float
    energy: float


class CgNonConvergence(RuntimeError):
    """Conjugate gradient failed to reach the tolerance within the cap."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


def _check_coefficients(problem, u):
    u = np.asarray(u, dtype=complex)
    if u.shape != (problem.K,) + problem.spatial_shape:
        raise ValueError(
            f"coefficients have shape {u.shape}, expected "
            f"{(problem.K,) + problem.spatial_shape}"
        )
    return u


def _skew_at_nodes(problem, values, nodes):
    if problem.skew_batch is not None:
        return np.asarray(problem.skew_batch(nodes, values), dtype=complex)
    out = np.empty_like(values)
    for idx, t in enumerate(nodes):
        out[idx] = problem.skew_op(float(t), values[idx])
    return out


def apply_residual(problem: LsqProblem, u) -> np.ndarray:
    """U-basis coefficients (length L) of ``i u' - I_L[B(t) u]``.

    The derivative part is exact; the skew part is interpolated at the L
    collocation nodes (collocate, apply ``B`` per node, uncollocate) and
    converted to the second-kind basis, which is exact for degree < L.
    """
    u = _check_coefficients(problem, u)
    quad = gauss_cheb(problem.L)
    padded = extend(u, problem.L)
    du = extend(diff_to_second_kind(u), problem.L)
    vals = collocate(padded, quad)
    vals = _skew_at_nodes(problem, vals, quad.nodes)
    skew_part = first_to_second_kind(uncollocate(vals, quad))
    return du - skew_part


def apply_residual_adjoint(problem: LsqProblem, g) -> np.ndarray:
    """Adjoint of :func:`apply_residual` (length-L U-coefficients -> length K).

    Uses the diagonal similarity of the collocation block: with
    ``C = diag(1/2, 1, ..., 1)`` in coefficient space, the adjoint of
    (uncollocate o B o collocate) is ``C^{-1} (uncollocate o B o collocate) C``
    provided each ``B(t)`` is self-adjoint.
    """
    g = np.asarray(g, dtype=complex)
    if g.shape != (problem.L,) + problem.spatial_shape:
        raise ValueError(
            f"residual coefficients have shape {g.shape}, expected "
            f"{(problem.L,) + problem.spatial_shape}"
        )
    quad = gauss_cheb(problem.L)
    deriv_term = diff_transpose(truncate(g, problem.K))

    h = second_to_first_transpose(g)
    h[0] *= 0.5
    vals = collocate(h, quad)
    vals = _skew_at_nodes(problem, vals, quad.nodes)
    h = uncollocate(vals, quad)
    h[0] *= 2.0
    return deriv_term - truncate(h, problem.K)


def _initial_value(problem, u):
    row = eval_at_zero_row(problem.K)
    return np.tensordot(row, u, axes=(0, 0))


def apply_normal(problem: LsqProblem, u) -> np.ndarray:
    """Matrix-free normal operator: ``(pi/2) R^H R u + J^H J u``.

    Hermitian positive definite; ``J u = u(0)`` and the ``pi/2`` prefactor
    is the L2(w)-norm of each second-kind basis function.
    """
    u = _check_coefficients(problem, u)
    quadratic = (np.pi / 2.0) * apply_residual_adjoint(problem, apply_residual(problem, u))
    row = eval_at_zero_row(problem.K)
    u0 = _initial_value(problem, u)
    shape = (problem.K,) + (1,) * len(problem.spatial_shape)
    return quadratic + row.reshape(shape) * u0[np.newaxis]


def rhs(problem: LsqProblem) -> np.ndarray:
    """Right-hand side of the normal equations: entry k is ``T_k(0) eta0``."""
    row = eval_at_zero_row(problem.K)
    shape = (problem.K,) + (1,) * problem.eta0.ndim
    return row.reshape(shape) * problem.eta0[np.newaxis]


def free_precond_solve(F) -> np.ndarray:
    """Exact inverse of the free normal operator.

    The free (skew = 0) normal operator acts as
    ``(Q0 u)_k = (pi/2) k^2 u_k + T_k(0) u(0)``, which inverts in closed
    form: testing against T_0 gives ``u(0) = F_0``, the k >= 1 rows give
    ``u_k = (2 / (pi k^2)) (F_k - T_k(0) F_0)``, and ``u_0`` follows from
    ``u(0) = sum_k T_k(0) u_k``.
    """
    F = np.asarray(F, dtype=complex)
    K = F.shape[0]
    row = eval_at_zero_row(K)
    out = np.zeros_like(F)
    if K > 1:
        k = np.arange(1, K, dtype=float)
        scale = (2.0 / (np.pi * k**2)).reshape((K - 1,) + (1,) * (F.ndim - 1))
        signs = row[1:].reshape((K - 1,) + (1,) * (F.ndim - 1))
        out[1:] = scale * (F[1:] - signs * F[0][np.newaxis])
        out[0] = F[0] - np.tensordot(row[1:], out[1:], axes=(0, 0))
    else:
        out[0] = F[0]
    return out


def energy(problem: LsqProblem, u) -> float:
    """The value ``E_w(u)`` (nonnegative by construction).

    Evaluated in residual form
    ``||u(0) - eta0||^2 + (pi/2) sum_l ||(R u)_l||^2``, which coincides with
    ``<Q u, u> - 2 Re <rhs, u> + ||eta0||^2``.
    """
    u = _check_coefficients(problem, u)
    mismatch = _initial_value(problem, u) - problem.eta0
    r = apply_residual(problem, u)
    return float(
        np.vdot(mismatch, mismatch).real + (np.pi / 2.0) * np.vdot(r, r).real
    )


def pcg_solve(problem: LsqProblem, callback=None):
    """Preconditioned conjugate gradient for the normal equations.

    Stops when ``sqrt(<r, P^{-1} r>) / sqrt(<b, P^{-1} b>) <= cg_tol`` with
    ``P`` the free normal operator.  A zero right-hand side returns the zero
    solution with 0 iterations; a problem with ``skew_op == 0`` converges in
    exactly one iteration because the preconditioner is then exact.

    Parameters
    ----------
    problem : LsqProblem
    callback : callable, optional
        Called as ``callback(x)`` with the current iterate after each
        update (scipy-style).

    Returns
    -------
    (ndarray, SolveDiagnostics)

    Raises
    ------
    CgNonConvergence
        If the tolerance is not met within ``problem.maxit`` iterations;
        the exception carries the diagnostics collected so far.
    """
    t_start = time.perf_counter()
    b = rhs(problem)
    x = np.zeros_like(b)
    if np.vdot(b, b).real == 0.0:
        diag = SolveDiagnostics(0, 0.0, time.perf_counter() - t_start, energy(problem, x))
        return x, diag

    r = b.copy()
    z = free_precond_solve(r)
    rz = np.vdot(r, z).real
    denom = np.sqrt(rz)
    p = z.copy()
    iterations = 0
    rel = np.inf
    for it in range(1, problem.maxit + 1):
        q = apply_normal(problem, p)
        pq = np.vdot(p, q).real
        if pq <= 0.0:
            raise CgNonConvergence(
                f"conjugate gradient breakdown at iteration {it}: <p, Qp> = {pq:.3e}",
                SolveDiagnostics(it, rel, time.perf_counter() - t_start, np.nan),
            )
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        z = free_precond_solve(r)
        rz_next = np.vdot(r, z).real
        rel = np.sqrt(max(rz_next, 0.0)) / denom
        iterations = it
        if callback is not None:
            callback(x.copy())
        if rel <= problem.cg_tol:
            break
        p = z + (rz_next / rz) * p
        rz = rz_next
    if rel > problem.cg_tol:
        diag = SolveDiagnostics(
            iterations, rel, time.perf_counter() - t_start, energy(problem, x)
        )
        raise CgNonConvergence(
            f"no convergence in {problem.maxit} iterations "
            f"(relative residual {rel:.3e} > {problem.cg_tol:.3e})",
            diag,
        )
    diag = SolveDiagnostics(
        iterations, float(rel), time.perf_counter() - t_start, energy(problem, x)
    )
    return x, diag
