import numpy as np
import pytest

from spacetime_lsq.baselines import (
    InnerSolveError,
    PicardDivergenceError,
    SteppedTrajectory,
    crank_nicolson,
    integrate_two_sided,
    picard_duhamel,
    rk4,
)
from spacetime_lsq.ode import CosineOde, exact_solution

rng = np.random.default_rng(99)

ODE = CosineOde(a=5.0, omega=20.0)


def cosine_rhs(t, y):
    return -1j * ODE.a * np.cos(ODE.omega * t) * y


def two_sided_error(method, n_steps):
    traj = integrate_two_sided(cosine_rhs, np.asarray(1.0 + 0.0j), n_steps, method=method)
    return float(np.max(np.abs(traj.states - exact_solution(ODE, traj.times))))


# ------------------------------------------------------------ trajectories


def test_trajectory_requires_increasing_times():
    with pytest.raises(ValueError):
        SteppedTrajectory(np.array([0.0, 0.5, 0.5]), np.zeros((3,), dtype=complex), "rk4")
    with pytest.raises(ValueError):
        SteppedTrajectory(np.array([0.0, 1.0]), np.zeros((3,), dtype=complex), "rk4")


def test_state_at_exact_grid_lookup():
    times = np.linspace(-1, 1, 5)
    states = np.arange(5).astype(complex)
    traj = SteppedTrajectory(times, states, "rk4")
    assert traj.state_at(0.0) == 2.0
    assert traj.state_at(-1.0) == 0.0
    with pytest.raises(KeyError):
        traj.state_at(0.3)


def test_two_sided_grid_structure():
    traj = integrate_two_sided(cosine_rhs, np.asarray(1.0 + 0.0j), 8)
    np.testing.assert_allclose(traj.times, np.linspace(-1, 1, 9), atol=1e-15)
    assert abs(traj.state_at(0.0) - 1.0) < 1e-15  # datum is imposed at t = 0
    with pytest.raises(ValueError):
        integrate_two_sided(cosine_rhs, np.asarray(1.0 + 0.0j), 7)


def test_two_sided_matches_one_sided_halves():
    y0 = np.asarray(1.0 + 0.0j)
    traj = integrate_two_sided(cosine_rhs, y0, 64, method="rk4")
    fwd = rk4(cosine_rhs, y0, np.linspace(0.0, 1.0, 33))
    np.testing.assert_allclose(traj.states[32:], fwd.states, atol=1e-14)
    # a decreasing input grid comes back flipped to increasing time
    bwd = rk4(cosine_rhs, y0, np.linspace(0.0, -1.0, 33))
    assert bwd.times[0] == -1.0
    np.testing.assert_allclose(traj.states[:33], bwd.states, atol=1e-14)


# ------------------------------------------------------------------ orders


def test_crank_nicolson_is_second_order():
    e1, e2 = two_sided_error("crank_nicolson", 512), two_sided_error("crank_nicolson", 1024)
    assert 3.6 < e1 / e2 < 4.4


def test_rk4_is_fourth_order():
    e1, e2 = two_sided_error("rk4", 256), two_sided_error("rk4", 512)
    assert 13.0 < e1 / e2 < 19.0


def test_rk4_reaches_roundoff_floor():
    assert two_sided_error("rk4", 2**13) < 1e-12


def test_midpoint_variant_is_second_order_too():
    def err(n):
        grid = np.linspace(0.0, 1.0, n + 1)
        traj = crank_nicolson(cosine_rhs, np.asarray(1.0 + 0.0j), grid, midpoint=True)
        return float(np.max(np.abs(traj.states - exact_solution(ODE, traj.times))))

    assert 3.6 < err(512) / err(1024) < 4.4


# ------------------------------------------------- conservation / stability


def test_cn_scalar_norm_conservation_frozen():
    # frozen H: each update is a Cayley factor of modulus exactly one
    grid = np.linspace(0.0, 1.0, 65)
    traj = crank_nicolson(lambda t, y: -1j * 5.0 * y, np.asarray(1.0 + 0.0j), grid)
    assert np.max(np.abs(np.abs(traj.states) - 1.0)) < 1e-13


def test_cn_midpoint_conserves_norm_even_time_dependent():
    # with both evaluations at the midpoint the factor stays unimodular
    grid = np.linspace(0.0, 1.0, 65)
    traj = crank_nicolson(cosine_rhs, np.asarray(1.0 + 0.0j), grid, midpoint=True)
    assert np.max(np.abs(np.abs(traj.states) - 1.0)) < 1e-13


def test_cn_array_norm_conservation_frozen_hermitian():
    # y' = -i H y with H constant Hermitian: the trapezoid update is a Cayley
    # transform, unitary up to the inner CGNR tolerance.
    n = 6
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = 0.5 * (A + A.conj().T)

    def rhs_op(t, y):
        return -1j * (H @ y)

    y0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    grid = np.linspace(0.0, 1.0, 65)
    traj = crank_nicolson(rhs_op, y0, grid)
    norms = np.linalg.norm(traj.states, axis=1)
    assert np.max(np.abs(norms - norms[0])) < 1e-12 * norms[0] * grid.size


def test_cn_array_matches_scalar_path():
    grid = np.linspace(0.0, 1.0, 33)
    scalar = crank_nicolson(cosine_rhs, np.asarray(1.0 + 0.0j), grid)
    vector = crank_nicolson(cosine_rhs, np.asarray([1.0 + 0.0j]), grid)
    np.testing.assert_allclose(vector.states[:, 0], scalar.states, atol=1e-11)


def test_cn_stable_at_large_step():
    # unconditional stability: giant steps stay on the unit circle
    grid = np.linspace(0.0, 100.0, 6)
    traj = crank_nicolson(lambda t, y: -1j * 50.0 * y, np.asarray(1.0 + 0.0j), grid)
    assert np.max(np.abs(np.abs(traj.states) - 1.0)) < 1e-12


def test_cn_inner_solver_failure_raises():
    n = 8
    A = rng.standard_normal((n, n))
    H = A + A.T + 50.0 * np.eye(n)

    def rhs_op(t, y):
        return -1j * (H @ y)

    y0 = np.ones(n, dtype=complex)
    with pytest.raises(InnerSolveError):
        crank_nicolson(rhs_op, y0, np.linspace(0.0, 1.0, 5), inner_maxit=1)


def test_grid_must_be_uniform():
    bad = np.array([0.0, 0.1, 0.3, 0.4])
    with pytest.raises(ValueError):
        crank_nicolson(cosine_rhs, np.asarray(1.0 + 0.0j), bad)
    with pytest.raises(ValueError):
        rk4(cosine_rhs, np.asarray(1.0 + 0.0j), bad)


# ------------------------------------------------------------------ picard


def test_picard_converges_on_scalar_contraction():
    lam, b = 3.0, 0.2
    exact = lambda t: np.exp(-1j * (lam - b) * t)

    free_op = lambda dt, y: np.exp(-1j * dt * lam) * y
    bounded_op = lambda t, y: b * y
    grid = np.linspace(0.0, 1.0, 513)
    history = []
    traj = picard_duhamel(free_op, bounded_op, None, np.asarray(1.0 + 0.0j),
                          grid, iters=40, history=history)
    err = np.max(np.abs(traj.states - exact(traj.times)))
    assert err < 5e-5  # trapezoid floor at this resolution
    assert len(history) == 40
    assert history[-1] < 1e-14  # fixed point reached


def test_picard_free_flow_with_forcing():
    # B = 0: u(t) = e^{-i t lam} u0 - i int_0^t e^{-i (t-s) lam} f ds, f const
    lam, f0 = 2.0, 0.3 + 0.1j
    free_op = lambda dt, y: np.exp(-1j * dt * lam) * y
    forcing = lambda t: np.asarray(f0)
    grid = np.linspace(0.0, 1.0, 1025)
    traj = picard_duhamel(free_op, None, forcing, np.asarray(1.0 + 0.0j), grid, iters=3)
    t = traj.times
    exact = np.exp(-1j * lam * t) * (1.0 + 0.0j) - 1j * f0 * (
        (1.0 - np.exp(-1j * lam * t)) / (1j * lam)
    )
    assert np.max(np.abs(traj.states - exact)) < 1e-5


def test_picard_continuity_estimate():
    # ||u||_C0 <= sqrt(2) (|u0|^2 + T ||f||^2)^{1/2} on contraction instances
    n = 4
    d = np.array([1.0, -2.0, 0.5, 3.0])
    M = rng.standard_normal((n, n))
    M = 0.05 * (M + M.T)

    free_op = lambda dt, y: np.exp(-1j * dt * d) * y
    bounded_op = lambda t, y: np.cos(t) * (M @ y)
    f_of = lambda t: np.array([np.sin(3 * t), 0.1, 0.0, 0.2 * t], dtype=complex)
    u0 = np.array([0.3, 0.0, 0.1j, 0.0])
    T = 1.0
    grid = np.linspace(0.0, T, 257)
    traj = picard_duhamel(free_op, bounded_op, f_of, u0, grid, iters=30)
    sup_u = np.max(np.linalg.norm(traj.states, axis=1))
    f_sq = np.trapezoid([np.linalg.norm(f_of(t)) ** 2 for t in grid], grid)
    bound = np.sqrt(2.0) * np.sqrt(np.linalg.norm(u0) ** 2 + T * f_sq)
    assert sup_u <= bound + 1e-8


def test_picard_divergence_detected():
    lam, b = 1.0, 40.0  # far outside the contraction regime
    free_op = lambda dt, y: np.exp(-1j * dt * lam) * y
    bounded_op = lambda t, y: b * y
    grid = np.linspace(0.0, 1.0, 129)
    history = []
    with pytest.raises(PicardDivergenceError):
        picard_duhamel(free_op, bounded_op, None, np.asarray(1.0 + 0.0j),
                       grid, iters=60, history=history)
    assert len(history) >= 3
    assert history[-1] > history[-2] > history[-3]


def test_picard_grid_must_start_at_zero():
    free_op = lambda dt, y: y
    with pytest.raises(ValueError):
        picard_duhamel(free_op, None, None, np.asarray(1.0 + 0.0j),
                       np.linspace(0.5, 1.0, 9), iters=2)
    with pytest.raises(ValueError):
        picard_duhamel(free_op, None, None, np.asarray(1.0 + 0.0j),
                       np.linspace(0.0, 1.0, 9), iters=0)


def test_picard_backward_grid_supported():
    lam = 2.0
    free_op = lambda dt, y: np.exp(-1j * dt * lam) * y
    grid = np.linspace(0.0, -1.0, 257)
    traj = picard_duhamel(free_op, None, None, np.asarray(1.0 + 0.0j), grid, iters=2)
    # returned trajectory is re-ordered to increasing time
    assert traj.times[0] == -1.0 and traj.times[-1] == 0.0
    np.testing.assert_allclose(
        traj.states, np.exp(-1j * lam * traj.times), atol=1e-12
    )
