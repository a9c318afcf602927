"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def as_coeff_array(x, name="array"):
    """Coerce to a complex ndarray with at least one axis."""
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        raise ValueError(f"{name} must have at least one axis")
    return arr


def as_hilbert_element(x, name="element"):
    """Coerce to a complex ndarray; scalars become 0-d arrays."""
    return np.asarray(x, dtype=complex)


def check_truncations(K, L):
    if not (isinstance(K, (int, np.integer)) and isinstance(L, (int, np.integer))):
        raise ValueError("K and L must be integers")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if L < K:
        raise ValueError(f"L must be >= K, got L={L} < K={K}")
    return int(K), int(L)


def check_even_grid_size(N, minimum=2):
    if not isinstance(N, (int, np.integer)) or N < minimum or N % 2 != 0:
        raise ValueError(f"N must be an even integer >= {minimum}, got {N!r}")
    return int(N)


def check_uniform_grid(t_grid, name="t_grid"):
    """Validate a strictly monotone uniform 1-D grid; returns (grid, dt)."""
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError(f"{name} must be 1-D with at least two points")
    steps = np.diff(grid)
    dt = steps[0]
    if dt == 0 or np.sign(steps).min() != np.sign(steps).max():
        raise ValueError(f"{name} must be strictly monotone")
    if not np.allclose(steps, dt, rtol=1e-10, atol=1e-14 * max(1.0, abs(dt))):
        raise ValueError(f"{name} must be uniform")
    return grid, dt
