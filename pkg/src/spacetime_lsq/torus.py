"""Band-limited 2-D Fourier fields on the unit torus.

A field is an ``(N, N)`` complex array of coefficients ``c[k, l]`` of the
modes ``exp(2 pi i (k x + l y))`` with integer frequencies in
``[-N/2, N/2)``, stored in standard DFT order (negative frequencies in the
upper half of each axis).  The coefficient l2-norm equals the continuous
L2-norm on the torus since the modes are orthonormal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .validation import check_even_grid_size

__all__ = [
    "MovingCosinePotential",
    "frequencies",
    "grid_values",
    "field_from_values",
    "laplacian_symbol",
    "free_propagate",
    "potential_grid",
    "apply_potential",
    "skewed_potential",
]


@dataclass
class MovingCosinePotential:
    """Three travelling/static cosine waves:

    ``V(t, x, y) = A1 cos(2 pi (x - c1 t)) + A2 cos(2 pi (y - c2 t))
    + A3 cos(2 pi (x - y))`` with unit amplitudes by default.

    ``c1``/``c2`` are the drift speeds of the two travelling terms;
    ``amplitudes`` exists so degenerate (zero-potential) cases can be
    expressed in tests and configs.
    """

    c1: float = 1.0
    c2: float = 0.5
    amplitudes: tuple = (1.0, 1.0, 1.0)

    def max_norm(self) -> float:
        return float(sum(abs(a) for a in self.amplitudes))


def frequencies(N: int) -> np.ndarray:
    """Integer frequency of each slot along one axis (DFT order)."""
    N = check_even_grid_size(N)
    return np.fft.fftfreq(N, d=1.0 / N)


def grid_values(field: np.ndarray) -> np.ndarray:
    """Function values on the uniform grid ``x_j = j / N``.

    ``out[a, b] = sum_{k,l} c[k, l] exp(2 pi i (k a + l b) / N)``.
    """
    field = np.asarray(field, dtype=complex)
    n = field.shape[-1]
    return np.fft.ifft2(field, axes=(-2, -1)) * (n * n)


def field_from_values(values: np.ndarray) -> np.ndarray:
    """Inverse of :func:`grid_values` (exact DFT pair)."""
    values = np.asarray(values, dtype=complex)
    n = values.shape[-1]
    return np.fft.fft2(values, axes=(-2, -1)) / (n * n)


@lru_cache(maxsize=32)
def laplacian_symbol(N: int) -> np.ndarray:
    """Eigenvalues of ``-Laplacian`` per mode: ``4 pi^2 (k^2 + l^2)``."""
    k = frequencies(N)
    return 4.0 * np.pi**2 * (k[:, None] ** 2 + k[None, :] ** 2)


def free_propagate(field: np.ndarray, s: float) -> np.ndarray:
    """Apply ``exp(i s Laplacian)``: mode ``(k, l)`` gains
    ``exp(-i s 4 pi^2 (k^2 + l^2))``.  Unitary; ``s = 0`` is the identity.

    Works on a single field or on a stack of fields (leading axes).
    """
    field = np.asarray(field, dtype=complex)
    lam = laplacian_symbol(field.shape[-1])
    return field * np.exp(-1j * s * lam)


@lru_cache(maxsize=256)
def _grid_coords(N):
    x = np.arange(N) / N
    return x[:, None], x[None, :]


def potential_grid(pot: MovingCosinePotential, t: float, N: int) -> np.ndarray:
    """Grid samples of ``V(t, x, y)`` on the ``N x N`` collocation grid."""
    X, Y = _grid_coords(check_even_grid_size(N, minimum=4))
    a1, a2, a3 = pot.amplitudes
    two_pi = 2.0 * np.pi
    return (
        a1 * np.cos(two_pi * (X - pot.c1 * t))
        + a2 * np.cos(two_pi * (Y - pot.c2 * t))
        + a3 * np.cos(two_pi * (X - Y))
    )


def apply_potential(field: np.ndarray, pot: MovingCosinePotential, t: float) -> np.ndarray:
    """Band-limited multiplication by the potential at time ``t``.

    Defined as grid collocation: transform to values, multiply pointwise by
    ``V(t, .)``, transform back.  Since V only carries unit frequencies the
    product is exact except at the extreme modes ``|k| = N/2 - 1, N/2``,
    where grid aliasing folds the overflow; that aliased operator *is* the
    discrete operator solved and benchmarked throughout, so solver and
    reference always agree on it.  Self-adjoint (V is real).
    """
    field = np.asarray(field, dtype=complex)
    vg = potential_grid(pot, t, field.shape[-1])
    return field_from_values(vg * grid_values(field))


def skewed_potential(
    field: np.ndarray, pot: MovingCosinePotential, t: float, tau: float
) -> np.ndarray:
    """Free-frame (interaction-picture) view of the potential.

    Computes ``P(t)^H V(t tau) P(t)`` where ``P(t)`` multiplies mode
    ``(k, l)`` by ``exp(-i t tau 4 pi^2 (k^2 + l^2))``; self-adjoint for each
    fixed ``t`` and bounded by ``max |V| = sum |amplitudes|``.
    """
    s = t * tau
    return free_propagate(apply_potential(free_propagate(field, s), pot, s), -s)
