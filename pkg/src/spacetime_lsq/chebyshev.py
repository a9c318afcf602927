"""Chebyshev machinery for the time direction.

Everything here works on coefficient arrays whose *first* axis indexes the
polynomial degree.  A plain 1-D array is a scalar-valued series; an array of
shape ``(K, N, N)`` is a series of 2-D Fourier fields, and so on.  The four
structural operators (:func:`eval_at_zero_row`, :func:`extend`,
:func:`diff_to_second_kind`, :func:`first_to_second_kind`) are exact sparse
recurrences, never assembled as matrices.

Conventions
-----------
* ``T_k`` denotes the first-kind polynomials (``T_0 = 1``, ``T_1 = t``),
  ``U_k`` the second kind (``U_0 = 1``, ``U_1 = 2t``), both with the usual
  three-term recurrence ``p_{k+1} = 2 t p_k - p_{k-1}``.
* The Gauss nodes are ``x_l = cos(pi (2 l + 1) / (2 L))``, ``l = 0..L-1``,
  i.e. strictly decreasing, and the weights are the constant ``pi / L``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .validation import as_coeff_array

__all__ = [
    "ChebKind",
    "ChebSeries",
    "ChebQuadrature",
    "cheb_eval",
    "gauss_cheb",
    "collocate",
    "uncollocate",
    "diff_to_second_kind",
    "first_to_second_kind",
    "eval_at_zero_row",
    "extend",
]


class ChebKind(enum.Enum):
    """Which Chebyshev family a coefficient vector refers to."""

    FIRST = "first"
    SECOND = "second"


@dataclass
class ChebSeries:
    """A finite Chebyshev expansion ``sum_k coeffs[k] * T_k`` (or ``U_k``).

    Parameters
    ----------
    kind : ChebKind
        Basis used when the series is evaluated.
    coeffs : ndarray
        Complex coefficients; ``coeffs[k]`` multiplies the degree-``k``
        polynomial.  At least one coefficient is required.
    """

    kind: ChebKind
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = as_coeff_array(self.coeffs, "coeffs")
        if self.coeffs.shape[0] < 1:
            raise ValueError("ChebSeries needs at least one coefficient")

    def __len__(self):
        return self.coeffs.shape[0]

    def __call__(self, t):
        return cheb_eval(self, t)


@dataclass
class ChebQuadrature:
    """Gauss-Chebyshev rule for the weight ``1/sqrt(1 - t^2)``.

    ``sum_l weights[l] * P(nodes[l])`` equals ``int P(t) / sqrt(1-t^2) dt``
    exactly for polynomials of degree up to ``2 L - 1``.  Nodes are strictly
    decreasing.
    """

    L: int
    nodes: np.ndarray
    weights: np.ndarray


def _clenshaw(coeffs, t, kind):
    """Clenshaw summation of a T- or U-series at ``t`` (scalar or array).

    ``coeffs`` may carry extra trailing axes (Hilbert-valued series); ``t``
    is then required to be scalar and the result has the trailing shape.
    """
    coeffs = np.asarray(coeffs)
    t = np.asarray(t)
    if coeffs.ndim > 1 and t.ndim > 0:
        raise ValueError("vector-valued series can only be evaluated at scalar t")
    if np.any(np.abs(t) > 1.0):
        raise ValueError("evaluation point outside [-1, 1]")
    n = coeffs.shape[0]
    tail = coeffs.shape[1:]
    zero = np.zeros(np.broadcast_shapes(t.shape, tail), dtype=complex)
    b1 = zero.copy()
    b2 = zero.copy()
    for k in range(n - 1, 0, -1):
        b1, b2 = coeffs[k] + 2.0 * t * b1 - b2, b1
    # p_0 = 1 contributes coeffs[0] - b2; p_1 closes the recurrence.
    p1 = t if kind is ChebKind.FIRST else 2.0 * t
    return coeffs[0] + p1 * b1 - b2


def cheb_eval(series, t, kind=ChebKind.FIRST):
    """Evaluate a Chebyshev series at ``t`` in ``[-1, 1]``.

    Parameters
    ----------
    series : ChebSeries or ndarray
        A :class:`ChebSeries`, or a bare coefficient array interpreted in the
        basis given by ``kind``.
    t : float or ndarray
        Evaluation point(s); must satisfy ``|t| <= 1``.

    Returns
    -------
    complex or ndarray
    """
    if isinstance(series, ChebSeries):
        coeffs, kind = series.coeffs, series.kind
    else:
        coeffs = as_coeff_array(series, "series")
    out = _clenshaw(coeffs, t, kind)
    if out.ndim == 0:
        return complex(out)
    return out


@lru_cache(maxsize=64)
def gauss_cheb(L: int) -> ChebQuadrature:
    """Gauss-Chebyshev quadrature with ``L`` points for the weight 1/w.

    ``nodes[l] = cos(pi (2 l + 1) / (2 L))`` and every weight equals
    ``pi / L``; the rule integrates ``P(t)/sqrt(1-t^2)`` exactly for
    ``deg P <= 2 L - 1``.
    """
    if not isinstance(L, (int, np.integer)) or L < 1:
        raise ValueError(f"L must be a positive integer, got {L!r}")
    angles = np.pi * (2.0 * np.arange(L) + 1.0) / (2.0 * L)
    return ChebQuadrature(L=int(L), nodes=np.cos(angles), weights=np.full(L, np.pi / L))


@lru_cache(maxsize=64)
def _collocation_matrices(L):
    # Forward matrix C[l, k] = T_k(x_l) = cos(k * theta_l) and its exact
    # inverse from the discrete orthogonality of cosines at the Gauss angles.
    angles = np.pi * (2.0 * np.arange(L) + 1.0) / (2.0 * L)
    fwd = np.cos(np.outer(angles, np.arange(L)))
    inv = fwd.T * (2.0 / L)
    inv[0] *= 0.5
    return fwd, inv


def _fold_time_axis(mat, coeffs):
    # (L, L) @ (L, *tail) -> (L, *tail) through one BLAS call.
    flat = coeffs.reshape(coeffs.shape[0], -1)
    return np.ascontiguousarray(mat @ flat).reshape(coeffs.shape)


def collocate(coeffs, quad: ChebQuadrature, fast: bool = False):
    """Values of a first-kind series at the quadrature nodes.

    Parameters
    ----------
    coeffs : ndarray or ChebSeries
        First-kind coefficients, length ``quad.L`` along axis 0 (extend with
        :func:`extend` first if shorter).
    quad : ChebQuadrature
    fast : bool
        Use the DCT-III path instead of the dense cosine matrix.  Purely an
        optimization; results agree to roundoff.
    """
    if isinstance(coeffs, ChebSeries):
        if coeffs.kind is not ChebKind.FIRST:
            raise ValueError("collocate expects a first-kind series")
        coeffs = coeffs.coeffs
    coeffs = as_coeff_array(coeffs, "coeffs")
    if coeffs.shape[0] != quad.L:
        raise ValueError(
            f"series length {coeffs.shape[0]} does not match quadrature size {quad.L}"
        )
    if fast:
        from scipy.fft import dct

        # dct(type=3) computes x_0 + 2 sum_{k>=1} x_k cos(k theta_l).
        half = coeffs.copy()
        half[1:] *= 0.5
        return dct(half.real, type=3, axis=0) + 1j * dct(half.imag, type=3, axis=0)
    fwd, _ = _collocation_matrices(quad.L)
    return _fold_time_axis(fwd, coeffs)


def uncollocate(values, quad: ChebQuadrature, fast: bool = False):
    """Exact inverse of :func:`collocate` (node values -> T-coefficients)."""
    values = as_coeff_array(values, "values")
    if values.shape[0] != quad.L:
        raise ValueError(
            f"value count {values.shape[0]} does not match quadrature size {quad.L}"
        )
    if fast:
        from scipy.fft import dct

        out = dct(values.real, type=2, axis=0) + 1j * dct(values.imag, type=2, axis=0)
        out /= 2.0 * quad.L
        out[1:] *= 2.0
        return out
    _, inv = _collocation_matrices(quad.L)
    return _fold_time_axis(inv, values)


def diff_to_second_kind(coeffs):
    """U-basis coefficients of ``i * u'`` for a first-kind series ``u``.

    Uses ``T_{k+1}' = (k+1) U_k``: ``out[k] = i (k+1) coeffs[k+1]`` and the
    top slot is zero.  Output length equals input length.
    """
    coeffs = as_coeff_array(coeffs, "coeffs")
    out = np.zeros(coeffs.shape, dtype=complex)
    K = coeffs.shape[0]
    if K > 1:
        factors = 1j * np.arange(1, K)
        out[: K - 1] = coeffs[1:] * factors.reshape((-1,) + (1,) * (coeffs.ndim - 1))
    return out


def first_to_second_kind(coeffs):
    """Re-express a first-kind series in the U-basis (same length, exact).

    ``T_0 = U_0``, ``T_1 = U_1 / 2`` and ``T_k = (U_k - U_{k-2}) / 2``; a
    T-series of degree L-1 has U-degree at most L-1, so nothing is dropped.
    """
    coeffs = as_coeff_array(coeffs, "coeffs")
    out = np.zeros(coeffs.shape, dtype=complex)
    out[0] = coeffs[0]
    if coeffs.shape[0] > 1:
        out[1:] = 0.5 * coeffs[1:]
    if coeffs.shape[0] > 2:
        out[:-2] -= 0.5 * coeffs[2:]
    return out


def second_to_first_transpose(coeffs):
    """Transpose of :func:`first_to_second_kind` (real matrix, so adjoint too)."""
    coeffs = as_coeff_array(coeffs, "coeffs")
    out = np.zeros(coeffs.shape, dtype=complex)
    out[0] = coeffs[0]
    if coeffs.shape[0] > 1:
        out[1:] = 0.5 * coeffs[1:]
    if coeffs.shape[0] > 2:
        out[2:] -= 0.5 * coeffs[:-2]
    return out


def diff_transpose(coeffs):
    """Transpose-conjugate of :func:`diff_to_second_kind`: ``out[k] = -i k g[k-1]``."""
    coeffs = as_coeff_array(coeffs, "coeffs")
    out = np.zeros(coeffs.shape, dtype=complex)
    K = coeffs.shape[0]
    if K > 1:
        factors = -1j * np.arange(1, K)
        out[1:] = coeffs[: K - 1] * factors.reshape((-1,) + (1,) * (coeffs.ndim - 1))
    return out


def eval_at_zero_row(K: int) -> np.ndarray:
    """The row vector ``(T_k(0))_{k<K} = (1, 0, -1, 0, 1, ...)``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    row = np.zeros(K)
    row[0::4] = 1.0
    if K > 2:
        row[2::4] = -1.0
    return row


def extend(coeffs, L: int):
    """Zero-pad a coefficient array from length K to length ``L >= K`` (axis 0)."""
    coeffs = as_coeff_array(coeffs, "coeffs")
    K = coeffs.shape[0]
    if L < K:
        raise ValueError(f"cannot extend length {K} down to {L}")
    if L == K:
        return coeffs.astype(complex, copy=True)
    out = np.zeros((L,) + coeffs.shape[1:], dtype=complex)
    out[:K] = coeffs
    return out


def truncate(coeffs, K: int):
    """Drop coefficients of degree >= K (transpose of :func:`extend`)."""
    coeffs = as_coeff_array(coeffs, "coeffs")
    if K > coeffs.shape[0]:
        raise ValueError(f"cannot truncate length {coeffs.shape[0]} up to {K}")
    return coeffs[:K].astype(complex, copy=True)
