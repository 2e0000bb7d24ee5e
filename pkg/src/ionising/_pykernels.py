"""Vectorized numpy implementations of the hot numerical kernels.

These are the fallback twins of the compiled kernels in _corekernels; both
expose the same three functions with identical signatures and semantics:

    response_tensor(eta, mode_freqs, detunings)      -> F (N, N, T)
    coupling_from_rabi(omega, f_tensor)              -> J (N, N)
    pair_residual_jac(omega, f_tensor, target, rows, cols) -> (res, jac)

All arrays are float64 and C-contiguous. Symmetric matrices (targets)
carry zero diagonals; constraint sums run over unordered pairs i < j.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def response_tensor(eta: np.ndarray, mode_freqs: np.ndarray, detunings: np.ndarray) -> np.ndarray:
    """F[i, j, n] = sum_m eta[i, m] eta[j, m] w_m / (mu_n^2 - w_m^2)."""
    denom = detunings[None, :] ** 2 - mode_freqs[:, None] ** 2  # (M, T)
    weight = mode_freqs[:, None] / denom  # (M, T)
    return np.einsum("im,jm,mn->ijn", eta, eta, weight, optimize=True)


def coupling_from_rabi(omega: np.ndarray, f_tensor: np.ndarray) -> np.ndarray:
    """J[i, j] = sum_n omega[i, n] omega[j, n] F[i, j, n], zero diagonal."""
    j = np.einsum("in,jn,ijn->ij", omega, omega, f_tensor, optimize=True)
    np.fill_diagonal(j, 0.0)
    return j


def pair_residual_jac(
    omega: np.ndarray,
    f_tensor: np.ndarray,
    target: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Constraint residuals d_p = J_(i_p, j_p) - T_(i_p, j_p) and their Jacobian.

    rows/cols list the pairs (i_p < j_p). jac has shape (P, N*T) with the
    flattened-omega column order matching omega.ravel().
    """
    n, t = omega.shape
    fij = f_tensor[rows, cols, :]  # (P, T)
    res = np.sum(omega[rows] * omega[cols] * fij, axis=1) - target[rows, cols]
    p = rows.shape[0]
    jac = np.zeros((p, n, t))
    idx = np.arange(p)
    jac[idx, rows, :] = fij * omega[cols]
    jac[idx, cols, :] += fij * omega[rows]
    return res, jac.reshape(p, n * t)
