"""Dense kernels: LU inversion, SVD, truncated low-rank factors, power iteration."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import SingularMatrixError, SvdConvergenceError


@dataclass(frozen=True)
class LowRankFactor:
    """Rank-r factorization X @ Y.T of a matrix block."""

    x_factor: np.ndarray
    y_factor: np.ndarray

    def __post_init__(self):
        if self.x_factor.shape[1] != self.y_factor.shape[1]:
            raise ValueError("factor column counts differ")

    @property
    def rank(self):
        return self.x_factor.shape[1]

    def matrix(self):
        return self.x_factor @ self.y_factor.T


def lu_invert(a):
    """Invert a square matrix by LU with partial pivoting.

    Returns (inverse, residual) where residual is the max-norm of
    a @ inverse - identity.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("lu_invert needs a square matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    diag = np.abs(np.diag(lu))
    if np.any(diag == 0.0):
        raise SingularMatrixError(int(np.argmin(diag != 0.0)))
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(a.shape[0]), check_finite=False)
    residual = float(np.max(np.abs(a @ inv - np.eye(a.shape[0]))))
    return inv, residual


def svd(a):
    """Singular value decomposition a = U diag(sigma) V.T with sigma descending.

    Returns (U, sigma, V).  Note the third factor is V, not its transpose.
    """
    a = np.asarray(a, dtype=np.float64)
    try:
        u, sigma, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(str(exc)) from exc
    return u, sigma, vt.T


def truncated_svd(a, r):
    """Best rank-r approximation as a LowRankFactor (X = U_r sigma_r, Y = V_r)."""
    if r < 1:
        raise ValueError("rank must be >= 1")
    a = np.asarray(a, dtype=np.float64)
    u, sigma, v = svd(a)
    r = min(r, len(sigma))
    return LowRankFactor(u[:, :r] * sigma[:r], v[:, :r].copy())


class PowerNormResult(NamedTuple):
    value: float
    converged: bool
    iterations: int


def power_norm2(apply, apply_t, n_rows, n_cols, tol=1e-8, max_iter=500):
    """Largest singular value of a linear operator by normal-equation power iteration.

    Iterates x <- D^T(D x) from the normalized all-ones vector and stops when
    successive estimates agree to relative `tol`.  An exactly perpendicular
    start would converge to a lower singular value, so a second deterministic
    run from an alternating-sign vector is taken and the larger estimate wins.
    If an iteration cap is hit the best estimate is returned flagged as
    unconverged.
    """
    first = _power_run(apply, apply_t, np.ones(n_cols), tol, max_iter)
    alt = np.where(np.arange(n_cols) % 2 == 0, 1.0, -1.0)
    second = _power_run(apply, apply_t, alt, tol, max_iter)
    iterations = first.iterations + second.iterations
    winner = second if second.value > first.value else first
    return PowerNormResult(winner.value, winner.converged, iterations)


def _power_run(apply, apply_t, x, tol, max_iter):
    norm = np.linalg.norm(x)
    if norm == 0.0:
        return PowerNormResult(0.0, True, 0)
    x = x / norm
    estimate = 0.0
    for it in range(1, max_iter + 1):
        y = np.asarray(apply(x))
        x_next = np.asarray(apply_t(y))
        sigma = np.linalg.norm(y)
        norm_next = np.linalg.norm(x_next)
        if norm_next == 0.0 or sigma == 0.0:
            return PowerNormResult(0.0, True, it)
        x = x_next / norm_next
        if it > 1 and abs(sigma - estimate) <= tol * max(sigma, np.finfo(float).tiny):
            return PowerNormResult(float(sigma), True, it)
        estimate = sigma
    return PowerNormResult(float(estimate), False, max_iter)