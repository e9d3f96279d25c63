"""Mean matrix, Perron data, the a-weighted operator norm and connectivity constants."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, ZeroMatrix
from .model import ValidatedModel


@dataclass(frozen=True)
class MeanMatrix:
    entries: np.ndarray

    @property
    def m(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class PerronData:
    mu: float
    u: np.ndarray
    iterations: int = 0

    @property
    def u_min(self):
        return float(self.u.min())

    @property
    def u_max(self):
        return float(self.u.max())


@dataclass(frozen=True)
class ConnectivityConstants:
    b_vec: np.ndarray
    b: float
    A: float


def mean_matrix(model: ValidatedModel | tuple) -> MeanMatrix:
    """Lambda[k][l] = a_l c[k][l]. Accepts a validated model or an ``(a, c)`` pair."""
    if isinstance(model, ValidatedModel):
        a, c = model.a, model.c
    else:
        a, c = (np.asarray(x, dtype=float) for x in model)
    return MeanMatrix(c * a[None, :])


def _entries(L):
    return np.asarray(L.entries if isinstance(L, MeanMatrix) else L, dtype=float)


def perron(L, tol: float = 1e-13, max_iter: int = 1_000_000) -> PerronData:
    """Perron root and eigenvector by shifted power iteration.

    Iterates on ``L + eps I`` with ``eps`` half the largest row sum, which
    makes an irreducible non-negative matrix primitive (period-2 collapsed
    graphs would otherwise oscillate). Stops once both the eigenvalue
    estimate and the max-normalised iterate move by less than ``tol``
    (relative to the matrix scale). ``u`` is scaled to max component 1.
    """
    L = _entries(L)
    if np.any(L < 0):
        raise ValueError("perron needs a non-negative matrix")
    scale = float(L.sum(axis=1).max())
    if scale == 0:
        raise ZeroMatrix("mean matrix is identically zero")
    m = L.shape[0]
    shifted = L / scale + 0.5 * np.eye(m)
    x = np.ones(m)
    est = np.inf
    for it in range(1, max_iter + 1):
        y = shifted @ x
        nu = y.max()
        y /= nu
        done = abs(nu - est) < tol and np.abs(y - x).max() < tol
        x, est = y, nu
        if done:
            break
    else:
        raise NoConvergence(f"power iteration did not converge in {max_iter} steps", last=x)
    mu = (est - 0.5) * scale
    resid = np.abs(L @ x - mu * x).max()
    if resid >= 10 * tol * scale:
        raise NoConvergence(f"Perron residual {resid:.3g} above tolerance", last=x)
    return PerronData(float(mu), x, it)


def weighted_operator_norm(L, a) -> float:
    """Operator norm of L on R^m with inner product <x, y> = sum a_k x_k y_k.

    For L = C diag(a) with C symmetric, D^(1/2) L D^(-1/2) = D^(1/2) C D^(1/2)
    is symmetric and its largest |eigenvalue| is the norm.
    """
    L = _entries(L)
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise ValueError("weights a must be positive")
    s = np.sqrt(a)
    sym = s[:, None] * L / s[None, :]
    sym = 0.5 * (sym + sym.T)
    try:
        w = np.linalg.eigvalsh(sym)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"symmetric eigensolve failed: {exc}") from exc
    return float(np.abs(w).max())


def connectivity_constants(model: ValidatedModel, rel_tol: float = 1e-12) -> ConnectivityConstants:
    """b_k = sum_l a_l c[k][l], b = min b_k, A = total a_k over the minimising types."""
    a, c = model.a, model.c
    b_vec = c @ a
    b = float(b_vec.min())
    minimal = np.abs(b_vec - b) <= rel_tol * abs(b)
    return ConnectivityConstants(b_vec, b, float(a[minimal].sum()))
