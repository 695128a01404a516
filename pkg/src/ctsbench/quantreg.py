"""Linear quantile regression by subgradient descent on the pinball loss.

All requested quantile levels are fitted simultaneously: the parameter
matrix has one row per level, and each iteration computes the residual sign
pattern for every level in one vectorized pass. Inputs are standardized
internally and coefficients mapped back, so callers see original-scale
parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuantileFit:
    """Fitted lines, one per quantile level.

    intercepts has shape (T,), coefs shape (T, d), for T levels and d
    features. degenerate marks feature columns with (near-)zero variance
    that were dropped from the regression.
    """

    taus: np.ndarray
    intercepts: np.ndarray
    coefs: np.ndarray
    degenerate: np.ndarray

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Quantile predictions at a single feature vector, shape (T,)."""
        x = np.asarray(x, dtype=np.float64)
        return self.intercepts + self.coefs @ x


def fit_pinball_linear(
    X: np.ndarray,
    y: np.ndarray,
    taus: np.ndarray,
    iters: int = 500,
    step0: float = 0.05,
) -> QuantileFit:
    """Fit one linear quantile regression per level in taus.

    Subgradient descent, step0/sqrt(iter) schedule, intercept initialized
    at the empirical quantile, coefficients at zero. Constant feature
    columns are excluded and reported in the result.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    taus = np.atleast_1d(np.asarray(taus, dtype=np.float64))
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    n, d = X.shape
    if len(y) != n:
        raise ValueError(f"length mismatch: X has {n} rows, y has {len(y)}")
    if n == 0:
        raise ValueError("cannot fit on an empty sample")
    if np.any(taus < 0.0) or np.any(taus > 1.0):
        raise ValueError("quantile levels must lie inside [0, 1]")

    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    degenerate = sd < 1e-12
    active = ~degenerate
    Z = (X[:, active] - mu[active]) / sd[active]
    da = int(active.sum())
    A = np.column_stack([np.ones(n), Z]) if da else np.ones((n, 1))

    T = len(taus)
    W = np.zeros((T, da + 1))
    W[:, 0] = np.quantile(y, taus)
    scale = 1.0 / n
    for it in range(1, iters + 1):
        preds = A @ W.T                       # (n, T)
        R = y[:, None] - preds
        G = np.where(R > 0.0, -taus[None, :], np.where(R < 0.0, 1.0 - taus[None, :], 0.0))
        grad = (A.T @ G) * scale              # (da+1, T)
        W -= (step0 / np.sqrt(it)) * grad.T

    coefs = np.zeros((T, d))
    if da:
        coefs[:, active] = W[:, 1:] / sd[active]
    intercepts = W[:, 0] - coefs[:, active] @ mu[active] if da else W[:, 0].copy()
    return QuantileFit(taus=taus, intercepts=intercepts, coefs=coefs, degenerate=degenerate)
