"""L2-regularized logistic regression fit by full-batch gradient descent with
a backtracking (Armijo) line search.

Categorical columns are one-hot encoded over all categories (no reference
level dropped; the ridge penalty absorbs the collinearity so per-category
weights stay interpretable). Continuous columns are standardized internally
for conditioning; the statistics are stored with the model.
"""

from __future__ import annotations

import numpy as np


def encode_design(X: np.ndarray, is_cat: np.ndarray, n_categories: np.ndarray,
                  mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """Expand a raw column matrix into the one-hot / standardized design."""
    blocks = []
    for j in range(X.shape[1]):
        col = X[:, j]
        if is_cat[j]:
            k = int(n_categories[j])
            onehot = np.zeros((col.size, k))
            onehot[np.arange(col.size), col.astype(np.int64)] = 1.0
            blocks.append(onehot)
        else:
            blocks.append(((col - mean[j]) / std[j])[:, None])
    return np.hstack(blocks) if blocks else np.zeros((X.shape[0], 0))


def loss_and_grad(params: np.ndarray, design: np.ndarray, y: np.ndarray,
                  l2_penalty: float) -> tuple[float, np.ndarray]:
    """Penalized log-loss and its gradient.

    params holds the intercept first, then one weight per design column. The
    penalty 0.5 * l2 * ||w||^2 excludes the intercept.
    """
    intercept, w = params[0], params[1:]
    z = design @ w + intercept
    # log(1 + exp(-s*z)) computed stably via logaddexp
    s = 2.0 * y - 1.0
    loss = np.logaddexp(0.0, -s * z).sum() + 0.5 * l2_penalty * (w @ w)
    residual = _sigmoid(z) - y
    grad = np.concatenate([[residual.sum()], design.T @ residual + l2_penalty * w])
    return float(loss), grad


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_logistic(design: np.ndarray, y: np.ndarray, l2_penalty: float,
                 max_iter: int, tol: float) -> np.ndarray:
    """Minimize the penalized log-loss; returns [intercept, weights...]."""
    params = np.zeros(design.shape[1] + 1)
    loss, grad = loss_and_grad(params, design, y, l2_penalty)
    step = 1.0
    for _ in range(max_iter):
        gnorm_sq = grad @ grad
        if np.sqrt(gnorm_sq) <= tol:
            break
        step = min(step * 2.0, 1e4)
        for _ in range(60):
            candidate = params - step * grad
            new_loss, new_grad = loss_and_grad(candidate, design, y, l2_penalty)
            if new_loss <= loss - 0.5 * step * gnorm_sq:
                break
            step *= 0.5
        else:
            break
        params, loss, grad = candidate, new_loss, new_grad
    return params


def predict_logistic(params: np.ndarray, design: np.ndarray) -> np.ndarray:
    return _sigmoid(design @ params[1:] + params[0])
