"""Binary logistic regression with L1/L2 penalties, fitted from scratch.

The objective is the summed log loss plus a penalty on the weights only:
``||w||^2 / (2C)`` for L2 or ``||w||_1 / C`` for L1 (so the paper-style
``lambda * ||w||^2`` corresponds to ``lambda = 1/(2C)``). L2 is minimized by
gradient descent with Armijo backtracking until the gradient inf-norm falls
below ``tol``; L1 by proximal gradient with soft-thresholding, stopping on
the proximal-gradient mapping norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, SingleClass


@dataclass(frozen=True)
class LogRegModel:
    weights: np.ndarray
    bias: float
    penalty: str  # "l1" | "l2"
    c: float
    converged: bool
    n_iter: int

    @property
    def sparsity(self) -> int:
        return int(np.sum(self.weights == 0.0))


def _sigmoid(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _sum_logloss(x, y, w, b):
    t = x @ w + b
    # log(1 + e^t) - y t, stable through logaddexp
    return float(np.sum(np.logaddexp(0.0, t) - y * t))


def logreg_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, penalty: str, c: float) -> float:
    """Full training objective: summed log loss plus the weight penalty."""
    value = _sum_logloss(x, y, w, b)
    if penalty == "l2":
        return value + float(w @ w) / (2.0 * c)
    if penalty == "l1":
        return value + float(np.abs(w).sum()) / c
    raise ValueError(f"unknown penalty {penalty!r}")


def logreg_gradient(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, penalty: str, c: float):
    """(grad_w, grad_b) of the full objective.

    For L1 this is the subgradient sign(w)/C, valid wherever w has no exact
    zeros (the gradient-check tests draw such points).
    """
    residual = _sigmoid(x @ w + b) - y
    gw = x.T @ residual
    gb = float(residual.sum())
    if penalty == "l2":
        gw = gw + w / c
    elif penalty == "l1":
        gw = gw + np.sign(w) / c
    else:
        raise ValueError(f"unknown penalty {penalty!r}")
    return gw, gb


def _fit_l2(x, y, c, max_iter, tol):
    n, p = x.shape
    w = np.zeros(p)
    b = 0.0
    step = 1.0 / max(1.0, 0.25 * float((x**2).sum()) / n)  # rough curvature scale
    f = logreg_objective(w, b, x, y, "l2", c)
    it = 0
    for it in range(1, max_iter + 1):
        gw, gb = logreg_gradient(w, b, x, y, "l2", c)
        gnorm = max(float(np.max(np.abs(gw))) if p else 0.0, abs(gb))
        if gnorm <= tol:
            return w, b, True, it - 1
        g2 = float(gw @ gw) + gb * gb
        s = step * 2.0  # let the step grow back after cautious iterations
        while True:
            w_new = w - s * gw
            b_new = b - s * gb
            f_new = logreg_objective(w_new, b_new, x, y, "l2", c)
            if f_new <= f - 1e-4 * s * g2 or s < 1e-18:
                break
            s *= 0.5
        w, b, f, step = w_new, b_new, f_new, s
    gw, gb = logreg_gradient(w, b, x, y, "l2", c)
    gnorm = max(float(np.max(np.abs(gw))) if p else 0.0, abs(gb))
    return w, b, gnorm <= tol, it


def _soft_threshold(v, amount):
    return np.sign(v) * np.maximum(np.abs(v) - amount, 0.0)


def _fit_l1(x, y, c, max_iter, tol):
    n, p = x.shape
    w = np.zeros(p)
    b = 0.0
    step = 1.0 / max(1.0, 0.25 * float((x**2).sum()) / n)
    smooth = _sum_logloss(x, y, w, b)
    it = 0
    for it in range(1, max_iter + 1):
        residual = _sigmoid(x @ w + b) - y
        gw = x.T @ residual
        gb = float(residual.sum())
        s = step * 2.0
        while True:
            w_new = _soft_threshold(w - s * gw, s / c)
            b_new = b - s * gb
            smooth_new = _sum_logloss(x, y, w_new, b_new)
            dw = w_new - w
            db = b_new - b
            quad = smooth + float(gw @ dw) + gb * db + (float(dw @ dw) + db * db) / (2.0 * s)
            if smooth_new <= quad + 1e-12 or s < 1e-18:
                break
            s *= 0.5
        move = max(
            float(np.max(np.abs(w_new - w))) if p else 0.0, abs(b_new - b)
        ) / s
        w, b, smooth, step = w_new, b_new, smooth_new, s
        if move <= tol:
            return w, b, True, it
    return w, b, False, it


def logreg_fit(
    x: np.ndarray,
    y: np.ndarray,
    penalty: str = "l2",
    c: float = 1.0,
    max_iter: int = 2000,
    tol: float = 1e-6,
) -> LogRegModel:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(np.unique(y)) < 2:
        raise SingleClass("logreg_fit requires samples of both classes")
    if penalty not in ("l1", "l2"):
        raise ValueError(f"unknown penalty {penalty!r}")
    if c <= 0:
        raise ValueError("c must be positive")
    fit = _fit_l2 if penalty == "l2" else _fit_l1
    w, b, converged, n_iter = fit(x, y, c, max_iter, tol)
    return LogRegModel(w, float(b), penalty, float(c), converged, n_iter)


def logreg_decision(m: LogRegModel, x: np.ndarray) -> np.ndarray:
    """Log-odds w.x + b (the scale Shapley attributions use)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.shape[1] != len(m.weights):
        raise DimensionMismatch(f"input has {x.shape[1]} features, model expects {len(m.weights)}")
    return x @ m.weights + m.bias


def logreg_predict_proba(m: LogRegModel, x: np.ndarray) -> np.ndarray:
    return _sigmoid(logreg_decision(m, x))


def logreg_predict(m: LogRegModel, x: np.ndarray) -> np.ndarray:
    return (logreg_predict_proba(m, x) > 0.5).astype(np.int64)


def logreg_mean_logloss(m: LogRegModel, x: np.ndarray, y: np.ndarray) -> float:
    """Mean negative log-likelihood, penalty excluded (tuning-curve loss)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return _sum_logloss(x, y, m.weights, m.bias) / len(y)
