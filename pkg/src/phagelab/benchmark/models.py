"""Baseline binary classifiers: L2 logistic regression and a one-hidden-layer MLP.

Both accept dense arrays or scipy sparse matrices as features.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize
from scipy.special import expit, log_expit

log = logging.getLogger(__name__)


class DegenerateDataError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 256
    learning_rate: float = 1e-4
    validation_fraction: float = 0.10
    hidden_units: int = 512
    l2_penalty: float = 1.0
    max_iterations: int = 1000
    tolerance: float = 1e-6
    seed: int = 0
    undersample: bool = False  # drop majority-class rows to balance classes

    def __post_init__(self):
        for name in ("epochs", "batch_size", "learning_rate", "hidden_units",
                     "l2_penalty", "max_iterations", "tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie in [0, 1)")


def bce_with_logits(logits, y):
    """Mean binary cross-entropy of sigmoid(logits) against 0/1 targets."""
    return float(-np.mean(y * log_expit(logits) + (1 - y) * log_expit(-logits)))


def _check_data(X, y, need_both=True):
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] == 0 or X.shape[0] != y.shape[0]:
        raise DegenerateDataError("features and labels must be non-empty and aligned")
    if not np.all((y == 0) | (y == 1)):
        raise DegenerateDataError("labels must be 0 or 1")
    if need_both and (y.min() == y.max()):
        raise DegenerateDataError("training data contains a single class")
    return y


def validation_split(n: int, fraction: float, seed: int):
    """Seeded uniform (train_idx, val_idx) partition of range(n)."""
    perm = np.random.default_rng(seed).permutation(n)
    n_val = int(round(fraction * n)) if n > 1 else 0
    n_val = min(n_val, n - 1)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def undersample_indices(y, seed: int):
    """Sorted indices keeping every minority-class row and an equal-size seeded
    sample of the majority class."""
    y = np.asarray(y).ravel()
    pos, neg = np.flatnonzero(y == 1), np.flatnonzero(y == 0)
    small, big = (pos, neg) if len(pos) <= len(neg) else (neg, pos)
    keep = np.random.default_rng(seed).choice(big, size=len(small), replace=False)
    return np.sort(np.concatenate([small, keep]))


# logistic regression ---------------------------------------------------------

@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    loss: float = math.nan
    iterations: int = 0
    converged: bool = False

    def decision_function(self, X):
        return np.asarray(X @ self.weights).ravel() + self.bias

    def predict_proba(self, X):
        return expit(self.decision_function(X))


def logreg_objective(params, X, y, l2_penalty):
    """Mean BCE plus l2_penalty / (2 n) * ||w||^2 (intercept unpenalised), and its gradient.

    Up to the factor 1/n this is the objective minimised by an L2 logistic
    regression with inverse regularisation strength C = 1 / l2_penalty.
    """
    n = X.shape[0]
    w, b = params[:-1], params[-1]
    z = np.asarray(X @ w).ravel() + b
    loss = bce_with_logits(z, y) + 0.5 * l2_penalty * float(w @ w) / n
    r = (expit(z) - y) / n
    grad = np.empty_like(params)
    grad[:-1] = np.asarray(X.T @ r).ravel() + l2_penalty * w / n
    grad[-1] = r.sum()
    return loss, grad


def train_logreg(X, y, cfg: TrainConfig = TrainConfig()) -> LinearModel:
    """L2-regularised logistic regression fitted with L-BFGS from zero weights."""
    y = _check_data(X, y)
    x0 = np.zeros(X.shape[1] + 1)
    res = minimize(logreg_objective, x0, args=(X, y, cfg.l2_penalty), jac=True,
                   method="L-BFGS-B",
                   options={"maxiter": cfg.max_iterations, "gtol": cfg.tolerance,
                            "ftol": 1e-15, "maxcor": 20})
    if not res.success:
        log.info("logistic regression stopped early: %s", res.message)
    return LinearModel(res.x[:-1].copy(), float(res.x[-1]), float(res.fun), int(res.nit),
                       bool(res.success))


# multilayer perceptron -------------------------------------------------------

@dataclass
class MlpModel:
    """Dense(512) -> ReLU -> Dense(1) -> sigmoid."""

    W1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    history: list = field(default_factory=list)

    @classmethod
    def init(cls, n_in: int, n_hidden: int, rng, dtype=np.float64):
        # uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases
        a1 = 1.0 / math.sqrt(n_in)
        a2 = 1.0 / math.sqrt(n_hidden)
        return cls(rng.uniform(-a1, a1, (n_in, n_hidden)).astype(dtype),
                   rng.uniform(-a1, a1, n_hidden).astype(dtype),
                   rng.uniform(-a2, a2, n_hidden).astype(dtype),
                   rng.uniform(-a2, a2, 1).astype(dtype))

    @property
    def params(self):
        return [self.W1, self.b1, self.w2, self.b2]

    def decision_function(self, X):
        h = np.maximum(np.asarray(X @ self.W1) + self.b1, 0.0)
        return h @ self.w2 + self.b2[0]

    def predict_proba(self, X):
        return expit(self.decision_function(X))

    def loss(self, X, y) -> float:
        return bce_with_logits(self.decision_function(X), y)

    def loss_and_grads(self, X, y):
        """Mean BCE loss and gradients for (W1, b1, w2, b2)."""
        n = X.shape[0]
        pre = np.asarray(X @ self.W1) + self.b1
        h = np.maximum(pre, 0.0)
        z = h @ self.w2 + self.b2[0]
        loss = bce_with_logits(z, y)
        dz = (expit(z) - y) / n
        dw2 = h.T @ dz
        db2 = np.array([dz.sum()], dtype=self.b2.dtype)
        dh = np.outer(dz, self.w2)
        dh[pre <= 0] = 0.0
        dW1 = np.asarray(X.T @ dh)
        db1 = dh.sum(axis=0)
        return loss, [dW1, db1, dw2, db2]


class Adam:
    def __init__(self, params, lr=1e-4, betas=(0.9, 0.999), eps=1e-8):
        self.params = params
        self.lr, self.b1, self.b2, self.eps = lr, betas[0], betas[1], eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train_mlp(X, y, cfg: TrainConfig = TrainConfig(), dtype=np.float32) -> MlpModel:
    """Mini-batch Adam training with a seeded 10% validation hold-out.

    Validation loss is recorded in ``model.history`` once per epoch; the
    model returned is the one after the final epoch.
    """
    y = _check_data(X, y, need_both=False)
    rng = np.random.default_rng(cfg.seed)
    tr, va = validation_split(X.shape[0], cfg.validation_fraction, cfg.seed)
    X = X.astype(dtype) if sp.issparse(X) else np.asarray(X, dtype=dtype)
    y = y.astype(dtype)
    model = MlpModel.init(X.shape[1], cfg.hidden_units, rng, dtype)
    opt = Adam(model.params, lr=cfg.learning_rate)
    Xtr, ytr = X[tr], y[tr]
    Xva, yva = (X[va], y[va]) if len(va) else (None, None)
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(tr))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            b = order[start:start + cfg.batch_size]
            loss, grads = model.loss_and_grads(Xtr[b], ytr[b])
            opt.step(grads)
            total += loss * len(b)
        entry = {"epoch": epoch + 1, "train_loss": total / len(order)}
        if Xva is not None:
            entry["val_loss"] = model.loss(Xva, yva)
        model.history.append(entry)
        log.debug("epoch %d %s", epoch + 1, entry)
    return model
