"""Plain-numpy dense networks with hand-written gradients.

The mini-batch Adam loop with early stopping (best-validation-epoch
weights restored) is shared by the tree-initialized networks and the
fully-connected baselines, so both model families consume the same
optimization budget.  Everything runs in 64-bit floats so gradient checks
and determinism tests are meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, NumericError

ACTIVATIONS = ("tanh", "relu", "identity")


@dataclass
class DenseLayer:
    """One dense layer computing ``act(gain * (x @ W.T + b))``."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "tanh"
    gain: float = 1.0

    def __post_init__(self) -> None:
        self.weights = np.array(self.weights, dtype=np.float64)
        self.bias = np.array(self.bias, dtype=np.float64)
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ConfigError("layer weight/bias shapes are inconsistent")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise NumericError("layer parameters must be finite")
        if not (np.isfinite(self.gain) and self.gain > 0):
            raise ConfigError("layer gain must be positive and finite")

    def clone(self) -> "DenseLayer":
        return DenseLayer(self.weights.copy(), self.bias.copy(),
                          self.activation, self.gain)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization constants for the shared training loop."""

    epochs: int = 100
    batch_size: int = 32
    step_size: float = 1e-3
    decay1: float = 0.9
    decay2: float = 0.999
    epsilon: float = 1e-8
    patience: int = 10
    shuffle: bool = True

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.step_size < 0:
            raise ConfigError("step_size must be >= 0")


@dataclass(frozen=True)
class TrainHistory:
    train_loss: tuple[float, ...]
    valid_loss: tuple[float, ...]
    stopped_epoch: int
    best_epoch: int

    def __post_init__(self) -> None:
        if not 1 <= self.best_epoch <= self.stopped_epoch:
            raise ConfigError("best_epoch must lie in [1, stopped_epoch]")
        if self.stopped_epoch != len(self.train_loss):
            raise ConfigError("history length must match stopped_epoch")


def _activate(pre: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return np.tanh(pre)
    if kind == "relu":
        return np.maximum(pre, 0.0)
    return pre


def forward_layers(layers, X):
    """Run the stack; returns (output, caches).

    caches[i] = (layer input, scaled pre-activation, layer output); the
    backward pass consumes them.
    """
    hidden = np.asarray(X, dtype=np.float64)
    if hidden.ndim != 2 or hidden.shape[1] != layers[0].weights.shape[1]:
        raise DataError(f"expected rows of {layers[0].weights.shape[1]} features")
    if not np.isfinite(hidden).all():
        raise DataError("non-finite network inputs")
    caches = []
    for layer in layers:
        pre = layer.gain * (hidden @ layer.weights.T + layer.bias)
        out = _activate(pre, layer.activation)
        caches.append((hidden, pre, out))
        hidden = out
    return hidden, caches


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, y: np.ndarray) -> float:
    """Mean categorical cross-entropy of softmax(logits) against labels."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return float(-log_probs[np.arange(len(y)), y].mean())


def loss_and_layer_gradients(layers, X, y):
    """Mean cross-entropy and its gradient for every layer.

    Returns (loss, grads) with grads[i] = (dW_i, db_i).  The gain factors
    of scaled activations enter the chain rule here, which is what the
    finite-difference checks exercise.
    """
    y = np.asarray(y, dtype=np.int64)
    if y.size == 0:
        raise DataError("empty batch")
    class_count = layers[-1].weights.shape[0]
    if y.min() < 0 or y.max() >= class_count:
        raise DataError("label out of range")
    logits, caches = forward_layers(layers, X)
    loss = cross_entropy(logits, y)
    batch = y.size
    grad_out = softmax(logits)
    grad_out[np.arange(batch), y] -= 1.0
    grad_out /= batch
    grads = [None] * len(layers)
    for i in reversed(range(len(layers))):
        layer = layers[i]
        inputs, pre, out = caches[i]
        if layer.activation == "tanh":
            grad_pre = grad_out * (1.0 - out * out)
        elif layer.activation == "relu":
            grad_pre = grad_out * (pre > 0.0)
        else:
            grad_pre = grad_out
        grad_affine = layer.gain * grad_pre
        grads[i] = (grad_affine.T @ inputs, grad_affine.sum(axis=0))
        if i:
            grad_out = grad_affine @ layer.weights
    return loss, grads


def predict_labels(layers, X) -> np.ndarray:
    """Argmax class of the softmax output for each row of X."""
    logits, _ = forward_layers(layers, X)
    return np.argmax(logits, axis=1).astype(np.int64)


class _AdamState:
    def __init__(self, layers):
        self.moment1 = [(np.zeros_like(l.weights), np.zeros_like(l.bias))
                        for l in layers]
        self.moment2 = [(np.zeros_like(l.weights), np.zeros_like(l.bias))
                        for l in layers]
        self.steps = 0

    def step(self, layers, grads, cfg: TrainConfig) -> None:
        self.steps += 1
        correction1 = 1.0 - cfg.decay1 ** self.steps
        correction2 = 1.0 - cfg.decay2 ** self.steps
        for i, layer in enumerate(layers):
            for param, grad, m, v in ((layer.weights, grads[i][0],
                                       self.moment1[i][0], self.moment2[i][0]),
                                      (layer.bias, grads[i][1],
                                       self.moment1[i][1], self.moment2[i][1])):
                m *= cfg.decay1
                m += (1.0 - cfg.decay1) * grad
                v *= cfg.decay2
                v += (1.0 - cfg.decay2) * grad * grad
                param -= cfg.step_size * (m / correction1) / (
                    np.sqrt(v / correction2) + cfg.epsilon)


def train_network(layers, train, valid, cfg: TrainConfig,
                  rng: np.random.Generator):
    """Mini-batch Adam with early stopping on validation loss.

    Stops once the validation loss has not improved for ``cfg.patience``
    consecutive epochs; the returned layers carry the parameters of the
    best validation epoch.  Deterministic given the generator (used only
    for the per-epoch shuffle).
    """
    X, y = np.asarray(train[0], dtype=np.float64), np.asarray(train[1], dtype=np.int64)
    X_valid, y_valid = (np.asarray(valid[0], dtype=np.float64),
                        np.asarray(valid[1], dtype=np.int64))
    if y.size == 0 or y_valid.size == 0:
        raise DataError("training and validation views must be non-empty")
    work = [layer.clone() for layer in layers]
    state = _AdamState(work)
    best_layers = [layer.clone() for layer in work]
    best_valid = math.inf
    best_epoch = 0
    stall = 0
    train_losses: list[float] = []
    valid_losses: list[float] = []
    n = y.size
    stopped = 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            loss, grads = loss_and_layer_gradients(work, X[rows], y[rows])
            if not np.isfinite(loss):
                raise NumericError(f"non-finite training loss at epoch {epoch}")
            state.step(work, grads, cfg)
            batch_losses.append(loss)
        train_losses.append(float(np.mean(batch_losses)))
        logits, _ = forward_layers(work, X_valid)
        valid_loss = cross_entropy(logits, y_valid)
        if not np.isfinite(valid_loss):
            raise NumericError(f"non-finite validation loss at epoch {epoch}")
        valid_losses.append(valid_loss)
        stopped = epoch
        if valid_loss < best_valid:
            best_valid = valid_loss
            best_epoch = epoch
            best_layers = [layer.clone() for layer in work]
            stall = 0
        else:
            stall += 1
            if stall >= cfg.patience:
                break
    history = TrainHistory(tuple(train_losses), tuple(valid_losses),
                           stopped, best_epoch)
    return best_layers, history


def glorot_stack(layer_sizes, activation: str,
                 rng: np.random.Generator) -> list[DenseLayer]:
    """Uniform Glorot-initialized hidden layers plus an identity output."""
    if len(layer_sizes) < 2:
        raise ConfigError("need at least input and output sizes")
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        kind = "identity" if i == len(layer_sizes) - 2 else activation
        layers.append(DenseLayer(weights, np.zeros(fan_out), kind, 1.0))
    return layers
