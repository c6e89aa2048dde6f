"""One-hidden-layer regression network for near-ground path loss.

Inputs are (distance m, azimuth rad, elevation rad), output is loss in dB.
Hidden units use the logistic function, the output a leaky rectifier.
Inputs and target are min-max normalized with constants stored on the model.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DomainError, InsufficientDataError, TrainingDivergenceError


def logistic(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def leaky_relu(x, slope):
    return np.maximum(x, 0.0) + slope * np.minimum(0.0, x)


@dataclass(frozen=True)
class MlpHyperparams:
    hidden: int = 16
    slope: float = 0.01
    learning_rate: float = 1e-3
    epochs: int = 2000
    batch_size: int = 32
    train_fraction: float = 0.7
    seed: int = 0


@dataclass(frozen=True)
class MlpModel:
    w1: np.ndarray  # (hidden, 3)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (1, hidden)
    b2: np.ndarray  # (1,)
    slope: float
    x_min: np.ndarray
    x_max: np.ndarray
    y_min: float
    y_max: float
    validation_rmse: float = float("nan")

    def __post_init__(self):
        if self.slope == 0:
            raise DomainError("output slope must be non-zero")
        for a in (self.w1, self.b1, self.w2, self.b2):
            if not np.all(np.isfinite(a)):
                raise DomainError("non-finite network parameters")

    @property
    def hidden(self):
        return self.w1.shape[0]

    def _normalize(self, x):
        return (x - self.x_min) / (self.x_max - self.x_min)

    def forward_normalized(self, xn):
        z = logistic(xn @ self.w1.T + self.b1)
        return leaky_relu(z @ self.w2.T + self.b2, self.slope)[..., 0]

    def predict(self, d, alpha, beta):
        x = np.stack(np.broadcast_arrays(np.asarray(d, float), np.asarray(alpha, float),
                                         np.asarray(beta, float)), axis=-1)
        yn = self.forward_normalized(self._normalize(x))
        return self.y_min + yn * (self.y_max - self.y_min)

    def lipschitz_bound(self):
        """Upper bound on the gradient norm of ``predict`` in original units."""
        scale = 1.0 / (self.x_max - self.x_min)
        out_slope = max(1.0, abs(self.slope))
        return ((self.y_max - self.y_min) * out_slope * np.linalg.norm(self.w2, 2) * 0.25
                * np.linalg.norm(self.w1 * scale[None, :], 2))


def predict_ngs_pl(model: MlpModel, d, alpha, beta):
    """Forward pass plus an extrapolation flag (inputs outside the training box)."""
    x = np.stack(np.broadcast_arrays(np.asarray(d, float), np.asarray(alpha, float),
                                     np.asarray(beta, float)), axis=-1)
    extrapolated = np.any((x < model.x_min) | (x > model.x_max), axis=-1)
    return model.predict(d, alpha, beta), extrapolated


def train_mlp(d, alpha, beta, pl, hp: MlpHyperparams = MlpHyperparams()) -> MlpModel:
    """Fit the network by mini-batch backpropagation (Adam steps) on MSE.

    The samples are shuffled and split 7:3 into training and validation sets;
    the returned model carries the validation RMSE in dB.
    """
    x = np.stack([np.asarray(d, float), np.asarray(alpha, float), np.asarray(beta, float)], axis=-1)
    y = np.asarray(pl, float)
    if x.shape[0] < 50:
        raise InsufficientDataError("need at least 50 training samples")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("training data must be finite")
    if hp.slope == 0:
        raise DomainError("output slope must be non-zero")

    rng = np.random.default_rng(hp.seed)
    perm = rng.permutation(len(y))
    n_tr = int(round(hp.train_fraction * len(y)))
    tr, va = perm[:n_tr], perm[n_tr:]

    x_min, x_max = x[tr].min(axis=0), x[tr].max(axis=0)
    x_max = np.where(x_max > x_min, x_max, x_min + 1.0)
    y_min, y_max = float(y[tr].min()), float(y[tr].max())
    if y_max <= y_min:
        y_max = y_min + 1.0
    xn = (x - x_min) / (x_max - x_min)
    yn = (y - y_min) / (y_max - y_min)

    h = hp.hidden
    params = {
        "w1": rng.normal(0.0, np.sqrt(2.0 / (3 + h)), (h, 3)),
        "b1": np.zeros(h),
        "w2": rng.normal(0.0, np.sqrt(2.0 / (h + 1)), (1, h)),
        "b2": np.full(1, 0.5),
    }
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(v) for k, v in params.items()}
    b1c, b2c, eps = 0.9, 0.999, 1e-8
    step = 0
    xt, yt = xn[tr], yn[tr]
    for epoch in range(hp.epochs):
        order = rng.permutation(len(tr))
        loss_sum = 0.0
        for start in range(0, len(order), hp.batch_size):
            idx = order[start:start + hp.batch_size]
            xb, yb = xt[idx], yt[idx]
            a1 = xb @ params["w1"].T + params["b1"]
            z1 = logistic(a1)
            a2 = z1 @ params["w2"].T + params["b2"]
            out = leaky_relu(a2, hp.slope)[:, 0]
            err = out - yb
            loss_sum += float(err @ err)
            g_out = (2.0 / len(idx)) * err[:, None] * np.where(a2 > 0, 1.0, hp.slope)
            grads = {
                "w2": g_out.T @ z1,
                "b2": g_out.sum(axis=0),
            }
            g_hid = (g_out @ params["w2"]) * z1 * (1.0 - z1)
            grads["w1"] = g_hid.T @ xb
            grads["b1"] = g_hid.sum(axis=0)
            step += 1
            for k in params:
                m[k] = b1c * m[k] + (1 - b1c) * grads[k]
                v[k] = b2c * v[k] + (1 - b2c) * grads[k] ** 2
                mh = m[k] / (1 - b1c**step)
                vh = v[k] / (1 - b2c**step)
                params[k] = params[k] - hp.learning_rate * mh / (np.sqrt(vh) + eps)
        if not np.isfinite(loss_sum):
            raise TrainingDivergenceError(epoch)

    model = MlpModel(params["w1"], params["b1"], params["w2"], params["b2"], hp.slope,
                     x_min, x_max, y_min, y_max)
    pred = model.predict(x[va, 0], x[va, 1], x[va, 2])
    rmse = float(np.sqrt(np.mean((pred - y[va]) ** 2)))
    return replace(model, validation_rmse=rmse)


# -- flat text serialization --------------------------------------------------

def save_model(model: MlpModel, path):
    """Layer sizes, then row-major weights, biases, normalization, slope, RMSE."""
    lines = [f"3 {model.hidden} 1"]
    rows = [model.w1.ravel(), model.w2.ravel(), model.b1, model.b2,
            model.x_min, model.x_max, [model.y_min, model.y_max], [model.slope, model.validation_rmse]]
    lines += [" ".join(repr(float(x)) for x in r) for r in rows]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> MlpModel:
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    n_in, h, n_out = (int(x) for x in lines[0])
    if (n_in, n_out) != (3, 1):
        raise DomainError("model file must describe a 3 -> hidden -> 1 network")
    vals = [np.array([float(x) for x in ln]) for ln in lines[1:]]
    w1, w2, b1, b2, x_min, x_max, y_rng, tail = vals
    return MlpModel(w1.reshape(h, 3), b1, w2.reshape(1, h), b2, float(tail[0]), x_min, x_max,
                    float(y_rng[0]), float(y_rng[1]), float(tail[1]))
