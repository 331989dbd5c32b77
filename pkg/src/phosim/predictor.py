"""Time-to-blockage regression: dataset generation, a small MLP trained with Adam, R^2.

The network maps (x, y, speed) to the time left before the user reaches the
blocked area. Everything is plain numpy in float64 so training is
bit-reproducible for a given seed.
"""

from __future__ import annotations

import csv
import logging
import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigError
from .scene import MPH_TO_MPS

log = logging.getLogger(__name__)

DEFAULT_SPEEDS_MPH = (5, 10, 15, 20, 25, 30, 35)
DEFAULT_SPEEDS_MPS = tuple(v * MPH_TO_MPS for v in DEFAULT_SPEEDS_MPH)

DATASET_COLUMNS = ("x_m", "y_m", "speed_mps", "t_to_blk_s")
MODEL_MAGIC = b"PHOREG\x00\x00"
MODEL_VERSION = 1
ACTIVATIONS = {"tanh": 0}


class TrainingError(RuntimeError):
    def __init__(self, epoch, msg="training diverged"):
        super().__init__(f"{msg} at epoch {epoch}")
        self.epoch = epoch


class ModelError(RuntimeError):
    pass


class MetricError(ValueError):
    pass


class InputClampedWarning(UserWarning):
    pass


def oracle_time(x, speed, blocked_start_x, direction=1):
    """Remaining time until the user at ``x`` reaches ``blocked_start_x``; zero once past it."""
    speed = np.asarray(speed, dtype=float)
    if np.any(speed <= 0):
        raise ValueError("speed must be positive")
    gap = (np.asarray(blocked_start_x, dtype=float) - np.asarray(x, dtype=float)) * direction
    out = np.maximum(0.0, gap) / speed
    return float(out) if np.ndim(out) == 0 else out


class Sample(NamedTuple):
    x: float
    y: float
    speed: float
    t_to_blk: float


@dataclass
class Dataset:
    features: np.ndarray  # (n, 3): x_m, y_m, speed_mps
    labels: np.ndarray    # (n,): seconds

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, i) -> Sample:
        x, y, v = self.features[i]
        return Sample(float(x), float(y), float(v), float(self.labels[i]))

    def subset(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(DATASET_COLUMNS)
            for (x, y, v), t in zip(self.features, self.labels):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(v)), repr(float(t))])

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or tuple(rows[0]) != DATASET_COLUMNS:
            raise ValueError(f"{path}: expected header {','.join(DATASET_COLUMNS)}")
        data = np.array(rows[1:], dtype=float).reshape(-1, 4)
        return cls(data[:, :3].copy(), data[:, 3].copy())


def generate_dataset(street_length, street_width, blocked_start_x, n=10000,
                     speeds=DEFAULT_SPEEDS_MPS, rng=None, y_range=None, direction=1) -> Dataset:
    """Uniform random (x, y) on the street, speed drawn from ``speeds``, analytic label."""
    if n <= 0:
        raise ValueError("n must be positive")
    if len(speeds) == 0:
        raise ValueError("speed set must not be empty")
    rng = rng if rng is not None else np.random.default_rng()
    y_lo, y_hi = y_range if y_range is not None else (0.0, street_width)
    x = rng.uniform(0.0, street_length, n)
    y = rng.uniform(y_lo, y_hi, n)
    v = np.asarray(speeds, dtype=float)[rng.integers(0, len(speeds), n)]
    t = oracle_time(x, v, blocked_start_x, direction)
    return Dataset(np.column_stack([x, y, v]), np.atleast_1d(t))


def split(ds: Dataset, fractions=(0.8, 0.1, 0.1), seed=0):
    """Shuffled, disjoint train/val/test partitions."""
    fr = np.asarray(fractions, dtype=float)
    if fr.shape != (3,) or np.any(fr < 0) or not math.isclose(fr.sum(), 1.0, abs_tol=1e-9):
        raise ConfigError(f"split fractions must be three non-negative numbers summing to 1, got {fractions}")
    n = len(ds)
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(fr[0] * n))
    n_val = min(int(round(fr[1] * n)), n - n_train)
    return (ds.subset(perm[:n_train]), ds.subset(perm[n_train:n_train + n_val]),
            ds.subset(perm[n_train + n_val:]))


@dataclass
class RegressionNet:
    sizes: tuple
    weights: list
    biases: list
    in_lo: np.ndarray
    in_hi: np.ndarray
    out_mean: float
    out_scale: float
    activation: str = "tanh"

    def __post_init__(self):
        if np.any(self.in_hi <= self.in_lo):
            raise ValueError("input normaliser ranges must be non-degenerate")
        if not self.out_scale > 0:
            raise ValueError("output scale must be positive")

    @property
    def params(self) -> list:
        return self.weights + self.biases

    def scale_inputs(self, X):
        return 2.0 * (np.asarray(X, dtype=float) - self.in_lo) / (self.in_hi - self.in_lo) - 1.0

    def forward(self, Xs):
        """Normalised output for already-scaled inputs; also returns hidden activations."""
        acts = [Xs]
        h = Xs
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.tanh(h @ W + b)
            acts.append(h)
        return h @ self.weights[-1] + self.biases[-1], acts


def init_net(sizes, in_lo, in_hi, out_mean, out_scale, rng) -> RegressionNet:
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        lim = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-lim, lim, (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return RegressionNet(tuple(sizes), weights, biases, np.asarray(in_lo, float),
                         np.asarray(in_hi, float), float(out_mean), float(out_scale))


def loss_and_grads(net: RegressionNet, Xs, yn):
    """Mean squared error in normalised label units and its gradient (weights then biases)."""
    out, acts = net.forward(Xs)
    m = len(yn)
    err = out[:, 0] - yn
    loss = float(err @ err) / m
    g = (2.0 / m) * err[:, None]
    gW, gb = [None] * len(net.weights), [None] * len(net.biases)
    for i in range(len(net.weights) - 1, -1, -1):
        gW[i] = acts[i].T @ g
        gb[i] = g.sum(axis=0)
        if i > 0:
            g = (g @ net.weights[i].T) * (1.0 - acts[i] ** 2)
    return loss, gW + gb


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 20
    hidden: tuple = (64, 64)
    lr: float = 3e-3
    lr_final: float = 1e-5  # cosine-annealed per epoch from lr to lr_final
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")

    def lr_at(self, epoch: int) -> float:
        if self.epochs == 1:
            return self.lr
        c = 0.5 * (1.0 + math.cos(math.pi * epoch / (self.epochs - 1)))
        return self.lr_final + (self.lr - self.lr_final) * c


@dataclass
class History:
    epoch: list = field(default_factory=list)
    train_mse: list = field(default_factory=list)
    val_mse: list = field(default_factory=list)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("epoch", "train_mse", "val_mse"))
            for row in zip(self.epoch, self.train_mse, self.val_mse):
                w.writerow([row[0], repr(row[1]), repr(row[2])])


def _mse_seconds(net, ds):
    if len(ds) == 0:
        return float("nan")
    pred = predict_batch(net, ds.features, warn=False)
    return float(np.mean((pred - ds.labels) ** 2))


def train(train_ds: Dataset, val_ds: Optional[Dataset], cfg: TrainConfig = TrainConfig()):
    """Mini-batch Adam on MSE. Returns (net, History) with per-epoch MSE in s^2."""
    if len(train_ds) == 0:
        raise ValueError("training set is empty")
    if cfg.batch_size > len(train_ds):
        raise ConfigError("batch_size exceeds the training set size")
    rng = np.random.default_rng(cfg.seed)
    X, y = train_ds.features, train_ds.labels
    lo, hi = X.min(axis=0), X.max(axis=0)
    hi = np.where(hi > lo, hi, lo + 1.0)  # a constant feature still needs a usable range
    std = float(y.std())
    net = init_net((3, *cfg.hidden, 1), lo, hi, float(y.mean()), std if std > 0 else 1.0, rng)
    Xs = net.scale_inputs(X)
    yn = (y - net.out_mean) / net.out_scale
    opt = Adam(net.params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    hist = History()
    n = len(y)
    for epoch in range(cfg.epochs):
        opt.lr = cfg.lr_at(epoch)
        perm = rng.permutation(n)
        for k in range(0, n, cfg.batch_size):
            idx = perm[k:k + cfg.batch_size]
            loss, grads = loss_and_grads(net, Xs[idx], yn[idx])
            if not math.isfinite(loss):
                raise TrainingError(epoch + 1)
            opt.step(net.params, grads)
        tr = _mse_seconds(net, train_ds)
        if not math.isfinite(tr):
            raise TrainingError(epoch + 1)
        hist.epoch.append(epoch + 1)
        hist.train_mse.append(tr)
        hist.val_mse.append(_mse_seconds(net, val_ds) if val_ds is not None else float("nan"))
        log.debug("epoch %d train_mse %.3e val_mse %.3e", epoch + 1, tr, hist.val_mse[-1])
    return net, hist


def predict_batch(net: RegressionNet, X, warn=True):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Xc = np.clip(X, net.in_lo, net.in_hi)
    if warn and np.any(Xc != X):
        warnings.warn("inputs outside the training range were clamped", InputClampedWarning,
                      stacklevel=2)
    out, _ = net.forward(net.scale_inputs(Xc))
    t = out[:, 0] * net.out_scale + net.out_mean
    if not np.all(np.isfinite(t)):
        raise ModelError("model produced a non-finite prediction")
    return t


def predict(net: RegressionNet, x, y, speed) -> float:
    """Predicted seconds until the blocked area for one observation."""
    return float(predict_batch(net, [[x, y, speed]])[0])


def r2_score(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if len(y_true) < 2:
        raise MetricError("R^2 needs at least two samples")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0:
        raise MetricError("R^2 is undefined for constant labels")
    return 1.0 - float(np.sum((y_true - y_pred) ** 2)) / ss_tot


def r_squared(net: RegressionNet, test: Dataset) -> float:
    return r2_score(test.labels, predict_batch(net, test.features, warn=False))


def save_model(net: RegressionNet, path):
    """Little-endian binary: header (magic, version, sizes, activation, normaliser)
    followed by each layer's row-major weights then biases as float64."""
    sizes = list(net.sizes)
    parts = [MODEL_MAGIC, struct.pack("<II", MODEL_VERSION, len(sizes)),
             struct.pack(f"<{len(sizes)}I", *sizes), struct.pack("<I", ACTIVATIONS[net.activation]),
             np.concatenate([net.in_lo, net.in_hi, [net.out_mean, net.out_scale]]).astype("<f8").tobytes()]
    for W, b in zip(net.weights, net.biases):
        parts.append(np.ascontiguousarray(W, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_model(path) -> RegressionNet:
    buf = Path(path).read_bytes()
    try:
        return _decode_model(buf, path)
    except (struct.error, ValueError) as exc:
        raise ModelError(f"{path}: corrupt model file ({exc})") from None


def _decode_model(buf: bytes, path) -> RegressionNet:
    if buf[:8] != MODEL_MAGIC:
        raise ModelError(f"{path}: not a model file")
    version, n_sizes = struct.unpack_from("<II", buf, 8)
    if version != MODEL_VERSION:
        raise ModelError(f"{path}: unsupported model version {version}")
    off = 16
    sizes = struct.unpack_from(f"<{n_sizes}I", buf, off)
    off += 4 * n_sizes
    (act_code,) = struct.unpack_from("<I", buf, off)
    off += 4
    act = {v: k for k, v in ACTIVATIONS.items()}.get(act_code)
    if act is None:
        raise ModelError(f"{path}: unknown activation code {act_code}")
    n_in = sizes[0]
    norm = np.frombuffer(buf, "<f8", 2 * n_in + 2, off).astype(float)
    off += 8 * (2 * n_in + 2)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        W = np.frombuffer(buf, "<f8", fan_in * fan_out, off).astype(float).reshape(fan_in, fan_out)
        off += 8 * fan_in * fan_out
        b = np.frombuffer(buf, "<f8", fan_out, off).astype(float)
        off += 8 * fan_out
        weights.append(W)
        biases.append(b)
    if off != len(buf):
        raise ModelError(f"{path}: trailing bytes in model file")
    return RegressionNet(tuple(sizes), weights, biases, norm[:n_in], norm[n_in:2 * n_in],
                         float(norm[-2]), float(norm[-1]), act)
