"""Trainable point foreground scorer.

A small fully-connected network with ReLU hidden layers and a single sigmoid
output maps per-point features to a foreground probability. Gradients are
computed analytically from scratch and the trainer is plain full-batch
gradient descent, which keeps every run bit-reproducible from its seed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    FormatError,
    InvalidInputError,
)
from .geometry import PointCloud, SegmentationLabels
from .rng import INIT_STREAM, philox
from .sampling import ForegroundScores

CLAMP_EPS = 1e-12

_MLP_MAGIC = b"SEMSAMPLE-MLP1\n"


def init_linear_stack(widths, seed: int):
    """Seeded weights/biases for a linear stack: uniform in +-1/sqrt(fan_in)."""
    rng = philox(seed, INIT_STREAM)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return weights, biases


@dataclass
class Mlp:
    """Feed-forward scorer network; last layer has width 1.

    ``weights[l]`` has shape (width_l, width_{l+1}); hidden activations are
    ReLU and the output passes through a sigmoid in :func:`mlp_forward`.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        if not self.weights or len(self.weights) != len(self.biases):
            raise DimensionError("weights and biases must be non-empty and parallel")
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64).reshape(-1) for b in self.biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or w.shape[1] != b.shape[0]:
                raise DimensionError(f"layer {i}: weight {w.shape} incompatible with bias {b.shape}")
            if i > 0 and self.weights[i - 1].shape[1] != w.shape[0]:
                raise DimensionError(f"layer {i - 1} output {self.weights[i - 1].shape[1]} != layer {i} input {w.shape[0]}")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise InvalidInputError(f"layer {i}: non-finite parameters")
        if self.weights[-1].shape[1] != 1:
            raise DimensionError(f"output width must be 1, got {self.weights[-1].shape[1]}")

    @property
    def layer_widths(self) -> tuple[int, ...]:
        return tuple(w.shape[0] for w in self.weights) + (1,)

    @property
    def input_width(self) -> int:
        return self.weights[0].shape[0]

    @classmethod
    def seeded(cls, widths, seed: int) -> "Mlp":
        """Fresh network with the documented uniform +-1/sqrt(fan_in) init."""
        if len(widths) < 2 or widths[-1] != 1:
            raise DimensionError(f"widths must end in 1, got {tuple(widths)}")
        weights, biases = init_linear_stack(widths, seed)
        return cls(weights, biases)

    @classmethod
    def zeros(cls, widths) -> "Mlp":
        weights = [np.zeros((i, o)) for i, o in zip(widths[:-1], widths[1:])]
        biases = [np.zeros(o) for o in widths[1:]]
        return cls(weights, biases)

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass(frozen=True)
class SegTrainConfig:
    """Gradient-descent settings for the scorer.

    ``level_weights`` defaults to the per-level loss weights 0.01 and 0.1;
    single-level training uses the first entry. ``rng_seed`` is the seed the
    caller uses for the initial parameters and is recorded for manifests.
    """

    learning_rate: float
    epochs: int
    level_weights: tuple[float, ...] = (0.01, 0.1)
    rng_seed: int = 0
    positive_class_weight: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.learning_rate) and self.learning_rate >= 0.0):
            raise ConfigError(f"learning_rate must be finite and >= 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if any(w < 0 for w in self.level_weights):
            raise ConfigError("level weights must be nonnegative")
        if self.positive_class_weight <= 0:
            raise ConfigError("positive_class_weight must be positive")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_cached(mlp: Mlp, features: np.ndarray):
    """Hidden activations plus output probabilities, for reuse in backward."""
    activations = [features]
    h = features
    for w, b in zip(mlp.weights[:-1], mlp.biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
        activations.append(h)
    z = h @ mlp.weights[-1] + mlp.biases[-1]
    return activations, _sigmoid(z[:, 0])


def mlp_forward(mlp: Mlp, features: np.ndarray) -> ForegroundScores:
    """Per-point foreground probabilities sigma(net(features))."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != mlp.input_width:
        raise DimensionError(
            f"features shape {features.shape} incompatible with input width {mlp.input_width}"
        )
    _, probs = _forward_cached(mlp, features)
    return ForegroundScores(probs)


def cross_entropy(scores: np.ndarray, labels: np.ndarray, positive_class_weight: float = 1.0) -> np.ndarray:
    """Per-point cross entropy with probabilities clamped to [eps, 1-eps]."""
    p = np.clip(np.asarray(scores, dtype=np.float64), CLAMP_EPS, 1.0 - CLAMP_EPS)
    y = np.asarray(labels, dtype=np.float64)
    return -(positive_class_weight * y * np.log(p) + (1.0 - y) * np.log1p(-p))


def seg_loss(scores_per_level, labels_per_level, level_weights, positive_class_weight: float = 1.0) -> float:
    """Weighted multi-level segmentation loss: sum_k (w_k / N_k) * sum_i CE_i."""
    if not (len(scores_per_level) == len(labels_per_level) == len(level_weights)):
        raise DimensionError("scores, labels and level weights must have equal level counts")
    total = 0.0
    for scores, labels, weight in zip(scores_per_level, labels_per_level, level_weights):
        s = scores.values if isinstance(scores, ForegroundScores) else np.asarray(scores, float)
        y = labels.labels if isinstance(labels, SegmentationLabels) else np.asarray(labels)
        if s.shape[0] != y.shape[0]:
            raise DimensionError(f"{s.shape[0]} scores for {y.shape[0]} labels")
        total += weight / s.shape[0] * cross_entropy(s, y, positive_class_weight).sum()
    return float(total)


def mlp_backward(
    mlp: Mlp,
    features: np.ndarray,
    labels: SegmentationLabels,
    level_weight: float,
    positive_class_weight: float = 1.0,
):
    """Analytic gradients of the single-level loss w.r.t. every weight and bias.

    Returns (grad_weights, grad_biases) lists matching the network layout.
    Uses the sigmoid-cross-entropy identity dL/dz = w_i * (p - y), scaled by
    level_weight / N.
    """
    features = np.asarray(features, dtype=np.float64)
    y = labels.labels.astype(np.float64)
    if features.shape[0] != y.shape[0]:
        raise DimensionError(f"{features.shape[0]} feature rows for {y.shape[0]} labels")
    if features.ndim != 2 or features.shape[1] != mlp.input_width:
        raise DimensionError(
            f"features shape {features.shape} incompatible with input width {mlp.input_width}"
        )
    n = features.shape[0]
    activations, probs = _forward_cached(mlp, features)
    point_w = np.where(y == 1.0, positive_class_weight, 1.0)
    delta = (level_weight / n * point_w * (probs - y))[:, None]
    grad_w = [np.empty(0)] * len(mlp.weights)
    grad_b = [np.empty(0)] * len(mlp.biases)
    for layer in range(len(mlp.weights) - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ mlp.weights[layer].T) * (activations[layer] > 0.0)
    return grad_w, grad_b


def train_segmenter(scenes, mlp: Mlp, config: SegTrainConfig):
    """Full-batch gradient descent over (cloud, labels) scenes.

    The epoch loss is the mean over scenes of the single-level loss with
    weight ``config.level_weights[0]``; descent starts from the parameters of
    ``mlp`` (construct it with :meth:`Mlp.seeded` for the documented init).
    Returns the trained network and the per-epoch loss history.
    """
    scenes = list(scenes)
    if not scenes:
        raise InvalidInputError("at least one training scene is required")
    batches = []
    for cloud, labels in scenes:
        feats = cloud.require_features()
        if len(labels) != cloud.n:
            raise DimensionError(f"{len(labels)} labels for {cloud.n} points")
        batches.append((feats, labels))

    level_w = config.level_weights[0]
    pos_w = config.positive_class_weight
    model = mlp.copy()
    history = []
    for _ in range(config.epochs):
        loss = 0.0
        acc_w = [np.zeros_like(w) for w in model.weights]
        acc_b = [np.zeros_like(b) for b in model.biases]
        for feats, labels in batches:
            scores = mlp_forward(model, feats)
            loss += seg_loss([scores], [labels], [level_w], pos_w)
            gw, gb = mlp_backward(model, feats, labels, level_w, pos_w)
            for a, g in zip(acc_w, gw):
                a += g
            for a, g in zip(acc_b, gb):
                a += g
        k = len(batches)
        history.append(loss / k)
        for w, g in zip(model.weights, acc_w):
            w -= config.learning_rate / k * g
        for b, g in zip(model.biases, acc_b):
            b -= config.learning_rate / k * g
    return model, history


def save_mlp(path, mlp: Mlp) -> None:
    """Write the network to a self-describing little-endian binary file."""
    widths = mlp.layer_widths
    with open(path, "wb") as fh:
        fh.write(_MLP_MAGIC)
        fh.write(struct.pack("<I", len(widths)))
        fh.write(struct.pack(f"<{len(widths)}I", *widths))
        for w, b in zip(mlp.weights, mlp.biases):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_mlp(path) -> Mlp:
    """Read a network written by :func:`save_mlp`; forward outputs match bit-exactly."""
    with open(path, "rb") as fh:
        magic = fh.read(len(_MLP_MAGIC))
        if magic != _MLP_MAGIC:
            raise FormatError(f"{path}: not a scorer file (bad magic)")

        def take(count: int) -> bytes:
            buf = fh.read(count)
            if len(buf) != count:
                raise FormatError(f"{path}: truncated scorer file")
            return buf

        (n_widths,) = struct.unpack("<I", take(4))
        if n_widths < 2:
            raise FormatError(f"{path}: needs at least 2 layer widths, got {n_widths}")
        widths = struct.unpack(f"<{n_widths}I", take(4 * n_widths))
        weights, biases = [], []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            w = np.frombuffer(take(8 * fan_in * fan_out), dtype="<f8").reshape(fan_in, fan_out)
            b = np.frombuffer(take(8 * fan_out), dtype="<f8")
            weights.append(w.astype(np.float64))
            biases.append(b.astype(np.float64))
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after parameters")
    return Mlp(weights, biases)


def score_cloud(mlp: Mlp, cloud: PointCloud) -> ForegroundScores:
    """Convenience: forward pass over a cloud's features."""
    return mlp_forward(mlp, cloud.require_features())
