"""Set abstraction: ball-query grouping, shared MLP with max-pool, and the
scored-sampling layer that chains scorer -> weighted sampling -> abstraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, InvalidInputError
from .geometry import PointCloud
from .sampling import ForegroundScores, SampleResult, SFpsConfig, s_fps
from .scorer import Mlp, init_linear_stack, mlp_forward


@dataclass(frozen=True)
class BallQueryConfig:
    """Neighborhood radius in meters and the per-center group size K."""

    radius: float
    max_neighbors: int

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ConfigError(f"radius must be finite and > 0, got {self.radius}")
        if self.max_neighbors < 1:
            raise ConfigError(f"max_neighbors must be >= 1, got {self.max_neighbors}")


class SharedMlp:
    """Linear stack applied point-wise: ReLU on hidden layers, linear output.

    Unlike the scorer network the output width is free; it produces the
    per-neighbor embeddings that get max-pooled into one row per center.
    """

    def __init__(self, weights, biases):
        if not weights or len(weights) != len(biases):
            raise DimensionError("weights and biases must be non-empty and parallel")
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64).reshape(-1) for b in biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or w.shape[1] != b.shape[0]:
                raise DimensionError(f"layer {i}: weight {w.shape} incompatible with bias {b.shape}")
            if i > 0 and self.weights[i - 1].shape[1] != w.shape[0]:
                raise DimensionError(f"layer {i - 1} output != layer {i} input")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise InvalidInputError(f"layer {i}: non-finite parameters")

    @property
    def input_width(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_width(self) -> int:
        return self.weights[-1].shape[1]

    @classmethod
    def seeded(cls, widths, seed: int) -> "SharedMlp":
        weights, biases = init_linear_stack(widths, seed)
        return cls(weights, biases)

    @classmethod
    def identity(cls, width: int) -> "SharedMlp":
        return cls([np.eye(width)], [np.zeros(width)])

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.input_width:
            raise DimensionError(f"input width {x.shape[-1]} != expected {self.input_width}")
        h = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
        return h @ self.weights[-1] + self.biases[-1]


@dataclass
class SasaLayer:
    """One abstraction layer: score points, sample keys, encode neighborhoods."""

    scorer: Mlp
    sampler: SFpsConfig
    ball: BallQueryConfig
    feature_mlp: SharedMlp
    budget: int

    def __post_init__(self):
        expected = 3 + self.scorer.input_width
        if self.feature_mlp.input_width != expected:
            raise DimensionError(
                f"feature MLP input width {self.feature_mlp.input_width} != 3 + {self.scorer.input_width}"
            )
        if self.budget < 1:
            raise ConfigError(f"budget must be >= 1, got {self.budget}")


def ball_query(cloud: PointCloud, centers, config: BallQueryConfig) -> np.ndarray:
    """Per-center neighbor groups: up to K in-radius indices, ascending by index.

    The center itself always qualifies at distance zero; short groups are
    padded by repeating the first qualifying index. Returns an (M, K) array.
    """
    coords = cloud.coords
    centers = np.asarray(centers, dtype=np.int64).reshape(-1)
    if centers.size and (centers.min() < 0 or centers.max() >= cloud.n):
        raise InvalidInputError("center indices out of range")
    k = config.max_neighbors
    groups = np.empty((centers.size, k), dtype=np.int64)
    for row, c in enumerate(centers):
        delta = coords - coords[c]
        dist = np.sqrt(np.einsum("ij,ij->i", delta, delta))
        hits = np.flatnonzero(dist <= config.radius)[:k]
        groups[row, : hits.size] = hits
        groups[row, hits.size :] = hits[0]
    return groups


def group_and_pool(cloud: PointCloud, centers, groups: np.ndarray, feature_mlp: SharedMlp) -> np.ndarray:
    """Encode each group and max-pool it to one feature row per center.

    Per neighbor the MLP input is (neighbor coords - center coords) followed
    by the neighbor's features.
    """
    coords = cloud.coords
    feats = cloud.require_features()
    centers = np.asarray(centers, dtype=np.int64).reshape(-1)
    if groups.shape[0] != centers.size:
        raise DimensionError(f"{groups.shape[0]} groups for {centers.size} centers")
    if feature_mlp.input_width != 3 + feats.shape[1]:
        raise DimensionError(
            f"feature MLP input width {feature_mlp.input_width} != 3 + {feats.shape[1]}"
        )
    rel = coords[groups] - coords[centers][:, None, :]  # (M, K, 3)
    stacked = np.concatenate([rel, feats[groups]], axis=2)  # (M, K, 3 + C)
    m, k, width = stacked.shape
    encoded = feature_mlp.forward(stacked.reshape(m * k, width)).reshape(m, k, -1)
    return encoded.max(axis=1)


def sasa_forward(layer: SasaLayer, cloud: PointCloud):
    """Run one layer: returns (key cloud with pooled features, scores, sampling result).

    Scores are exactly the scorer's forward output on the input features; key
    coordinates are a subset of the input coordinates.
    """
    scores = mlp_forward(layer.scorer, cloud.require_features())
    result = s_fps(cloud, scores, layer.budget, layer.sampler)
    groups = ball_query(cloud, result.indices, layer.ball)
    pooled = group_and_pool(cloud, result.indices, groups, layer.feature_mlp)
    keys = PointCloud(cloud.coords[result.indices], pooled)
    return keys, scores, result
