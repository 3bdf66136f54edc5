"""Spatial primitives: point clouds, upright oriented boxes, containment and labels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInputError

_TAU = 2.0 * math.pi


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PointCloud:
    """N points with xyz coordinates in meters and optional per-point features.

    Coordinates are stored as a read-only (N, 3) float64 matrix; features, when
    present, as a read-only (N, C) float64 matrix with one row per point.
    """

    coords: np.ndarray
    features: np.ndarray | None = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise DimensionError(f"coords must have shape (N, 3), got {coords.shape}")
        if not np.isfinite(coords).all():
            raise InvalidInputError("coords contain non-finite values")
        object.__setattr__(self, "coords", _freeze(coords))
        if self.features is not None:
            feats = np.asarray(self.features, dtype=np.float64)
            if feats.ndim != 2:
                raise DimensionError(f"features must be 2-D, got shape {feats.shape}")
            if feats.shape[0] != coords.shape[0]:
                raise DimensionError(
                    f"features have {feats.shape[0]} rows for {coords.shape[0]} points"
                )
            if not np.isfinite(feats).all():
                raise InvalidInputError("features contain non-finite values")
            object.__setattr__(self, "features", _freeze(feats))

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def require_features(self) -> np.ndarray:
        from .errors import MissingFeaturesError

        if self.features is None:
            raise MissingFeaturesError("point cloud has no features")
        return self.features


@dataclass(frozen=True)
class OrientedBox:
    """Upright 3D box: center, (length, width, height) and yaw about the vertical axis.

    Yaw is normalized into (-pi, pi] on construction.
    """

    center: np.ndarray
    dims: np.ndarray
    yaw: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.float64).reshape(3)
        dims = np.asarray(self.dims, dtype=np.float64).reshape(3)
        if not (np.isfinite(center).all() and np.isfinite(dims).all() and math.isfinite(self.yaw)):
            raise InvalidInputError("box parameters contain non-finite values")
        if not (dims > 0).all():
            raise InvalidInputError(f"box dims must be strictly positive, got {dims}")
        yaw = math.remainder(self.yaw, _TAU)  # lands in [-pi, pi]
        if yaw <= -math.pi:
            yaw += _TAU
        object.__setattr__(self, "center", _freeze(center))
        object.__setattr__(self, "dims", _freeze(dims))
        object.__setattr__(self, "yaw", float(yaw))

    @property
    def length(self) -> float:
        return float(self.dims[0])

    @property
    def width(self) -> float:
        return float(self.dims[1])

    @property
    def height(self) -> float:
        return float(self.dims[2])


@dataclass(frozen=True)
class SegmentationLabels:
    """Per-point binary labels: 1 for foreground, 0 for background."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DimensionError(f"labels must be 1-D, got shape {labels.shape}")
        if not np.isin(labels, (0, 1)).all():
            raise InvalidInputError("labels must be 0 or 1")
        labels = np.ascontiguousarray(labels, dtype=np.int64)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.shape[0]


def contains_mask(coords: np.ndarray, box: OrientedBox) -> np.ndarray:
    """Boolean mask over (N, 3) coords: True where the point lies inside the box.

    Boundary points count as inside.
    """
    rel = coords - box.center
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    # rotate by -yaw into the box frame
    x = c * rel[:, 0] + s * rel[:, 1]
    y = -s * rel[:, 0] + c * rel[:, 1]
    z = rel[:, 2]
    half = box.dims / 2.0
    return (np.abs(x) <= half[0]) & (np.abs(y) <= half[1]) & (np.abs(z) <= half[2])


def point_in_box(point: np.ndarray, box: OrientedBox) -> bool:
    """True iff the point lies inside the box, boundary inclusive."""
    point = np.asarray(point, dtype=np.float64).reshape(1, 3)
    if not np.isfinite(point).all():
        raise InvalidInputError("point contains non-finite values")
    return bool(contains_mask(point, box)[0])


def label_points(cloud: PointCloud, boxes) -> SegmentationLabels:
    """Label each point 1 if it lies inside any box, else 0. No boxes means all zeros."""
    mask = np.zeros(cloud.n, dtype=bool)
    for box in boxes:
        mask |= contains_mask(cloud.coords, box)
    return SegmentationLabels(mask.astype(np.int64))


def euclidean_distance(a, b) -> float:
    """Plain (non-squared) Euclidean distance between two 3-vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm(a - b))
