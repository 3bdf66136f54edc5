"""Synthetic scene generation and point-cloud IO.

Scenes mimic outdoor sparsity: a noisy ground plane plus scattered clutter,
with a small fraction of points drawn inside car-sized upright boxes. All
randomness comes from the Philox streams in :mod:`semsample.rng`, so a scene
is fully determined by its seed.

File formats:

* KITTI ``.bin``: consecutive little-endian float32 quadruples
  (x, y, z, reflectance).
* Native scene text format (version 1)::

      semsample-scene v1
      rng philox
      seed <int>
      points <N> <C>
      <x> <y> <z> <feature...>        (repeated N times, repr round-trip floats)
      boxes <B>
      <cx> <cy> <cz> <length> <width> <height> <yaw>   (repeated B times)
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .errors import ConfigError, FormatError, InvalidInputError
from .geometry import OrientedBox, PointCloud, SegmentationLabels, contains_mask, label_points
from .rng import ORACLE_STREAM, SCENE_STREAM, VOXEL_STREAM, philox
from .sampling import ForegroundScores

SCENE_HEADER = "semsample-scene v1"
_KITTI_RECORD = 16  # 4 little-endian float32 per point

# Grid cell sizes (meters) for the two density features.
_FINE_CELL = 1.0
_COARSE_CELL = 4.0


@dataclass(frozen=True)
class SceneGenConfig:
    """Knobs for the synthetic scene generator.

    The default foreground fraction matches the ~4.4% share of in-box points
    observed on real outdoor scans at full resolution.
    """

    n_points: int = 4096
    n_objects: int = 8
    foreground_fraction_target: float = 0.044
    extent: float = 80.0
    length_range: tuple[float, float] = (3.2, 4.8)
    width_range: tuple[float, float] = (1.5, 2.1)
    height_range: tuple[float, float] = (1.4, 1.9)
    ground_share: float = 0.7
    ground_noise: float = 0.05
    clutter_height: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.n_points < 1:
            raise ConfigError(f"n_points must be >= 1, got {self.n_points}")
        if self.n_objects < 0:
            raise ConfigError(f"n_objects must be >= 0, got {self.n_objects}")
        if not 0.0 < self.foreground_fraction_target < 1.0:
            raise ConfigError("foreground_fraction_target must lie in (0, 1)")
        if self.extent <= 2.0 * max(self.length_range[1], self.width_range[1]):
            raise ConfigError("extent too small for the configured object sizes")
        for lo, hi in (self.length_range, self.width_range, self.height_range):
            if not 0 < lo <= hi:
                raise ConfigError("object dimension ranges must satisfy 0 < lo <= hi")
        if not 0.0 <= self.ground_share <= 1.0:
            raise ConfigError("ground_share must lie in [0, 1]")


@dataclass(frozen=True)
class SceneSample:
    """One generated scene: cloud, ground-truth boxes, derived labels, seed."""

    cloud: PointCloud
    boxes: tuple[OrientedBox, ...]
    labels: SegmentationLabels
    seed: int


def _foreground_budget(config: SceneGenConfig) -> int:
    if config.n_objects == 0:
        return 0
    target = int(round(config.n_points * config.foreground_fraction_target))
    if target < config.n_objects:
        raise ConfigError(
            f"foreground budget {target} cannot cover {config.n_objects} objects; "
            "raise the fraction target or drop objects"
        )
    if target >= config.n_points:
        raise ConfigError("foreground budget leaves no background points")
    return target


def _sample_boxes(rng: np.random.Generator, config: SceneGenConfig) -> list[OrientedBox]:
    half = config.extent / 2.0 - config.length_range[1] / 2.0 - 0.5
    boxes = []
    for _ in range(config.n_objects):
        cx, cy = rng.uniform(-half, half, size=2)
        length = rng.uniform(*config.length_range)
        width = rng.uniform(*config.width_range)
        height = rng.uniform(*config.height_range)
        yaw = rng.uniform(-math.pi, math.pi)
        boxes.append(OrientedBox((cx, cy, height / 2.0), (length, width, height), yaw))
    return boxes


def _points_in_box(rng: np.random.Generator, box: OrientedBox, count: int) -> np.ndarray:
    local = rng.uniform(-0.5, 0.5, size=(count, 3)) * box.dims
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    world = np.empty_like(local)
    world[:, 0] = c * local[:, 0] - s * local[:, 1]
    world[:, 1] = s * local[:, 0] + c * local[:, 1]
    world[:, 2] = local[:, 2]
    return world + box.center


def _sample_background(rng, count: int, config: SceneGenConfig, boxes) -> np.ndarray:
    n_ground = int(round(count * config.ground_share))
    half = config.extent / 2.0

    def draw(k: int, ground: bool) -> np.ndarray:
        pts = np.empty((k, 3))
        pts[:, 0] = rng.uniform(-half, half, size=k)
        pts[:, 1] = rng.uniform(-half, half, size=k)
        if ground:
            pts[:, 2] = rng.normal(0.0, config.ground_noise, size=k)
        else:
            pts[:, 2] = rng.uniform(0.0, config.clutter_height, size=k)
        return pts

    parts = []
    for kind_count, is_ground in ((n_ground, True), (count - n_ground, False)):
        pts = draw(kind_count, is_ground)
        # background points must stay outside every box; redraw offenders
        for _ in range(200):
            inside = np.zeros(kind_count, dtype=bool)
            for box in boxes:
                inside |= contains_mask(pts, box)
            if not inside.any():
                break
            pts[inside] = draw(int(inside.sum()), is_ground)
        else:
            raise ConfigError("could not place background points outside the boxes")
        parts.append(pts)
    return np.vstack(parts)


def _neighborhood_counts(coords: np.ndarray, cell: float) -> np.ndarray:
    """Number of points in the 3x3x3 block of grid cells around each point."""
    cells = np.floor(coords / cell).astype(np.int64)
    uniq, inverse, counts = np.unique(cells, axis=0, return_inverse=True, return_counts=True)
    table = {tuple(c): int(k) for c, k in zip(uniq.tolist(), counts.tolist())}
    totals = np.zeros(uniq.shape[0], dtype=np.float64)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                for i, c in enumerate(uniq.tolist()):
                    totals[i] += table.get((c[0] + dx, c[1] + dy, c[2] + dz), 0)
    return totals[inverse]


def local_features(coords: np.ndarray) -> np.ndarray:
    """Per-point feature vector: height plus log-density at two grid scales."""
    feats = np.empty((coords.shape[0], 3))
    feats[:, 0] = coords[:, 2]
    feats[:, 1] = np.log1p(_neighborhood_counts(coords, _FINE_CELL))
    feats[:, 2] = np.log1p(_neighborhood_counts(coords, _COARSE_CELL))
    return feats


def gen_scene(config: SceneGenConfig) -> SceneSample:
    """Generate one seeded scene; identical config and seed give identical output."""
    rng = philox(config.seed, SCENE_STREAM)
    n_fg = _foreground_budget(config)
    boxes = _sample_boxes(rng, config)

    parts = []
    if boxes:
        per_box = np.full(len(boxes), n_fg // len(boxes))
        per_box[: n_fg % len(boxes)] += 1
        for box, count in zip(boxes, per_box):
            parts.append(_points_in_box(rng, box, int(count)))
    parts.append(_sample_background(rng, config.n_points - n_fg, config, boxes))
    coords = np.vstack(parts)
    coords = coords[rng.permutation(config.n_points)]

    cloud = PointCloud(coords, local_features(coords))
    labels = label_points(cloud, boxes)
    if config.n_objects > 0:
        realized = float(labels.labels.mean())
        target = config.foreground_fraction_target
        if abs(realized - target) > 0.2 * target:
            raise RuntimeError(
                f"generator invariant violated: realized foreground fraction {realized:.4f} "
                f"outside 20% of target {target:.4f}"
            )
    return SceneSample(cloud, tuple(boxes), labels, config.seed)


def oracle_scores(sample: SceneSample, noise: float, seed: int | None = None) -> ForegroundScores:
    """Labels blended with seeded uniform noise: (1-noise)*label + noise*u."""
    if not 0.0 <= noise <= 1.0:
        raise ConfigError(f"oracle noise must lie in [0, 1], got {noise}")
    rng = philox(sample.seed if seed is None else seed, ORACLE_STREAM)
    u = rng.uniform(0.0, 1.0, size=sample.cloud.n)
    y = sample.labels.labels.astype(np.float64)
    return ForegroundScores((1.0 - noise) * y + noise * u)


# ---------------------------------------------------------------------------
# KITTI binary IO
# ---------------------------------------------------------------------------

def read_kitti_bin(path) -> PointCloud:
    """Parse a KITTI velodyne file: float32 (x, y, z, reflectance) records.

    Coordinates are widened to float64; reflectance becomes a one-column
    feature matrix.
    """
    data = Path(path).read_bytes()
    if len(data) % _KITTI_RECORD != 0:
        offset = len(data) - len(data) % _KITTI_RECORD
        raise FormatError(
            f"{path}: truncated record at byte {offset} (file length {len(data)} "
            f"is not a multiple of {_KITTI_RECORD})"
        )
    records = np.frombuffer(data, dtype="<f4").reshape(-1, 4)
    coords = records[:, :3].astype(np.float64)
    reflectance = records[:, 3:].astype(np.float64)
    return PointCloud(coords, reflectance)


def write_kitti_bin(path, cloud: PointCloud) -> None:
    """Inverse of :func:`read_kitti_bin`; feature column 0 is the reflectance."""
    refl = cloud.features[:, :1] if cloud.features is not None else np.zeros((cloud.n, 1))
    records = np.hstack([cloud.coords, refl]).astype("<f4")
    Path(path).write_bytes(records.tobytes())


# ---------------------------------------------------------------------------
# Voxel-based point reduction
# ---------------------------------------------------------------------------

def voxel_downsample(cloud: PointCloud, voxel, budget: int, seed: int) -> PointCloud:
    """Keep one random original point per voxel, over at most ``budget`` voxels.

    Points are bucketed by floor(coord / voxel); when more voxels are occupied
    than the budget allows, the kept voxels are chosen uniformly at random.
    Output points (and their features) are rows of the input, never centroids.
    """
    voxel = np.asarray(voxel, dtype=np.float64).reshape(3)
    if not (np.isfinite(voxel).all() and (voxel > 0).all()):
        raise ConfigError(f"voxel sizes must be finite and > 0, got {voxel}")
    if budget < 1:
        raise ConfigError(f"voxel budget must be >= 1, got {budget}")
    if cloud.n == 0:
        return cloud
    cells = np.floor(cloud.coords / voxel).astype(np.int64)
    uniq, inverse = np.unique(cells, axis=0, return_inverse=True)
    occupied = uniq.shape[0]
    rng = philox(seed, VOXEL_STREAM)
    if occupied > budget:
        chosen = np.sort(rng.choice(occupied, size=budget, replace=False))
    else:
        chosen = np.arange(occupied)
    order = np.argsort(inverse, kind="stable")
    starts = np.searchsorted(inverse[order], np.arange(occupied))
    ends = np.append(starts[1:], inverse.shape[0])
    picks = []
    for v in chosen:
        members = order[starts[v] : ends[v]]
        picks.append(int(members[rng.integers(members.size)]))
    picks = np.asarray(picks, dtype=np.int64)
    feats = cloud.features[picks] if cloud.features is not None else None
    return PointCloud(cloud.coords[picks], feats)


# ---------------------------------------------------------------------------
# Native scene text format
# ---------------------------------------------------------------------------

def scene_save(path, sample: SceneSample) -> None:
    """Write a scene in the versioned text format documented in the module header."""
    cloud = sample.cloud
    feats = cloud.features
    n_feat = feats.shape[1] if feats is not None else 0
    lines = [SCENE_HEADER, "rng philox", f"seed {sample.seed}", f"points {cloud.n} {n_feat}"]
    for i in range(cloud.n):
        row = [repr(v) for v in cloud.coords[i].tolist()]
        if feats is not None:
            row.extend(repr(v) for v in feats[i].tolist())
        lines.append(" ".join(row))
    lines.append(f"boxes {len(sample.boxes)}")
    for box in sample.boxes:
        vals = box.center.tolist() + box.dims.tolist() + [box.yaw]
        lines.append(" ".join(repr(v) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_floats(path, lineno: int, line: str, count: int) -> list[float]:
    tokens = line.split()
    if len(tokens) != count:
        raise FormatError(f"{path}:{lineno}: expected {count} fields, got {len(tokens)}")
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise FormatError(f"{path}:{lineno}: {exc}") from None


def _expect_keyword(path, lineno: int, line: str, keyword: str, n_args: int) -> list[str]:
    tokens = line.split()
    if not tokens or tokens[0] != keyword or len(tokens) != 1 + n_args:
        raise FormatError(f"{path}:{lineno}: expected '{keyword}' with {n_args} argument(s)")
    return tokens[1:]


def scene_load(path) -> SceneSample:
    """Read a scene file; labels are re-derived from the boxes on load."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from None
    lines = text.splitlines()
    if not lines or lines[0] != SCENE_HEADER:
        raise FormatError(f"{path}:1: missing or unsupported header (want '{SCENE_HEADER}')")
    _expect_keyword(path, 2, lines[1] if len(lines) > 1 else "", "rng", 1)
    (seed_str,) = _expect_keyword(path, 3, lines[2] if len(lines) > 2 else "", "seed", 1)
    try:
        seed = int(seed_str)
    except ValueError:
        raise FormatError(f"{path}:3: seed must be an integer") from None
    n_str, c_str = _expect_keyword(path, 4, lines[3] if len(lines) > 3 else "", "points", 2)
    try:
        n, n_feat = int(n_str), int(c_str)
    except ValueError:
        raise FormatError(f"{path}:4: point counts must be integers") from None
    if n < 0 or n_feat < 0:
        raise FormatError(f"{path}:4: negative point or feature count")

    row_width = 3 + n_feat
    needed = 4 + n
    if len(lines) <= needed:
        raise FormatError(f"{path}:{len(lines)}: file ends before the box section")
    coords = np.empty((n, 3))
    feats = np.empty((n, n_feat)) if n_feat else None
    for i in range(n):
        vals = _parse_floats(path, 5 + i, lines[4 + i], row_width)
        coords[i] = vals[:3]
        if feats is not None:
            feats[i] = vals[3:]
    (b_str,) = _expect_keyword(path, needed + 1, lines[needed], "boxes", 1)
    try:
        n_boxes = int(b_str)
    except ValueError:
        raise FormatError(f"{path}:{needed + 1}: box count must be an integer") from None
    if len(lines) != needed + 1 + n_boxes:
        raise FormatError(
            f"{path}:{len(lines)}: expected {n_boxes} box rows after line {needed + 1}"
        )
    boxes = []
    for j in range(n_boxes):
        vals = _parse_floats(path, needed + 2 + j, lines[needed + 1 + j], 7)
        try:
            boxes.append(OrientedBox(vals[0:3], vals[3:6], vals[6]))
        except InvalidInputError as exc:
            raise FormatError(f"{path}:{needed + 2 + j}: {exc}") from None
    cloud = PointCloud(coords, feats)
    return SceneSample(cloud, tuple(boxes), label_points(cloud, boxes), seed)


# ---------------------------------------------------------------------------
# Scene set manifests
# ---------------------------------------------------------------------------

def config_hash(config: SceneGenConfig) -> str:
    """Stable hash over the canonicalized generation config, seed excluded."""
    payload = asdict(config)
    payload.pop("seed")
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def generate_scene_set(out_dir, count: int, base_seed: int, config: SceneGenConfig):
    """Write ``count`` scenes (seeds base_seed..base_seed+count-1) plus a manifest.

    Returns (manifest_path, scene_paths).
    """
    if count < 1:
        raise ConfigError(f"scene count must be >= 1, got {count}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    paths = []
    for i in range(count):
        seed = base_seed + i
        sample = gen_scene(
            SceneGenConfig(**{**asdict(config), "seed": seed})
        )
        name = f"scene_{i:04d}.txt"
        scene_save(out / name, sample)
        entries.append({"file": name, "seed": seed})
        paths.append(str(out / name))
    manifest = {
        "format": "semsample-manifest v1",
        "count": count,
        "base_seed": base_seed,
        "config": {k: v for k, v in asdict(config).items() if k != "seed"},
        "config_hash": config_hash(config),
        "scenes": entries,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return str(manifest_path), paths


def load_scene_set(scene_dir) -> list[SceneSample]:
    """Load every scene listed by the directory's manifest (or all scene files)."""
    root = Path(scene_dir)
    manifest = root / "manifest.json"
    if manifest.exists():
        try:
            meta = json.loads(manifest.read_text())
            files = [root / entry["file"] for entry in meta["scenes"]]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise FormatError(f"{manifest}: malformed manifest ({exc})") from None
    else:
        files = sorted(root.glob("scene_*.txt"))
    if not files:
        raise FormatError(f"{scene_dir}: no scenes found")
    return [scene_load(p) for p in files]
