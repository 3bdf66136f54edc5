"""Sampling-quality metrics: per-box point recall and foreground rate,
with multi-scene aggregation and table/CSV report emission."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInputError, UndefinedMetricError
from .geometry import PointCloud, contains_mask, label_points
from .sampling import SampleResult

CSV_COLUMNS = ("method", "level", "budget", "foreground_rate", "point_recall", "scenes")


@dataclass(frozen=True)
class SceneReport:
    """Metrics for one sampled scene; recall is None when the scene has no boxes."""

    scene: str
    n_boxes: int
    boxes_hit: int
    point_recall: float | None
    foreground_rate: float


@dataclass(frozen=True)
class SamplingReport:
    """Aggregate over scenes for one (method, level, budget) cell.

    ``point_recall`` is the macro (or micro) average over scenes that have
    boxes and is None when no scene does; ``recall_scenes`` counts the scenes
    that contributed to it.
    """

    method: str
    budget: int
    point_recall: float | None
    foreground_rate: float
    scenes: int
    per_scene: tuple[SceneReport, ...]
    level: int = 1
    recall_scenes: int = 0


def _sampled_coords(sampled: SampleResult, cloud: PointCloud) -> np.ndarray:
    idx = sampled.indices
    if idx.size and (idx.min() < 0 or idx.max() >= cloud.n):
        raise DimensionError("sampled indices out of range for this cloud")
    return cloud.coords[idx]


def point_recall(sampled: SampleResult, cloud: PointCloud, boxes) -> float:
    """Fraction of boxes containing at least one sampled point."""
    boxes = list(boxes)
    if not boxes:
        raise UndefinedMetricError("point recall is undefined without boxes")
    coords = _sampled_coords(sampled, cloud)
    hit = sum(1 for box in boxes if contains_mask(coords, box).any())
    return hit / len(boxes)


def foreground_rate(sampled: SampleResult, cloud: PointCloud, boxes) -> float:
    """Fraction of sampled points lying inside any box."""
    if len(sampled) == 0:
        raise InvalidInputError("foreground rate needs at least one sampled point")
    coords = _sampled_coords(sampled, cloud)
    labels = label_points(PointCloud(coords), boxes)
    return float(labels.labels.mean())


def scene_report(scene: str, sampled: SampleResult, cloud: PointCloud, boxes) -> SceneReport:
    """Per-scene metrics row; tolerates box-free scenes by leaving recall None."""
    boxes = list(boxes)
    coords = _sampled_coords(sampled, cloud)
    hit = sum(1 for box in boxes if contains_mask(coords, box).any())
    recall = hit / len(boxes) if boxes else None
    return SceneReport(
        scene=scene,
        n_boxes=len(boxes),
        boxes_hit=hit,
        point_recall=recall,
        foreground_rate=foreground_rate(sampled, cloud, boxes),
    )


def aggregate(method: str, budget: int, reports, level: int = 1, micro: bool = False) -> SamplingReport:
    """Combine per-scene rows: unweighted mean rates, recall over box-bearing scenes.

    ``micro=True`` pools boxes across scenes instead of averaging per-scene
    recalls.
    """
    reports = tuple(reports)
    if not reports:
        raise InvalidInputError("aggregate needs at least one scene report")
    with_boxes = [r for r in reports if r.n_boxes > 0]
    if not with_boxes:
        recall = None
    elif micro:
        recall = sum(r.boxes_hit for r in with_boxes) / sum(r.n_boxes for r in with_boxes)
    else:
        recall = float(np.mean([r.point_recall for r in with_boxes]))
    return SamplingReport(
        method=method,
        budget=budget,
        point_recall=recall,
        foreground_rate=float(np.mean([r.foreground_rate for r in reports])),
        scenes=len(reports),
        per_scene=reports,
        level=level,
        recall_scenes=len(with_boxes),
    )


def _recall_cell(value: float | None, fmt: str = "{:.4f}") -> str:
    return fmt.format(value) if value is not None else "undefined"


def format_table(reports) -> str:
    """Aligned plain-text table with one row per aggregate report."""
    header = ("method", "level", "budget", "fg_rate", "recall", "scenes")
    rows = [header]
    for r in reports:
        rows.append(
            (
                r.method,
                str(r.level),
                str(r.budget),
                f"{r.foreground_rate:.4f}",
                _recall_cell(r.point_recall),
                str(r.scenes),
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_csv(path, reports) -> None:
    """Aggregate rows as CSV; floats use shortest round-trip formatting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in reports:
            writer.writerow(
                (
                    r.method,
                    r.level,
                    r.budget,
                    repr(r.foreground_rate),
                    repr(r.point_recall) if r.point_recall is not None else "",
                    r.scenes,
                )
            )


def write_per_scene_csv(path, reports) -> None:
    """Per-scene breakdown rows across all aggregate reports."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("method", "level", "budget", "scene", "n_boxes", "boxes_hit", "foreground_rate", "point_recall"))
        for r in reports:
            for s in r.per_scene:
                writer.writerow(
                    (
                        r.method,
                        r.level,
                        r.budget,
                        s.scene,
                        s.n_boxes,
                        s.boxes_hit,
                        repr(s.foreground_rate),
                        repr(s.point_recall) if s.point_recall is not None else "",
                    )
                )
