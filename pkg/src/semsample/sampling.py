"""Point down-sampling algorithms.

Implements farthest point sampling (FPS), feature-space FPS, top-K score
selection, score-weighted FPS where each candidate's distance to the selected
set is scaled by its foreground score raised to a balance exponent gamma, and
the fusion strategy that splits one budget between the score-weighted and the
plain sampler.

All samplers are deterministic: every argmax breaks exact ties by preferring
the larger unweighted distance first (relevant only for the weighted sampler,
where degenerate all-zero scores would otherwise make every candidate equal)
and the lowest index last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, ConfigError, DimensionError, InvalidInputError
from .geometry import PointCloud


@dataclass(frozen=True)
class ForegroundScores:
    """Per-point foreground score in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if not np.isfinite(values).all():
            raise InvalidInputError("scores contain non-finite values")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise InvalidInputError("scores must lie in [0, 1]")
        values = np.ascontiguousarray(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SFpsConfig:
    """Balance exponent gamma and the (fixed) tie-break policy.

    gamma = 0 reduces the weighted sampler exactly to plain FPS; large gamma
    approaches top-K score selection.
    """

    gamma: float = 1.0
    tie_break: str = "lowest_index"

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ConfigError(f"gamma must be finite and >= 0, got {self.gamma}")
        if self.tie_break != "lowest_index":
            raise ConfigError(f"unsupported tie_break policy: {self.tie_break!r}")


@dataclass
class SFpsState:
    """Mutable loop state: selection order, min-distance array, visited flags."""

    selected: list[int] = field(default_factory=list)
    distances: np.ndarray | None = None
    visited: np.ndarray | None = None


@dataclass(frozen=True)
class SampleResult:
    """Selected point indices in selection order, plus optional per-step diagnostics.

    ``per_step_weighted_distance[i]`` is the weighted distance of the i-th pick
    at the moment it was selected; the first pick is score-driven so its entry
    is +inf (or 0 for a zero-weight point).
    """

    indices: np.ndarray
    per_step_weighted_distance: np.ndarray | None = None

    def __post_init__(self):
        indices = np.ascontiguousarray(np.asarray(self.indices, dtype=np.int64))
        if len(set(indices.tolist())) != indices.shape[0]:
            raise InvalidInputError("sample indices contain duplicates")
        indices.setflags(write=False)
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return self.indices.shape[0]


def weighted_distance(p: float, d: float, gamma: float) -> float:
    """Score-weighted distance p**gamma * d.

    Conventions: p**0 == 1 for every p (so gamma = 0 recovers the unweighted
    distance), 0**gamma == 0 for gamma > 0, and a zero weight annihilates an
    infinite distance.
    """
    w = 1.0 if gamma == 0.0 else p**gamma
    if w == 0.0:
        return 0.0
    return w * d


def _check_budget(m: int, n: int) -> None:
    if n == 0:
        raise BudgetError("cannot sample from an empty cloud")
    if m < 1 or m > n:
        raise BudgetError(f"budget m={m} outside [1, {n}]")


def _check_scores(scores: ForegroundScores, n: int) -> np.ndarray:
    if len(scores) != n:
        raise DimensionError(f"{len(scores)} scores for {n} points")
    return scores.values


def _select_greedy(n, m, first, weights, distances_from, want_diag):
    """Greedy selection maximizing weights * min-distance-to-selected.

    ``distances_from(k)`` returns the distance from point k to every point.
    Ties on the weighted distance prefer the larger unweighted distance, then
    the lowest index.
    """
    state = SFpsState(
        selected=[],
        distances=np.full(n, np.inf),
        visited=np.zeros(n, dtype=bool),
    )
    diag = np.empty(m, dtype=np.float64) if want_diag else None
    k = first
    for step in range(m):
        d = state.distances
        if step > 0:
            wd = weights * d  # d is finite after the first update, so no 0*inf
            wd[state.visited] = -np.inf
            k = int(np.argmax(wd))
            ties = np.flatnonzero(wd == wd[k])
            if ties.size > 1:
                k = int(ties[np.argmax(d[ties])])
        if want_diag:
            w = weights[k]
            diag[step] = 0.0 if w == 0.0 else w * d[k]
        state.selected.append(k)
        state.visited[k] = True
        np.minimum(d, distances_from(k), out=d)
    return np.asarray(state.selected, dtype=np.int64), diag


def _coord_distances(coords: np.ndarray):
    def distances_from(k: int) -> np.ndarray:
        delta = coords - coords[k]
        return np.sqrt(np.einsum("ij,ij->i", delta, delta))

    return distances_from


def s_fps(
    cloud: PointCloud,
    scores: ForegroundScores,
    m: int,
    config: SFpsConfig = SFpsConfig(),
) -> SampleResult:
    """Score-weighted farthest point sampling.

    The first pick is the highest-scoring point; every later pick maximizes
    score**gamma times the distance to the already-selected set, with the
    min-distance array updated after each pick.
    """
    n = cloud.n
    _check_budget(m, n)
    p = _check_scores(scores, n)
    weights = np.ones(n) if config.gamma == 0.0 else p**config.gamma
    first = int(np.argmax(p))
    indices, diag = _select_greedy(n, m, first, weights, _coord_distances(cloud.coords), True)
    return SampleResult(indices, diag)


def fps(cloud: PointCloud, m: int, start_index: int = 0) -> SampleResult:
    """Classic farthest point sampling from an explicit start index."""
    n = cloud.n
    _check_budget(m, n)
    if not 0 <= start_index < n:
        raise InvalidInputError(f"start_index {start_index} outside [0, {n})")
    weights = np.ones(n)
    indices, diag = _select_greedy(
        n, m, start_index, weights, _coord_distances(cloud.coords), True
    )
    return SampleResult(indices, diag)


def f_fps(
    cloud: PointCloud, m: int, lambda_c: float = 1.0, start_index: int = 0
) -> SampleResult:
    """FPS over a combined metric: lambda_c * coordinate distance + feature distance."""
    n = cloud.n
    feats = cloud.require_features()
    _check_budget(m, n)
    if not (math.isfinite(lambda_c) and lambda_c >= 0.0):
        raise ConfigError(f"lambda_c must be finite and >= 0, got {lambda_c}")
    if not 0 <= start_index < n:
        raise InvalidInputError(f"start_index {start_index} outside [0, {n})")
    coords = cloud.coords

    def distances_from(k: int) -> np.ndarray:
        dc = coords - coords[k]
        df = feats - feats[k]
        return lambda_c * np.sqrt(np.einsum("ij,ij->i", dc, dc)) + np.sqrt(
            np.einsum("ij,ij->i", df, df)
        )

    weights = np.ones(n)
    indices, diag = _select_greedy(n, m, start_index, weights, distances_from, True)
    return SampleResult(indices, diag)


def top_k_scores(scores: ForegroundScores, m: int) -> SampleResult:
    """Indices of the m largest scores, descending; ties broken by lowest index."""
    n = len(scores)
    _check_budget(m, n)
    order = np.argsort(-scores.values, kind="stable")[:m]
    return SampleResult(order.astype(np.int64))


def fusion_sample(
    cloud: PointCloud,
    scores: ForegroundScores,
    m_total: int,
    config: SFpsConfig = SFpsConfig(),
) -> tuple[SampleResult, SampleResult]:
    """Split an even budget: half score-weighted FPS (candidates), half FPS (context).

    Both halves sample independently from the full input, so overlap between
    the halves is allowed; each half is duplicate-free.
    """
    if m_total < 2 or m_total % 2 != 0:
        raise BudgetError(f"fusion budget must be an even positive integer, got {m_total}")
    half = m_total // 2
    if half > cloud.n:
        raise BudgetError(f"fusion half-budget {half} exceeds point count {cloud.n}")
    candidates = s_fps(cloud, scores, half, config)
    context = fps(cloud, half, start_index=0)
    return candidates, context
