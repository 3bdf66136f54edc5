#!/usr/bin/env python3
"""Regenerate the shared sampler parity vectors used by the client tests.

Each vector freezes an input (coords, scores, budget, gamma) together with the
index sequence the core sampler produced for it. Run from the repo root:

    python3 frontend/scripts/make_test_vectors.py
"""

import json
from pathlib import Path

import numpy as np

from semsample import ForegroundScores, PointCloud, SFpsConfig, s_fps

OUT = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "sfps_vectors.json"


def make_vectors():
    rng = np.random.default_rng(20240915)
    vectors = []

    # the documented hand-trace instance
    vectors.append(
        {
            "coords": [[0, 0, 0], [1, 0, 0], [10, 0, 0], [11, 0, 0]],
            "scores": [0.9, 0.1, 0.5, 0.8],
            "m": 3,
            "gamma": 1.0,
        }
    )
    # budget one: the score argmax
    vectors.append(
        {
            "coords": [[0, 0, 0], [2, 0, 0], [4, 0, 0]],
            "scores": [0.2, 0.9, 0.4],
            "m": 1,
            "gamma": 1.0,
        }
    )
    gammas = [0.0, 0.1, 1.0, 10.0, 100.0]
    while len(vectors) < 100:
        n = int(rng.integers(2, 257))
        vectors.append(
            {
                "coords": rng.uniform(-20, 20, size=(n, 3)).tolist(),
                "scores": rng.uniform(0, 1, size=n).tolist(),
                "m": int(rng.integers(1, n + 1)),
                "gamma": gammas[len(vectors) % len(gammas)],
            }
        )

    for vec in vectors:
        result = s_fps(
            PointCloud(np.asarray(vec["coords"], dtype=float)),
            ForegroundScores(vec["scores"]),
            vec["m"],
            SFpsConfig(gamma=vec["gamma"]),
        )
        vec["expected"] = result.indices.tolist()
    return vectors


def main():
    vectors = make_vectors()
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(vectors) + "\n")
    print(f"wrote {len(vectors)} vectors to {OUT}")


if __name__ == "__main__":
    main()
