"""Regenerate the frozen corpus fixtures under tests/fixtures/.

The fixtures stand in for real prompt corpora: embeddings are drawn from two
overlapping 6-dim Gaussian mixtures and scores are a noisy sigmoid of a
fixed linear probe, clipped to [0, 1]. Deterministic; run once and commit.
"""

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
DIM = 6
N = 150


def make_corpus(path, mean_shift, seed, with_scores=True):
    rng = np.random.default_rng(seed)
    means = np.stack([np.full(DIM, -0.6), np.full(DIM, 0.6)])
    means[:, 0] += mean_shift
    comp = rng.integers(0, 2, size=N)
    X = means[comp] + rng.standard_normal((N, DIM))
    probe = np.array([0.7, -0.4, 0.2, 0.0, 0.3, -0.1])
    raw = 1.0 / (1.0 + np.exp(-(X @ probe + 0.1)))
    raw = np.clip(raw + 0.05 * rng.standard_normal(N), 0.0, 1.0)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(N):
            obj = {
                "id": f"{path.stem}-{i:03d}",
                "prompt": f"Write a function solving task {i} of {path.stem}.",
                "embedding": [round(float(v), 6) for v in X[i]],
            }
            if with_scores:
                obj["scores"] = {"quality": round(float(raw[i]), 6)}
            fh.write(json.dumps(obj) + "\n")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    make_corpus(OUT / "source.jsonl", 0.0, seed=101)
    make_corpus(OUT / "target.jsonl", 0.5, seed=202)
    make_corpus(OUT / "target_noscores.jsonl", 0.5, seed=202, with_scores=False)
    print("fixtures written to", OUT)
