"""Prompt corpora, score normalization, and the shared embedding projection.

A corpus is an ordered set of prompt records loaded from JSON-lines. Records
may carry an embedding vector and a map of raw metric scores. Both density
models consume embeddings only after they have been mapped through a single
:class:`EmbeddingSpace` (standardization plus optional PCA) fit on the union
of source and target embeddings, so that the two densities share coordinates.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CorpusFormatError, DataError

__all__ = [
    "PromptRecord",
    "Corpus",
    "ScoreNormalizer",
    "EmbeddingSpace",
    "load_corpus",
    "save_corpus",
    "attach_embeddings",
    "fit_normalizer",
    "fit_embedding_space",
    "apply_embedding_space",
    "pass_at_1",
]


@dataclass(frozen=True)
class PromptRecord:
    """One benchmark task: id, prompt text, optional embedding and raw scores."""

    id: str
    prompt: str
    embedding: tuple | None = None
    scores: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise CorpusFormatError("record id must be non-empty")
        if self.embedding is not None:
            object.__setattr__(self, "embedding", tuple(float(v) for v in self.embedding))
        for name, value in self.scores.items():
            if not math.isfinite(value):
                raise CorpusFormatError(
                    f"record {self.id!r}: score {name!r} is not finite"
                )


@dataclass(frozen=True)
class Corpus:
    """Ordered prompt records with a declared embedding dimension."""

    records: tuple
    dim: int
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.dim <= 0:
            raise CorpusFormatError(f"corpus dim must be positive, got {self.dim}")
        seen = set()
        for rec in self.records:
            if rec.id in seen:
                raise CorpusFormatError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)
            if rec.embedding is not None and len(rec.embedding) != self.dim:
                raise CorpusFormatError(
                    f"record {rec.id!r}: embedding has length {len(rec.embedding)}, "
                    f"expected {self.dim}"
                )

    def __len__(self):
        return len(self.records)

    def ids(self) -> list:
        return [rec.id for rec in self.records]

    def embedding_matrix(self) -> np.ndarray:
        """All embeddings stacked in load order; error if any record lacks one."""
        rows = []
        for rec in self.records:
            if rec.embedding is None:
                raise DataError(f"record {rec.id!r} has no embedding")
            rows.append(rec.embedding)
        return np.asarray(rows, dtype=np.float64).reshape(len(rows), self.dim)

    def score_vector(self, metric: str) -> np.ndarray:
        """Raw scores for one metric in load order; error on any missing value."""
        values = []
        for rec in self.records:
            if metric not in rec.scores:
                raise DataError(f"record {rec.id!r} has no score for metric {metric!r}")
            values.append(rec.scores[metric])
        return np.asarray(values, dtype=np.float64)

    def has_scores(self, metric: str) -> bool:
        return len(self.records) > 0 and all(metric in r.scores for r in self.records)


def load_corpus(path, dim_hint=None, name=None) -> Corpus:
    """Load a JSON-lines corpus file.

    Each line is an object ``{"id", "prompt", "embedding"?, "scores"?}``. The
    embedding dimension is inferred from the first embedding seen unless
    ``dim_hint`` is given. Errors report the offending 1-based line number.
    """
    records = []
    dim = dim_hint
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}: line {lineno}: malformed JSON ({exc.msg})")
            if not isinstance(obj, dict) or "id" not in obj or "prompt" not in obj:
                raise CorpusFormatError(f"{path}: line {lineno}: missing 'id' or 'prompt'")
            embedding = obj.get("embedding")
            if embedding is not None:
                if dim is None:
                    dim = len(embedding)
                elif len(embedding) != dim:
                    raise CorpusFormatError(
                        f"{path}: line {lineno}: embedding has length "
                        f"{len(embedding)}, expected {dim}"
                    )
            scores = obj.get("scores") or {}
            try:
                rec = PromptRecord(
                    id=str(obj["id"]),
                    prompt=str(obj["prompt"]),
                    embedding=embedding,
                    scores={str(k): float(v) for k, v in scores.items()},
                )
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"{path}: line {lineno}: {exc}")
            if any(r.id == rec.id for r in records):
                raise CorpusFormatError(f"{path}: line {lineno}: duplicate id {rec.id!r}")
            records.append(rec)
    if dim is None:
        raise CorpusFormatError(
            f"{path}: no embeddings found and no dim_hint given; cannot fix dimension"
        )
    if name is None:
        name = str(path)
    return Corpus(records=tuple(records), dim=dim, name=name)


def save_corpus(corpus: Corpus, path) -> None:
    """Write a corpus back to JSON-lines; inverse of :func:`load_corpus`."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in corpus.records:
            obj = {"id": rec.id, "prompt": rec.prompt}
            if rec.embedding is not None:
                obj["embedding"] = list(rec.embedding)
            if rec.scores:
                obj["scores"] = dict(rec.scores)
            fh.write(json.dumps(obj) + "\n")


def attach_embeddings(corpus: Corpus, path) -> Corpus:
    """Join an embedding JSON-lines file (``{"id", "vector"}``) onto a corpus by id."""
    vectors = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}: line {lineno}: malformed JSON ({exc.msg})")
            if "id" not in obj or "vector" not in obj:
                raise CorpusFormatError(f"{path}: line {lineno}: missing 'id' or 'vector'")
            vectors[str(obj["id"])] = [float(v) for v in obj["vector"]]
    dims = {len(v) for v in vectors.values()}
    if len(dims) > 1:
        raise CorpusFormatError(f"{path}: inconsistent vector dimensions {sorted(dims)}")
    missing = [rec.id for rec in corpus.records if rec.id not in vectors]
    if missing:
        raise DataError(f"no embedding for ids: {missing[:5]}{'...' if len(missing) > 5 else ''}")
    dim = dims.pop() if dims else corpus.dim
    records = tuple(
        PromptRecord(rec.id, rec.prompt, embedding=vectors[rec.id], scores=rec.scores)
        for rec in corpus.records
    )
    return Corpus(records=records, dim=dim, name=corpus.name)


@dataclass(frozen=True)
class ScoreNormalizer:
    """Min-max map of one raw metric onto [0, 1], clamped outside the fit range."""

    metric: str
    min: float
    max: float
    fit_scope: str = "pooled"

    def __post_init__(self):
        if self.max < self.min:
            raise DataError(f"normalizer max {self.max} < min {self.min}")
        if self.fit_scope not in ("source_only", "pooled"):
            raise DataError(f"unknown fit_scope {self.fit_scope!r}")

    def apply(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if self.max == self.min:
            # Degenerate range: every value maps to 0 (deterministic choice).
            return np.zeros_like(values)
        out = (values - self.min) / (self.max - self.min)
        return np.clip(out, 0.0, 1.0)


def fit_normalizer(values, metric="score", scope="pooled") -> ScoreNormalizer:
    """Fit a min-max normalizer on the sample extrema of ``values``."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise DataError("cannot fit a normalizer on empty input")
    if not np.all(np.isfinite(values)):
        raise DataError("cannot fit a normalizer on non-finite values")
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        warnings.warn(
            f"metric {metric!r}: all values equal ({lo}); normalized output is all zeros",
            stacklevel=2,
        )
    return ScoreNormalizer(metric=metric, min=lo, max=hi, fit_scope=scope)


@dataclass(frozen=True)
class EmbeddingSpace:
    """Affine projection shared by both density models.

    Applies ``basis @ ((x - mean) / scale)``; ``basis`` is absent when no
    dimensionality reduction was requested (standardization only).
    """

    mean: np.ndarray
    scale: np.ndarray
    basis: np.ndarray | None
    d_in: int
    d_out: int

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=np.float64))
        if self.basis is not None:
            object.__setattr__(self, "basis", np.asarray(self.basis, dtype=np.float64))
        if self.d_out > self.d_in:
            raise DataError(f"d_out {self.d_out} exceeds d_in {self.d_in}")
        if np.any(self.scale <= 0):
            raise DataError("scale entries must be positive")
        if self.basis is not None:
            gram = self.basis @ self.basis.T
            if not np.allclose(gram, np.eye(self.d_out), atol=1e-6):
                raise DataError("basis rows are not orthonormal")


def fit_embedding_space(pooled, target_dim=None) -> EmbeddingSpace:
    """Fit standardization (and optional PCA) on pooled source+target embeddings.

    Standardization uses the per-coordinate mean and standard deviation
    (floored at 1e-8). When ``target_dim`` is smaller than the input
    dimension, the basis holds the top principal directions of the
    standardized data, obtained from an eigendecomposition of its sample
    covariance. Each basis row's largest-magnitude entry is made positive so
    repeated fits serialize identically.
    """
    pooled = np.asarray(pooled, dtype=np.float64)
    if pooled.ndim != 2 or pooled.shape[0] < 2:
        raise DataError("need at least 2 pooled rows to fit an embedding space")
    n, d_in = pooled.shape
    if target_dim is not None and not (1 <= target_dim <= d_in):
        raise DataError(f"target_dim {target_dim} out of range [1, {d_in}]")
    mean = pooled.mean(axis=0)
    scale = np.maximum(pooled.std(axis=0), 1e-8)
    if target_dim is None or target_dim == d_in:
        return EmbeddingSpace(mean=mean, scale=scale, basis=None, d_in=d_in, d_out=d_in)
    standardized = (pooled - mean) / scale
    cov = np.cov(standardized, rowvar=False, bias=False)
    cov = np.atleast_2d(cov)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    basis = eigvecs[:, order[:target_dim]].T
    # Sign convention: the largest-|entry| of each row is positive.
    for i in range(basis.shape[0]):
        j = np.argmax(np.abs(basis[i]))
        if basis[i, j] < 0:
            basis[i] = -basis[i]
    return EmbeddingSpace(mean=mean, scale=scale, basis=basis, d_in=d_in, d_out=target_dim)


def apply_embedding_space(space: EmbeddingSpace, x) -> np.ndarray:
    """Project a vector (or matrix of row vectors) into the shared space."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x.reshape(1, -1) if single else x
    if rows.shape[1] != space.d_in:
        raise DataError(f"expected dimension {space.d_in}, got {rows.shape[1]}")
    z = (rows - space.mean) / space.scale
    if space.basis is not None:
        z = z @ space.basis.T
    return z[0] if single else z


def embedding_space_to_json(space: EmbeddingSpace) -> dict:
    return {
        "mean": space.mean.tolist(),
        "scale": space.scale.tolist(),
        "basis": space.basis.tolist() if space.basis is not None else None,
        "d_in": space.d_in,
        "d_out": space.d_out,
    }


def embedding_space_from_json(payload: dict) -> EmbeddingSpace:
    basis = payload.get("basis")
    return EmbeddingSpace(
        mean=np.array(payload["mean"]),
        scale=np.array(payload["scale"]),
        basis=np.array(basis) if basis is not None else None,
        d_in=int(payload["d_in"]),
        d_out=int(payload["d_out"]),
    )


def pass_at_1(run_outcomes):
    """Per-task success fraction and its mean over tasks.

    ``run_outcomes`` is a sequence of per-task boolean run lists; every task
    needs at least one run.
    """
    per_task = []
    for i, runs in enumerate(run_outcomes):
        runs = list(runs)
        if not runs:
            raise DataError(f"task {i} has zero runs")
        per_task.append(sum(bool(r) for r in runs) / len(runs))
    if not per_task:
        raise DataError("no tasks given")
    return per_task, float(np.mean(per_task))
