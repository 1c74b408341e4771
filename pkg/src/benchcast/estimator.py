"""Importance-weight pipeline: density ratios -> truncation -> normalization
-> weighted prediction, plus distribution-shift diagnostics.

Weights are formed in log space as exp(log density under the target model
minus log density under the source model) at each source point. Extreme
weights are clamped to a nearest-rank percentile threshold; the clamped
weights are renormalized onto the simplex so the prediction stays a convex
combination of source scores. An unnormalized mean estimator is also
provided: it is the textbook unbiased form under exact densities and exists
for oracle validation, not production use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError

__all__ = [
    "WeightVector",
    "ShiftDiagnostics",
    "WeightedEstimate",
    "compute_raw_weights",
    "truncate_weights",
    "normalize_weights",
    "build_weight_vector",
    "diagnostics",
    "predict",
    "estimate_unnormalized",
    "evaluate_error",
]

# Raw weights larger than this multiple of the median count as extreme.
EXTREME_WEIGHT_MULTIPLE = 10.0


@dataclass(frozen=True)
class WeightVector:
    """Raw, truncated, and simplex-normalized importance weights."""

    raw: np.ndarray
    truncated: np.ndarray
    normalized: np.ndarray
    percentile: float

    def __post_init__(self):
        object.__setattr__(self, "raw", np.asarray(self.raw, dtype=np.float64))
        object.__setattr__(self, "truncated", np.asarray(self.truncated, dtype=np.float64))
        object.__setattr__(self, "normalized", np.asarray(self.normalized, dtype=np.float64))
        if not (0.0 < self.percentile <= 1.0):
            raise DataError(f"percentile must be in (0, 1], got {self.percentile}")
        if abs(float(self.normalized.sum()) - 1.0) > 1e-9:
            raise DataError("normalized weights must sum to 1")
        if np.any(self.normalized < 0):
            raise DataError("normalized weights must be non-negative")

    def __len__(self):
        return self.raw.shape[0]


@dataclass(frozen=True)
class ShiftDiagnostics:
    """How far the source weight distribution is from uniform.

    ``weight_variance`` is the variance of n * normalized weights (mean 1, so
    it is invariant to rescaling the raw weights). ``extreme_value_ratio`` is
    the fraction of raw weights above 10x their median.
    ``effective_sample_size`` is 1 / sum of squared normalized weights.
    """

    weight_variance: float
    extreme_value_ratio: float
    effective_sample_size: float
    max_weight_share: float

    def as_dict(self) -> dict:
        return {
            "weight_variance": self.weight_variance,
            "extreme_value_ratio": self.extreme_value_ratio,
            "effective_sample_size": self.effective_sample_size,
            "max_weight_share": self.max_weight_share,
        }


@dataclass(frozen=True)
class WeightedEstimate:
    """Predicted target-set mean score with its weight diagnostics."""

    prediction: float
    weights: WeightVector
    diagnostics: ShiftDiagnostics
    n_source: int
    error: float | None = None

    def as_dict(self) -> dict:
        out = {
            "prediction": self.prediction,
            "n_source": self.n_source,
            "percentile": self.weights.percentile,
            "diagnostics": self.diagnostics.as_dict(),
        }
        if self.error is not None:
            out["error"] = self.error
        return out


def compute_raw_weights(log_p_target, log_p_source) -> np.ndarray:
    """Per-point density ratios exp(log_p_target - log_p_source).

    Returned weights are the true ratios whenever they are representable in
    float64. If the largest log ratio would overflow, all weights are shifted
    by a common factor (harmless downstream: truncation thresholds scale with
    the weights and normalization removes any common factor). Outputs are
    always positive and finite.
    """
    lt = np.asarray(log_p_target, dtype=np.float64)
    ls = np.asarray(log_p_source, dtype=np.float64)
    if lt.shape != ls.shape or lt.ndim != 1:
        raise DataError(f"log-density vectors must share one shape, got {lt.shape} vs {ls.shape}")
    if lt.size == 0:
        raise DataError("need at least one point")
    if not (np.all(np.isfinite(lt)) and np.all(np.isfinite(ls))):
        raise DataError("log densities must be finite")
    log_ratio = lt - ls
    shift = float(np.max(log_ratio))
    if shift <= 700.0:  # exp stays finite; keep true ratios
        shift = 0.0
    w = np.exp(log_ratio - shift)
    return np.maximum(w, np.finfo(np.float64).tiny)


def truncate_weights(raw, percentile: float) -> np.ndarray:
    """Clamp weights to the nearest-rank percentile threshold.

    The threshold is the value at ascending-sort index ceil(percentile * n)
    (1-based); every weight is min(weight, threshold). percentile = 1 leaves
    the input unchanged.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0:
        raise DataError("cannot truncate an empty weight vector")
    if not (0.0 < percentile <= 1.0):
        raise DataError(f"percentile must be in (0, 1], got {percentile}")
    ordered = np.sort(raw)
    rank = math.ceil(percentile * raw.size)  # 1-based nearest rank
    threshold = ordered[rank - 1]
    return np.minimum(raw, threshold)


def normalize_weights(truncated) -> np.ndarray:
    """Scale non-negative weights onto the probability simplex."""
    truncated = np.asarray(truncated, dtype=np.float64)
    if np.any(truncated < 0):
        raise DataError("weights must be non-negative")
    total = float(truncated.sum())
    if total <= 0:
        raise NumericError("weight sum is zero; cannot normalize")
    return truncated / total


def build_weight_vector(raw, percentile: float) -> WeightVector:
    """Truncate and normalize raw weights into a full WeightVector."""
    raw = np.asarray(raw, dtype=np.float64)
    truncated = truncate_weights(raw, percentile)
    normalized = normalize_weights(truncated)
    return WeightVector(raw=raw, truncated=truncated, normalized=normalized, percentile=percentile)


def diagnostics(weights: WeightVector) -> ShiftDiagnostics:
    n = len(weights)
    scaled = weights.normalized * n  # mean exactly 1
    weight_variance = float(np.mean((scaled - 1.0) ** 2))
    median = float(np.median(weights.raw))
    extreme = float(np.mean(weights.raw > EXTREME_WEIGHT_MULTIPLE * median))
    ess = float(1.0 / np.sum(weights.normalized**2))
    return ShiftDiagnostics(
        weight_variance=weight_variance,
        extreme_value_ratio=extreme,
        effective_sample_size=ess,
        max_weight_share=float(weights.normalized.max()),
    )


def predict(weights, scores_normalized) -> WeightedEstimate:
    """Weighted mean of source scores under simplex weights.

    ``weights`` is either a WeightVector or a plain normalized vector (then
    treated as already-final weights with no truncation applied).
    """
    if not isinstance(weights, WeightVector):
        vec = np.asarray(weights, dtype=np.float64)
        weights = WeightVector(raw=vec, truncated=vec, normalized=vec, percentile=1.0)
    scores = np.asarray(scores_normalized, dtype=np.float64)
    if scores.shape != weights.normalized.shape:
        raise DataError(
            f"scores shape {scores.shape} does not match weights {weights.normalized.shape}"
        )
    if np.any(scores < 0) or np.any(scores > 1):
        raise DataError("scores must lie in [0, 1]")
    # Self-normalized form of sum(normalized * scores); with unit weights it
    # reduces bitwise to the plain mean of the scores.
    prediction = float(np.sum(weights.truncated * scores) / np.sum(weights.truncated))
    return WeightedEstimate(
        prediction=prediction,
        weights=weights,
        diagnostics=diagnostics(weights),
        n_source=len(weights),
    )


def estimate_unnormalized(raw_weights, scores) -> float:
    """Plain importance-sampling mean (1/n) * sum(w_i * s_i).

    Unbiased when the weights are exact density ratios; used by the oracle
    validation suite only.
    """
    raw_weights = np.asarray(raw_weights, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    if raw_weights.shape != scores.shape:
        raise DataError("weights and scores must share a shape")
    return float(np.mean(raw_weights * scores))


def evaluate_error(prediction: float, target_scores_normalized) -> float:
    """Signed error: prediction minus the actual target mean."""
    target = np.asarray(target_scores_normalized, dtype=np.float64)
    if target.size == 0:
        raise DataError("target score vector is empty")
    if np.any(target < 0) or np.any(target > 1):
        raise DataError("target scores must lie in [0, 1]")
    return float(prediction - target.mean())
