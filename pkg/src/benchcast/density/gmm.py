"""Diagonal-covariance Gaussian mixture fit by expectation-maximization.

Kept as the simple parametric baseline next to the autoencoder density.
Responsibilities are computed in log space; the total log-likelihood is
non-decreasing across EM iterations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._util import logsumexp
from ..errors import DataError, NumericError

VAR_FLOOR = 1e-6
EM_TOL = 1e-6
EM_MAX_ITER = 500


@dataclass(frozen=True)
class GmmModel:
    """Mixture weights, means, and diagonal variances (floored at 1e-6)."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    history: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        object.__setattr__(self, "means", np.asarray(self.means, dtype=np.float64))
        object.__setattr__(self, "variances", np.asarray(self.variances, dtype=np.float64))
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise DataError("mixture weights must sum to 1")
        if np.any(self.variances < VAR_FLOOR - 1e-15):
            raise DataError(f"variances must be >= {VAR_FLOOR}")

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def _component_log_pdf(X, means, variances):
    """(n, K) matrix of per-component diagonal-Gaussian log densities."""
    diff = X[:, None, :] - means[None, :, :]  # (n, K, d)
    return -0.5 * np.sum(
        np.log(2.0 * np.pi * variances)[None, :, :] + diff**2 / variances[None, :, :],
        axis=2,
    )


def _kmeanspp_centers(X, k, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    for _ in range(1, k):
        d2 = np.min(
            np.sum((X[:, None, :] - np.asarray(centers)[None, :, :]) ** 2, axis=2), axis=1
        )
        total = d2.sum()
        if total <= 0:
            centers.append(X[rng.integers(n)])
            continue
        centers.append(X[rng.choice(n, p=d2 / total)])
    return np.asarray(centers)


def _run_em(X, k, rng):
    n, d = X.shape
    means = _kmeanspp_centers(X, k, rng)
    variances = np.tile(np.maximum(X.var(axis=0), VAR_FLOOR), (k, 1))
    weights = np.full(k, 1.0 / k)
    history = []
    prev_ll = -np.inf
    for _ in range(EM_MAX_ITER):
        log_joint = np.log(weights)[None, :] + _component_log_pdf(X, means, variances)
        log_norm = logsumexp(log_joint, axis=1)
        ll = float(log_norm.sum())
        if not np.isfinite(ll):
            raise NumericError("non-finite log-likelihood during EM")
        history.append(ll)
        if ll - prev_ll < EM_TOL and np.isfinite(prev_ll):
            break
        prev_ll = ll
        resp = np.exp(log_joint - log_norm[:, None])  # (n, k)
        nk = resp.sum(axis=0)
        if np.any(nk < 1e-10):
            return None  # empty component; caller re-seeds
        weights = nk / n
        means = (resp.T @ X) / nk[:, None]
        second = (resp.T @ X**2) / nk[:, None]
        variances = np.maximum(second - means**2, VAR_FLOOR)
    return GmmModel(weights=weights, means=means, variances=variances, history=tuple(history))


def train_gmm(data, n_components: int, seed: int) -> GmmModel:
    """EM fit with k-means++ style seeding; re-seeds once on an empty component."""
    X = np.asarray(data, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if n_components < 1:
        raise DataError("n_components must be >= 1")
    if X.shape[0] < n_components:
        raise DataError(
            f"need at least {n_components} rows, got {X.shape[0]}"
        )
    for attempt_seed in (seed, seed + 1):
        model = _run_em(X, n_components, np.random.default_rng(attempt_seed))
        if model is not None:
            return model
    raise NumericError("EM produced an empty component twice; reduce n_components")


def gmm_log_density(model: GmmModel, x) -> float:
    """Log mixture density at one point, via log-sum-exp over components."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != model.dim:
        raise DataError(f"expected dimension {model.dim}, got {x.shape[0]}")
    return float(gmm_log_density_batch(model, x.reshape(1, -1))[0])


def gmm_log_density_batch(model: GmmModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.dim:
        raise DataError(f"expected (n, {model.dim}) matrix")
    log_joint = np.log(model.weights)[None, :] + _component_log_pdf(
        X, model.means, model.variances
    )
    return logsumexp(log_joint, axis=1)
