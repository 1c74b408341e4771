"""End-to-end validation machinery.

Synthetic Gaussian-mixture pairs with analytic score functions stand in for
real prompt corpora: the target-set mean score has a Monte-Carlo oracle that
never touches the density models, so estimator error is measurable. The same
module hosts the reciprocal corpus-to-corpus prediction entry point and the
ridge-regression baseline that predicts scores directly from embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import derive_seeds
from .corpus import Corpus, apply_embedding_space, fit_embedding_space, fit_normalizer
from .density import (
    GmmModel,
    IwaeModel,
    TrainConfig,
    gmm_log_density_batch,
    log_marginal_batch,
    train_gmm,
    train_iwae,
)
from .errors import DataError, NumericError
from .estimator import (
    ShiftDiagnostics,
    WeightedEstimate,
    build_weight_vector,
    compute_raw_weights,
    evaluate_error,
    predict,
)

__all__ = [
    "MixtureSpec",
    "ScoreFunction",
    "SyntheticSpec",
    "TrialResult",
    "RidgeModel",
    "sample_mixture",
    "oracle_expectation",
    "run_synthetic_trial",
    "cross_predict",
    "cross_predict_detailed",
    "CrossPrediction",
    "separation_sweep",
    "fit_ridge",
    "ridge_predict",
    "ridge_target_mean",
]


@dataclass(frozen=True)
class MixtureSpec:
    """Gaussian mixture with diagonal covariances."""

    weights: np.ndarray
    means: np.ndarray      # (k, dim)
    variances: np.ndarray  # (k, dim)

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        object.__setattr__(self, "means", np.atleast_2d(np.asarray(self.means, dtype=np.float64)))
        object.__setattr__(self, "variances", np.atleast_2d(np.asarray(self.variances, dtype=np.float64)))
        if abs(self.weights.sum() - 1.0) > 1e-9 or np.any(self.weights < 0):
            raise DataError("mixture weights must form a simplex")
        if np.any(self.variances <= 0):
            raise DataError("mixture variances must be positive")
        if self.means.shape != self.variances.shape:
            raise DataError("means and variances must share a shape")

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def log_density(self, X) -> np.ndarray:
        """Exact mixture log density (the analytic oracle side)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        diff = X[:, None, :] - self.means[None, :, :]
        comp = -0.5 * np.sum(
            np.log(2.0 * np.pi * self.variances)[None, :, :] + diff**2 / self.variances[None, :, :],
            axis=2,
        )
        comp = comp + np.log(self.weights)[None, :]
        cmax = comp.max(axis=1, keepdims=True)
        return (np.log(np.sum(np.exp(comp - cmax), axis=1)) + cmax[:, 0])


@dataclass(frozen=True)
class ScoreFunction:
    """Analytic per-point score in [0, 1].

    ``sigmoid_linear``: 1 / (1 + exp(-(a . x + b))).
    ``rbf_bump``: exp(-||x - center||^2 / (2 width^2)).
    """

    kind: str
    a: np.ndarray | None = None
    b: float = 0.0
    center: np.ndarray | None = None
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sigmoid_linear", "rbf_bump"):
            raise DataError(f"unknown score function kind {self.kind!r}")
        if self.kind == "sigmoid_linear" and self.a is None:
            raise DataError("sigmoid_linear needs coefficient vector 'a'")
        if self.kind == "rbf_bump":
            if self.center is None:
                raise DataError("rbf_bump needs a center")
            if self.width <= 0:
                raise DataError("rbf_bump width must be positive")

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.kind == "sigmoid_linear":
            z = X @ np.asarray(self.a, dtype=np.float64) + self.b
            return 1.0 / (1.0 + np.exp(-z))
        diff = X - np.asarray(self.center, dtype=np.float64)
        return np.exp(-np.sum(diff**2, axis=1) / (2.0 * self.width**2))


@dataclass(frozen=True)
class SyntheticSpec:
    """One synthetic trial: two mixtures, a score function, sizes, a seed."""

    source: MixtureSpec
    target: MixtureSpec
    score: ScoreFunction
    n_source: int = 1000
    n_target: int = 1000
    seed: int = 0
    pca_dim: int | None = None

    def __post_init__(self):
        if self.source.dim != self.target.dim:
            raise DataError("source and target mixtures must share a dimension")
        if self.n_source < 2 or self.n_target < 2:
            raise DataError("need at least 2 samples per side")


@dataclass(frozen=True)
class TrialResult:
    """Estimate vs oracle for one synthetic run."""

    estimate: float
    oracle_truth: float
    oracle_se: float
    abs_error: float
    diagnostics: ShiftDiagnostics
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "oracle_truth": self.oracle_truth,
            "oracle_se": self.oracle_se,
            "abs_error": self.abs_error,
            "diagnostics": self.diagnostics.as_dict(),
            "config": self.config,
        }


def sample_mixture(mix: MixtureSpec, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws from the mixture; deterministic given the seed."""
    if n < 1:
        raise DataError("n must be >= 1")
    rng = np.random.default_rng(seed)
    comps = rng.choice(mix.weights.shape[0], size=n, p=mix.weights)
    eps = rng.standard_normal((n, mix.dim))
    return mix.means[comps] + np.sqrt(mix.variances[comps]) * eps


def oracle_expectation(mix: MixtureSpec, score: ScoreFunction, n_mc: int = 1_000_000,
                       seed: int = 0) -> tuple:
    """Monte-Carlo ground truth for the target mean score, with its SE."""
    if n_mc < 10_000:
        raise DataError("n_mc must be at least 10^4 for a usable oracle")
    draws = sample_mixture(mix, n_mc, seed)
    values = score(draws)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(n_mc))
    return mean, se


def _train_density(kind, X, cfg, seed, gmm_components):
    if kind == "iwae":
        fit_cfg = TrainConfig(
            epochs=cfg.epochs, batch_size=cfg.batch_size, learning_rate=cfg.learning_rate,
            k_train=cfg.k_train, k_eval=cfg.k_eval, seed=seed, patience=cfg.patience,
            hidden=cfg.hidden, latent=cfg.latent,
        )
        return train_iwae(X, fit_cfg)
    if kind == "gmm":
        return train_gmm(X, gmm_components, seed)
    raise DataError(f"unknown density kind {kind!r}")


def _log_density_at(model, X, k_eval, seed):
    if isinstance(model, IwaeModel):
        return log_marginal_batch(model, X, k_eval, seed)
    if isinstance(model, GmmModel):
        return gmm_log_density_batch(model, X)
    raise DataError(f"unknown model type {type(model).__name__}")


def run_synthetic_trial(spec: SyntheticSpec, cfg: TrainConfig, percentile: float = 0.9,
                        density: str = "iwae", gmm_components: int = 8,
                        n_mc: int = 1_000_000) -> TrialResult:
    """Full pipeline on synthetic data, compared against the Monte-Carlo oracle.

    The oracle truth is computed before any density model is trained and
    never sees the models. All randomness derives from ``spec.seed``.
    """
    seeds = derive_seeds(spec.seed, 6)
    truth, truth_se = oracle_expectation(spec.target, spec.score, n_mc=n_mc, seed=seeds[0])

    Xs = sample_mixture(spec.source, spec.n_source, seeds[1])
    Xt = sample_mixture(spec.target, spec.n_target, seeds[2])
    scores = spec.score(Xs)

    space = fit_embedding_space(np.vstack([Xs, Xt]), target_dim=spec.pca_dim)
    Zs = apply_embedding_space(space, Xs)
    Zt = apply_embedding_space(space, Xt)

    model_s = _train_density(density, Zs, cfg, seeds[3], gmm_components)
    model_t = _train_density(density, Zt, cfg, seeds[4], gmm_components)
    log_ps = _log_density_at(model_s, Zs, cfg.k_eval, seeds[5])
    log_pt = _log_density_at(model_t, Zs, cfg.k_eval, seeds[5])

    raw = compute_raw_weights(log_pt, log_ps)
    weights = build_weight_vector(raw, percentile)
    est = predict(weights, scores)
    return TrialResult(
        estimate=est.prediction,
        oracle_truth=truth,
        oracle_se=truth_se,
        abs_error=abs(est.prediction - truth),
        diagnostics=est.diagnostics,
        config={
            "seed": spec.seed, "n_source": spec.n_source, "n_target": spec.n_target,
            "dim": spec.source.dim, "pca_dim": spec.pca_dim, "percentile": percentile,
            "density": density, "k_train": cfg.k_train, "k_eval": cfg.k_eval,
            "epochs": cfg.epochs,
        },
    )


@dataclass(frozen=True)
class CrossPrediction:
    """Estimate plus every fitted artifact, for callers that persist them."""

    estimate: WeightedEstimate
    space: object
    source_model: object
    target_model: object
    normalizer: object
    source_ids: tuple


def cross_predict_detailed(source: Corpus, target: Corpus, metric: str, cfg: TrainConfig,
                           percentile: float = 0.9, pca_dim: int | None = None,
                           density: str = "iwae", gmm_components: int = 8,
                           normalizer_scope: str = "pooled") -> CrossPrediction:
    """Corpus-to-corpus prediction, returning the trained artifacts too.

    Fits one shared embedding projection on the union of both corpora,
    trains a density model per corpus with independent derived seeds, and
    reweights the source scores by the per-point density ratio. When the
    target corpus also carries scores the signed error is attached
    (evaluation mode); otherwise the normalizer falls back to source-only.
    """
    if not source.has_scores(metric):
        raise DataError(f"source corpus has no scores for metric {metric!r}")
    Xs = source.embedding_matrix()
    Xt = target.embedding_matrix()
    if source.dim != target.dim:
        raise DataError(f"corpus dimensions differ: {source.dim} vs {target.dim}")

    target_has_scores = target.has_scores(metric)
    raw_source_scores = source.score_vector(metric)
    if normalizer_scope == "pooled" and not target_has_scores:
        normalizer_scope = "source_only"
    if normalizer_scope == "pooled":
        pool = np.concatenate([raw_source_scores, target.score_vector(metric)])
    else:
        pool = raw_source_scores
    normalizer = fit_normalizer(pool, metric=metric, scope=normalizer_scope)
    scores = normalizer.apply(raw_source_scores)

    seeds = derive_seeds(cfg.seed, 3)
    space = fit_embedding_space(np.vstack([Xs, Xt]), target_dim=pca_dim)
    Zs = apply_embedding_space(space, Xs)
    Zt = apply_embedding_space(space, Xt)
    model_s = _train_density(density, Zs, cfg, seeds[0], gmm_components)
    model_t = _train_density(density, Zt, cfg, seeds[1], gmm_components)
    log_ps = _log_density_at(model_s, Zs, cfg.k_eval, seeds[2])
    log_pt = _log_density_at(model_t, Zs, cfg.k_eval, seeds[2])

    raw = compute_raw_weights(log_pt, log_ps)
    weights = build_weight_vector(raw, percentile)
    est = predict(weights, scores)
    if target_has_scores:
        target_norm = normalizer.apply(target.score_vector(metric))
        est = WeightedEstimate(
            prediction=est.prediction, weights=est.weights,
            diagnostics=est.diagnostics, n_source=est.n_source,
            error=evaluate_error(est.prediction, target_norm),
        )
    return CrossPrediction(
        estimate=est, space=space, source_model=model_s, target_model=model_t,
        normalizer=normalizer, source_ids=tuple(source.ids()),
    )


def cross_predict(source: Corpus, target: Corpus, metric: str, cfg: TrainConfig,
                  percentile: float = 0.9, pca_dim: int | None = None,
                  density: str = "iwae", gmm_components: int = 8,
                  normalizer_scope: str = "pooled") -> WeightedEstimate:
    """Predict the target corpus's mean score from source-side scores."""
    return cross_predict_detailed(
        source, target, metric, cfg, percentile=percentile, pca_dim=pca_dim,
        density=density, gmm_components=gmm_components,
        normalizer_scope=normalizer_scope,
    ).estimate


@dataclass(frozen=True)
class RidgeModel:
    """Linear score model with an unpenalized intercept."""

    coefficients: np.ndarray  # intercept first, then one weight per feature
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=np.float64))
        if not np.all(np.isfinite(self.coefficients)):
            raise NumericError("ridge coefficients are not finite")


def fit_ridge(embeddings, scores, lam: float = 1.0) -> RidgeModel:
    """Closed-form (X^T X + lam * I) beta = X^T y with the intercept unpenalized."""
    X = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    y = np.asarray(scores, dtype=np.float64)
    if X.shape[0] != y.shape[0]:
        raise DataError("embeddings and scores disagree on sample count")
    if lam < 0:
        raise DataError("lam must be >= 0")
    A = np.hstack([np.ones((X.shape[0], 1)), X])
    gram = A.T @ A
    penalty = np.eye(A.shape[1]) * lam
    penalty[0, 0] = 0.0
    lhs = gram + penalty
    if lam == 0 and np.linalg.matrix_rank(lhs) < lhs.shape[0]:
        raise NumericError(
            "singular normal equations at lam=0; raise lam to regularize"
        )
    beta = np.linalg.solve(lhs, A.T @ y)
    return RidgeModel(coefficients=beta, lam=lam)


def ridge_predict(model: RidgeModel, embeddings) -> np.ndarray:
    """Per-point linear predictions."""
    X = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    if X.shape[1] != model.coefficients.shape[0] - 1:
        raise DataError(
            f"expected {model.coefficients.shape[0] - 1} features, got {X.shape[1]}"
        )
    return model.coefficients[0] + X @ model.coefficients[1:]


def ridge_target_mean(model: RidgeModel, embeddings) -> float:
    """Mean per-point prediction, clamped into [0, 1]."""
    return float(np.clip(ridge_predict(model, embeddings).mean(), 0.0, 1.0))


def separation_sweep(separations, base_seed: int, cfg: TrainConfig, dim: int = 2,
                     n: int = 500, n_seeds: int = 10, percentile: float = 0.9) -> list:
    """Diagnostics across increasing source/target mean separation.

    For each separation s (in units of the component sigma), runs ``n_seeds``
    trials of unit-variance Gaussians with means s apart and collects the
    per-trial diagnostics; the same seed set is reused at every separation so
    the comparison is paired. Used to validate that overlap loss is visible
    in the weight statistics.
    """
    out = []
    for sep in separations:
        rows = []
        for i in range(n_seeds):
            src = MixtureSpec(weights=[1.0], means=np.zeros((1, dim)),
                              variances=np.ones((1, dim)))
            tgt_mean = np.zeros((1, dim))
            tgt_mean[0, 0] = sep
            tgt = MixtureSpec(weights=[1.0], means=tgt_mean, variances=np.ones((1, dim)))
            spec = SyntheticSpec(
                source=src, target=tgt,
                score=ScoreFunction(kind="sigmoid_linear", a=np.ones(dim), b=0.0),
                n_source=n, n_target=n, seed=base_seed + i,
            )
            rows.append(run_synthetic_trial(spec, cfg, percentile=percentile, n_mc=100_000))
        out.append({"separation": sep, "trials": rows})
    return out
