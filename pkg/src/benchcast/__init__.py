"""Predict a model's mean score on a new prompt set without running it.

Per-prompt scores from an annotated source benchmark are reweighted by the
ratio of learned target/source embedding densities; the weighted mean is the
predicted target score. The package also ships the static code metrics used
as score inputs and a synthetic harness with Monte-Carlo oracles for
validating the estimator end to end.
"""

from .corpus import (
    Corpus,
    EmbeddingSpace,
    PromptRecord,
    ScoreNormalizer,
    apply_embedding_space,
    fit_embedding_space,
    fit_normalizer,
    load_corpus,
    pass_at_1,
    save_corpus,
)
from .density import (
    GmmModel,
    IwaeModel,
    TrainConfig,
    gmm_log_density,
    iwae_elbo,
    load_model,
    log_marginal,
    save_model,
    train_gmm,
    train_iwae,
)
from .estimator import (
    ShiftDiagnostics,
    WeightedEstimate,
    WeightVector,
    build_weight_vector,
    compute_raw_weights,
    diagnostics,
    estimate_unnormalized,
    evaluate_error,
    normalize_weights,
    predict,
    truncate_weights,
)
from .harness import (
    MixtureSpec,
    RidgeModel,
    ScoreFunction,
    SyntheticSpec,
    TrialResult,
    cross_predict,
    fit_ridge,
    oracle_expectation,
    ridge_predict,
    run_synthetic_trial,
    sample_mixture,
)

__version__ = "0.1.0"
