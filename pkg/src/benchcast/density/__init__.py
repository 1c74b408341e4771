"""Density models over projected embeddings.

Two families share one contract (a per-point log marginal density):

* :class:`IwaeModel` — a latent-variable model trained on a multi-sample
  importance-weighted bound; the single-sample case is the plain VAE bound.
* :class:`GmmModel` — a diagonal-covariance Gaussian mixture fit by EM,
  kept as the simple baseline.

Models serialize to versioned JSON via :func:`save_model` / :func:`load_model`.
"""

from .gmm import GmmModel, gmm_log_density, gmm_log_density_batch, train_gmm
from .io import load_model, save_model
from .iwae import (
    IwaeModel,
    TrainConfig,
    iwae_elbo,
    log_marginal,
    log_marginal_batch,
    train_iwae,
)

__all__ = [
    "IwaeModel",
    "TrainConfig",
    "train_iwae",
    "iwae_elbo",
    "log_marginal",
    "log_marginal_batch",
    "GmmModel",
    "train_gmm",
    "gmm_log_density",
    "gmm_log_density_batch",
    "save_model",
    "load_model",
]
