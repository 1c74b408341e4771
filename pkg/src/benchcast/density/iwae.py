"""Importance-weighted autoencoder over continuous feature vectors.

The model is a pair of two-layer tanh networks with diagonal-Gaussian heads:
the encoder maps an observation to a latent mean and log-variance, the
decoder maps a latent draw back to an observation mean and log-variance, and
the latent prior is the standard normal. Training maximizes the K-sample
bound

    mean over x of  log( (1/K) * sum_k  p(x, z_k) / q(z_k | x) ),

computed in log space, with reparameterized latent draws and analytic
gradients (the per-sample gradient weights are the softmax of the K log
ratios). With K=1 this is exactly the single-sample VAE bound; as K grows
the bound tightens toward the true log marginal.

Everything is plain float64 numpy and deterministic for a fixed seed.
Evaluation draws come from counter-based per-point streams, so scoring many
points in parallel or in any order returns identical values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._util import logsumexp, point_rng
from ..errors import DataError, NumericError

LOGVAR_MIN = -10.0
LOGVAR_MAX = 10.0
LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; defaults are the production recipe."""

    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    k_train: int = 10
    k_eval: int = 128
    seed: int = 0
    patience: int = 20
    hidden: int = 64
    latent: int = 16

    def __post_init__(self):
        for name in ("epochs", "batch_size", "k_train", "k_eval", "patience", "hidden", "latent"):
            if getattr(self, name) <= 0:
                raise DataError(f"TrainConfig.{name} must be positive")
        if self.learning_rate <= 0:
            raise DataError("TrainConfig.learning_rate must be positive")
        if self.k_eval < self.k_train:
            raise DataError("TrainConfig.k_eval must be >= k_train")


@dataclass(frozen=True)
class IwaeModel:
    """Trained encoder/decoder parameters.

    Encoder: x (d) -> tanh(W1 x + b1) -> W2 . + b2 -> [latent mean, latent
    log-variance] (2m). Decoder: z (m) -> tanh(V1 z + c1) -> V2 . + c2 ->
    [observation mean, observation log-variance] (2d). Log-variances are
    clamped to [-10, 10] wherever they are evaluated.
    """

    d: int
    m: int
    h: int
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    V1: np.ndarray
    c1: np.ndarray
    V2: np.ndarray
    c2: np.ndarray
    k_train: int
    seed: int
    history: tuple = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("W1", "b1", "W2", "b2", "V1", "c1", "V2", "c2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)
            if not np.all(np.isfinite(arr)):
                raise NumericError(f"IwaeModel.{name} contains non-finite values")

    def params(self) -> dict:
        return {name: getattr(self, name) for name in ("W1", "b1", "W2", "b2", "V1", "c1", "V2", "c2")}


def _encode(params, X):
    h1 = np.tanh(X @ params["W1"].T + params["b1"])
    out = h1 @ params["W2"].T + params["b2"]
    m = out.shape[1] // 2
    mu = out[:, :m]
    logvar_raw = out[:, m:]
    return h1, mu, logvar_raw, np.clip(logvar_raw, LOGVAR_MIN, LOGVAR_MAX)


def _decode(params, Z):
    h2 = np.tanh(Z @ params["V1"].T + params["c1"])
    out = h2 @ params["V2"].T + params["c2"]
    d = out.shape[1] // 2
    mux = out[:, :d]
    logvarx_raw = out[:, d:]
    return h2, mux, logvarx_raw, np.clip(logvarx_raw, LOGVAR_MIN, LOGVAR_MAX)


def _log_weight_matrix(params, X, eps):
    """Log importance ratios log p(x, z_k) - log q(z_k | x).

    X is (B, d) and eps is (B, K, m); returns (B, K) plus the intermediates
    needed for backpropagation.
    """
    B, K, m = eps.shape
    h1, mu, logvar_raw, logvar = _encode(params, X)
    sigma = np.exp(0.5 * logvar)
    Z = mu[:, None, :] + sigma[:, None, :] * eps  # (B, K, m)
    Zf = Z.reshape(B * K, m)
    h2, mux, logvarx_raw, logvarx = _decode(params, Zf)
    Xf = np.repeat(X, K, axis=0)  # aligned with Zf rows
    inv_varx = np.exp(-logvarx)
    resid = Xf - mux
    log_px = -0.5 * np.sum(LOG_2PI + logvarx + resid**2 * inv_varx, axis=1)
    log_pz = -0.5 * np.sum(LOG_2PI + Zf**2, axis=1)
    # q evaluated at its own draw: the quadratic term reduces to eps^2.
    log_qz = -0.5 * (np.sum(LOG_2PI + logvar, axis=1)[:, None] + np.sum(eps**2, axis=2))
    log_w = (log_px + log_pz).reshape(B, K) - log_qz
    cache = dict(
        h1=h1, mu=mu, logvar_raw=logvar_raw, logvar=logvar, sigma=sigma,
        Z=Z, Zf=Zf, h2=h2, mux=mux, logvarx_raw=logvarx_raw, logvarx=logvarx,
        inv_varx=inv_varx, resid=resid, eps=eps,
    )
    return log_w, cache


def _elbo_and_grads(params, X, eps):
    """Mean K-sample bound over the batch and loss gradients (loss = -bound)."""
    B, K, m = eps.shape
    log_w, c = _log_weight_matrix(params, X, eps)
    elbo = logsumexp(log_w, axis=1) - np.log(K)
    shifted = log_w - np.max(log_w, axis=1, keepdims=True)
    w_tilde = np.exp(shifted)
    w_tilde /= np.sum(w_tilde, axis=1, keepdims=True)
    U = -w_tilde / B  # upstream d(loss)/d(log_w)
    Uf = U.reshape(B * K, 1)

    # Decoder head: d(log_w)/d[mux, logvarx].
    d_mux = c["resid"] * c["inv_varx"]
    d_logvarx = -0.5 + 0.5 * c["resid"] ** 2 * c["inv_varx"]
    d_logvarx[(c["logvarx_raw"] <= LOGVAR_MIN) | (c["logvarx_raw"] >= LOGVAR_MAX)] = 0.0
    dout = np.concatenate([d_mux, d_logvarx], axis=1) * Uf
    gV2 = dout.T @ c["h2"]
    gc2 = dout.sum(axis=0)
    dh2 = dout @ params["V2"]
    da2 = dh2 * (1.0 - c["h2"] ** 2)
    gV1 = da2.T @ c["Zf"]
    gc1 = da2.sum(axis=0)

    # Into the latent: decoder path plus the prior term -z; the proposal term
    # contributes nothing through z because q is evaluated at its own
    # reparameterized draw (its quadratic term is identically eps^2).
    dz = (da2 @ params["V1"]) - Uf * c["Zf"]
    dZ = dz.reshape(B, K, m)

    g_mu = dZ.sum(axis=1)
    g_logvar = np.sum(dZ * (0.5 * c["sigma"][:, None, :] * c["eps"]), axis=1)
    g_logvar = g_logvar + 0.5 * U.sum(axis=1)[:, None]
    g_logvar[(c["logvar_raw"] <= LOGVAR_MIN) | (c["logvar_raw"] >= LOGVAR_MAX)] = 0.0
    denc = np.concatenate([g_mu, g_logvar], axis=1)
    gW2 = denc.T @ c["h1"]
    gb2 = denc.sum(axis=0)
    dh1 = denc @ params["W2"]
    da1 = dh1 * (1.0 - c["h1"] ** 2)
    gW1 = da1.T @ X
    gb1 = da1.sum(axis=0)

    grads = {"W1": gW1, "b1": gb1, "W2": gW2, "b2": gb2,
             "V1": gV1, "c1": gc1, "V2": gV2, "c2": gc2}
    return float(np.mean(elbo)), grads


def _init_params(d, m, h, rng):
    def glorot(fan_out, fan_in):
        return rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / (fan_in + fan_out))

    return {
        "W1": glorot(h, d), "b1": np.zeros(h),
        "W2": glorot(2 * m, h), "b2": np.zeros(2 * m),
        "V1": glorot(h, m), "c1": np.zeros(h),
        "V2": glorot(2 * d, h), "c2": np.zeros(2 * d),
    }


def train_iwae(data, cfg: TrainConfig) -> IwaeModel:
    """Fit an IWAE on ``data`` (n x d) with the given config.

    Uses minibatch Adam on the negative K-sample bound, reparameterized
    draws, and early stopping on the epoch-mean bound; returns the
    parameters from the best epoch. Deterministic given ``cfg.seed``.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2:
        raise DataError("need at least 2 rows to train an IWAE")
    n, d = data.shape
    m, h, K = cfg.latent, cfg.hidden, cfg.k_train
    rng = np.random.default_rng(cfg.seed)
    params = _init_params(d, m, h, rng)
    adam_m = {k: np.zeros_like(v) for k, v in params.items()}
    adam_v = {k: np.zeros_like(v) for k, v in params.items()}
    beta1, beta2, adam_eps = 0.9, 0.999, 1e-8
    step = 0

    best_elbo = -np.inf
    best_params = {k: v.copy() for k, v in params.items()}
    since_improve = 0
    history = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_elbo = 0.0
        n_batches = 0
        for start in range(0, n, cfg.batch_size):
            batch = data[order[start:start + cfg.batch_size]]
            eps = rng.standard_normal((batch.shape[0], K, m))
            elbo, grads = _elbo_and_grads(params, batch, eps)
            if not np.isfinite(elbo):
                raise NumericError(f"non-finite loss at epoch {epoch}, batch {n_batches}")
            step += 1
            lr_t = cfg.learning_rate * np.sqrt(1 - beta2**step) / (1 - beta1**step)
            for k in params:
                adam_m[k] = beta1 * adam_m[k] + (1 - beta1) * grads[k]
                adam_v[k] = beta2 * adam_v[k] + (1 - beta2) * grads[k] ** 2
                params[k] = params[k] - lr_t * adam_m[k] / (np.sqrt(adam_v[k]) + adam_eps)
            epoch_elbo += elbo
            n_batches += 1
        epoch_elbo /= n_batches
        history.append(epoch_elbo)
        if epoch_elbo > best_elbo:
            best_elbo = epoch_elbo
            best_params = {k: v.copy() for k, v in params.items()}
            since_improve = 0
        else:
            since_improve += 1
            if since_improve >= cfg.patience:
                break

    return IwaeModel(
        d=d, m=m, h=h,
        W1=best_params["W1"], b1=best_params["b1"],
        W2=best_params["W2"], b2=best_params["b2"],
        V1=best_params["V1"], c1=best_params["c1"],
        V2=best_params["V2"], c2=best_params["c2"],
        k_train=K, seed=cfg.seed, history=tuple(history),
    )


def _eval_log_weights(model: IwaeModel, x, K: int, seed: int, point_key: int):
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != model.d:
        raise DataError(f"expected dimension {model.d}, got {x.shape[0]}")
    rng = point_rng(seed, point_key)
    eps = rng.standard_normal((1, K, model.m))
    log_w, _ = _log_weight_matrix(model.params(), x.reshape(1, -1), eps)
    return log_w[0]


def iwae_elbo(model: IwaeModel, x, K: int, seed: int, point_key: int = 0) -> float:
    """K-sample bound estimate at one point: log-mean-exp of K log ratios."""
    if K < 1:
        raise DataError("K must be >= 1")
    log_w = _eval_log_weights(model, x, K, seed, point_key)
    return float(logsumexp(log_w) - np.log(K))


def log_marginal(model: IwaeModel, x, K_eval: int, seed: int, point_key: int = 0) -> float:
    """K_eval-sample importance-weighted estimate of the log marginal density.

    With the same draws this coincides with :func:`iwae_elbo`; it is exposed
    separately because scoring uses a larger sample count than training.
    """
    if K_eval < 1:
        raise DataError("K_eval must be >= 1")
    log_w = _eval_log_weights(model, x, K_eval, seed, point_key)
    out = float(logsumexp(log_w) - np.log(K_eval))
    if not np.isfinite(out):
        raise NumericError(f"non-finite log marginal at point_key={point_key}")
    return out


def log_marginal_batch(model: IwaeModel, X, K_eval: int, seed: int) -> np.ndarray:
    """Log marginal estimates for many points.

    Each row uses its own counter-based stream keyed by its index, so the
    result does not depend on evaluation order or batching.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.d:
        raise DataError(f"expected (n, {model.d}) matrix")
    n = X.shape[0]
    eps = np.empty((n, K_eval, model.m))
    for i in range(n):
        eps[i] = point_rng(seed, i).standard_normal((K_eval, model.m))
    log_w, _ = _log_weight_matrix(model.params(), X, eps)
    out = logsumexp(log_w, axis=1) - np.log(K_eval)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite log marginal in batch evaluation")
    return out
