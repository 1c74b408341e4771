"""Small numeric helpers shared across modules."""

from __future__ import annotations

import numpy as np


def logsumexp(a, axis=None):
    """Numerically stable log(sum(exp(a))) along ``axis``."""
    a = np.asarray(a, dtype=np.float64)
    amax = np.max(a, axis=axis, keepdims=True)
    amax = np.where(np.isfinite(amax), amax, 0.0)
    out = np.log(np.sum(np.exp(a - amax), axis=axis, keepdims=True)) + amax
    return float(out.reshape(())) if axis is None else np.squeeze(out, axis=axis)


def derive_seeds(seed: int, n: int) -> list:
    """Derive ``n`` independent integer seeds from one root seed."""
    ss = np.random.SeedSequence(seed)
    return [int(s) for s in ss.generate_state(n, dtype=np.uint64)]


def point_rng(seed: int, point_key: int) -> np.random.Generator:
    """Counter-based per-point stream: independent of evaluation order."""
    bit_gen = np.random.Philox(key=(int(seed) % (1 << 64)) ^ (int(point_key) << 64))
    return np.random.Generator(bit_gen)
