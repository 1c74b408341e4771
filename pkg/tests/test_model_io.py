"""Versioned model serialization round trips."""

import json

import numpy as np
import pytest

from benchcast.density import (
    GmmModel,
    TrainConfig,
    load_model,
    log_marginal,
    save_model,
    train_gmm,
    train_iwae,
)
from benchcast.errors import ModelFormatError


def test_iwae_round_trip_identical_densities(tmp_path):
    rng = np.random.default_rng(0)
    model = train_iwae(rng.standard_normal((150, 2)), TrainConfig(epochs=8, seed=1, patience=8))
    path = tmp_path / "m.json"
    save_model(model, path)
    loaded = load_model(path)
    probes = rng.standard_normal((10, 2))
    for i, x in enumerate(probes):
        a = log_marginal(model, x, 16, seed=3, point_key=i)
        b = log_marginal(loaded, x, 16, seed=3, point_key=i)
        assert abs(a - b) <= 1e-12


def test_gmm_round_trip_identical_parameters(tmp_path):
    rng = np.random.default_rng(1)
    model = train_gmm(rng.standard_normal((100, 3)), 2, seed=0)
    path = tmp_path / "g.json"
    save_model(model, path)
    loaded = load_model(path)
    np.testing.assert_array_equal(model.weights, loaded.weights)
    np.testing.assert_array_equal(model.means, loaded.means)
    np.testing.assert_array_equal(model.variances, loaded.variances)


def test_wrong_version_rejected(tmp_path):
    model = GmmModel(weights=[1.0], means=[[0.0]], variances=[[1.0]])
    path = tmp_path / "g.json"
    save_model(model, path)
    payload = json.loads(path.read_text())
    payload["format_version"] = 99
    path.write_text(json.dumps(payload))
    with pytest.raises(ModelFormatError, match="format_version"):
        load_model(path)


def test_corrupt_file_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_unknown_kind_rejected(tmp_path):
    path = tmp_path / "odd.json"
    path.write_text(json.dumps({"format_version": 1, "kind": "mystery"}))
    with pytest.raises(ModelFormatError, match="kind"):
        load_model(path)
