"""Versioned JSON round-trip for trained density models."""

from __future__ import annotations

import json

import numpy as np

from ..errors import ModelFormatError
from .gmm import GmmModel
from .iwae import IwaeModel

FORMAT_VERSION = 1


def save_model(model, path) -> None:
    if isinstance(model, IwaeModel):
        payload = {
            "format_version": FORMAT_VERSION,
            "kind": "iwae",
            "d": model.d, "m": model.m, "h": model.h,
            "k_train": model.k_train, "seed": model.seed,
        }
        for name, arr in model.params().items():
            payload[name] = arr.tolist()
    elif isinstance(model, GmmModel):
        payload = {
            "format_version": FORMAT_VERSION,
            "kind": "gmm",
            "weights": model.weights.tolist(),
            "means": model.means.tolist(),
            "variances": model.variances.tolist(),
        }
    else:
        raise ModelFormatError(f"cannot serialize {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: corrupt model file ({exc.msg})")
    if not isinstance(payload, dict) or "format_version" not in payload:
        raise ModelFormatError(f"{path}: not a model file")
    version = payload["format_version"]
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format_version {version}, expected {FORMAT_VERSION}"
        )
    kind = payload.get("kind")
    try:
        if kind == "iwae":
            return IwaeModel(
                d=payload["d"], m=payload["m"], h=payload["h"],
                W1=np.array(payload["W1"]), b1=np.array(payload["b1"]),
                W2=np.array(payload["W2"]), b2=np.array(payload["b2"]),
                V1=np.array(payload["V1"]), c1=np.array(payload["c1"]),
                V2=np.array(payload["V2"]), c2=np.array(payload["c2"]),
                k_train=payload["k_train"], seed=payload["seed"],
            )
        if kind == "gmm":
            return GmmModel(
                weights=np.array(payload["weights"]),
                means=np.array(payload["means"]),
                variances=np.array(payload["variances"]),
            )
    except KeyError as exc:
        raise ModelFormatError(f"{path}: missing field {exc}")
    raise ModelFormatError(f"{path}: unknown model kind {kind!r}")
