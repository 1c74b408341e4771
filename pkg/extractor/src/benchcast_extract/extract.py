"""Per-prompt embedding extraction with a pretrained transformer encoder.

Reads prompt JSONL (``{"id", "prompt"}`` per line), runs batched inference,
and writes one ``{"id", "vector"}`` line per prompt in input order — the
embedding file format the corpus loader joins by id. The vector is the
hidden state at the classifier-token position (sequence index 0) of the last
layer. A sidecar manifest records the model identifier, dimension, line
count, and a content hash of the output.

Inference runs in deterministic mode (eval, no gradients, CPU by default):
re-running with the same config and model revision reproduces identical
vectors byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ExtractorConfig:
    """Encoder identifier (hub id or local path) plus batching limits."""

    model: str
    max_seq_len: int = 256
    batch_size: int = 16
    revision: str | None = None

    def __post_init__(self):
        if self.max_seq_len < 8:
            raise ValueError(f"max_seq_len must be >= 8, got {self.max_seq_len}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class ModelUnavailableError(RuntimeError):
    """The configured encoder could not be loaded."""


def read_prompts(path):
    prompts = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if "id" not in obj or "prompt" not in obj:
                raise ValueError(f"{path}: line {lineno}: need 'id' and 'prompt'")
            prompts.append((str(obj["id"]), str(obj["prompt"])))
    return prompts


def _load_encoder(cfg: ExtractorConfig):
    import torch
    from transformers import AutoModel, AutoTokenizer

    kwargs = {"revision": cfg.revision} if cfg.revision else {}
    try:
        tokenizer = AutoTokenizer.from_pretrained(cfg.model, **kwargs)
        model = AutoModel.from_pretrained(cfg.model, **kwargs)
    except Exception as exc:
        raise ModelUnavailableError(
            f"cannot load encoder {cfg.model!r}: {exc}"
        ) from exc
    model.eval()
    torch.manual_seed(0)  # inference is gradient-free; seed only for hygiene
    return tokenizer, model


def extract(prompts_path, out_path, cfg: ExtractorConfig) -> dict:
    """Embed every prompt and write vectors plus the manifest.

    Prompts longer than ``cfg.max_seq_len`` tokens are truncated with a
    per-id warning, never dropped, so downstream joins keep every record.
    Returns the manifest dict; the manifest file lands next to ``out_path``
    as ``<out_path>.manifest.json``.
    """
    import torch

    tokenizer, model = _load_encoder(cfg)
    prompts = read_prompts(prompts_path)
    out_path = Path(out_path)
    dim = None
    with open(out_path, "w", encoding="utf-8") as fh:
        for start in range(0, len(prompts), cfg.batch_size):
            batch = prompts[start:start + cfg.batch_size]
            texts = [text for _, text in batch]
            full = tokenizer(texts, truncation=False)["input_ids"]
            for (pid, _), ids in zip(batch, full):
                if len(ids) > cfg.max_seq_len:
                    warnings.warn(
                        f"prompt {pid!r} has {len(ids)} tokens, truncated to "
                        f"{cfg.max_seq_len}",
                        stacklevel=2,
                    )
            encoded = tokenizer(
                texts, padding=True, truncation=True,
                max_length=cfg.max_seq_len, return_tensors="pt",
            )
            with torch.no_grad():
                hidden = model(**encoded).last_hidden_state
            cls_vectors = hidden[:, 0, :].to(torch.float64).numpy()
            if dim is None:
                dim = cls_vectors.shape[1]
            for (pid, _), vec in zip(batch, cls_vectors):
                fh.write(json.dumps({"id": pid, "vector": [float(v) for v in vec]}) + "\n")

    digest = hashlib.sha256(out_path.read_bytes()).hexdigest()
    manifest = {
        "model": cfg.model,
        "dim": int(dim) if dim is not None else 0,
        "count": len(prompts),
        "sha256": digest,
    }
    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
