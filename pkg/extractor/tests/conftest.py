import json

import pytest


@pytest.fixture(scope="session")
def tiny_encoder(tmp_path_factory):
    """A deterministic local encoder checkpoint (no network, fixed weights)."""
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    model_dir = tmp_path_factory.mktemp("tiny-encoder")
    vocab = [
        "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
        "write", "a", "function", "solving", "task", "of", "the",
        "sort", "parse", "binary", "tree", "list", "string", "number",
    ]
    (model_dir / "vocab.txt").write_text("\n".join(vocab))
    config = BertConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=64, max_position_embeddings=64,
    )
    torch.manual_seed(1234)
    BertModel(config).save_pretrained(model_dir)
    BertTokenizer(str(model_dir / "vocab.txt")).save_pretrained(model_dir)
    return str(model_dir)


@pytest.fixture
def prompts_file(tmp_path):
    path = tmp_path / "prompts.jsonl"
    rows = [
        {"id": "t1", "prompt": "write a function solving task"},
        {"id": "t2", "prompt": "parse the binary tree"},
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    return path
