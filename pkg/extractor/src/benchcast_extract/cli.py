"""Command-line wrapper for the embedding extractor."""

from __future__ import annotations

import argparse
import sys

from .extract import ExtractorConfig, ModelUnavailableError, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="benchcast-extract",
        description="Embed prompts with a pretrained encoder into corpus JSONL format.",
    )
    parser.add_argument("--prompts", required=True, help="input JSONL of {id, prompt}")
    parser.add_argument("--out", required=True, help="output embedding JSONL")
    parser.add_argument("--model", required=True, help="encoder hub id or local path")
    parser.add_argument("--revision", help="pinned model revision")
    parser.add_argument("--max-seq-len", type=int, default=256)
    parser.add_argument("--batch-size", type=int, default=16)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExtractorConfig(
            model=args.model, max_seq_len=args.max_seq_len,
            batch_size=args.batch_size, revision=args.revision,
        )
    except ValueError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    try:
        manifest = extract(args.prompts, args.out, cfg)
    except ModelUnavailableError as exc:
        print(f"error: model: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {manifest['count']} vectors of dim {manifest['dim']} to {args.out}")
    print(f"sha256: {manifest['sha256']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
