"""Command-line entry point.

Subcommands expose the pipeline for scripted use: ``predict`` (corpus to
corpus), ``metrics`` (per-sample code metrics), ``ablate`` (sweep grids),
``synthetic`` (oracle-checked trials), ``train-density`` (fit one model),
and ``report`` (figures + summary from any of the above outputs).

All options can live in a single JSON config file; flags override fields,
and the effective config is echoed into every report. Exit codes: 0 ok,
1 config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .codemetrics import analyze_sample, load_findings
from .corpus import embedding_space_to_json, fit_embedding_space, load_corpus, apply_embedding_space
from .density import TrainConfig, save_model, train_gmm, train_iwae
from .errors import BenchcastError, ConfigError, DataError, NumericError
from .harness import (
    MixtureSpec,
    ScoreFunction,
    SyntheticSpec,
    cross_predict_detailed,
    run_synthetic_trial,
)
from .report import render_report

SWEEP_DEFAULTS = {
    "percentile": [1.0, 0.95, 0.9, 0.85, 0.8],
    "k_samples": [1, 5, 10, 25, 50, 100],
    "pca_dim": [576, 384, 192],
    "set_size": ["full", 700, 500, 300, 100],
}

DEFAULT_SYNTHETIC = {
    "n_source": 1000,
    "n_target": 1000,
    "n_seeds": 1,
    "n_mc": 1_000_000,
    "source": {
        "weights": [0.5, 0.5],
        "means": [[-1.0, 0.0], [1.0, 0.0]],
        "variances": [[1.0, 1.0], [1.0, 1.0]],
    },
    "target": {
        "weights": [0.5, 0.5],
        "means": [[-1.0, 1.0], [1.0, 1.0]],
        "variances": [[1.0, 1.0], [1.0, 1.0]],
    },
    "score": {"kind": "sigmoid_linear", "a": [0.8, -0.5], "b": 0.2},
}


@dataclass
class RunConfig:
    """Declarative run settings; every field has a flag or file counterpart."""

    source: str | None = None
    target: str | None = None
    out: str = "benchcast-out"
    metric: str | None = None
    density: str = "iwae"
    percentile: float = 0.9
    pca_dim: int | None = None
    normalizer_scope: str = "pooled"
    seed: int = 0
    gmm_components: int = 8
    train: dict = field(default_factory=dict)
    synthetic: dict | None = None

    def validate(self):
        if not (0.0 < self.percentile <= 1.0):
            raise ConfigError(f"percentile must be in (0, 1], got {self.percentile}")
        if self.density not in ("iwae", "gmm"):
            raise ConfigError(f"density must be 'iwae' or 'gmm', got {self.density!r}")
        if self.normalizer_scope not in ("pooled", "source_only"):
            raise ConfigError(f"unknown normalizer_scope {self.normalizer_scope!r}")
        if self.pca_dim is not None and self.pca_dim < 1:
            raise ConfigError(f"pca_dim must be positive, got {self.pca_dim}")
        return self

    def train_config(self, seed=None, k_train=None) -> TrainConfig:
        params = dict(self.train)
        if k_train is not None:
            params["k_train"] = k_train
            params["k_eval"] = max(params.get("k_eval", 128), k_train)
        params.setdefault("seed", self.seed)
        if seed is not None:
            params["seed"] = seed
        try:
            return TrainConfig(**params)
        except (TypeError, DataError) as exc:
            raise ConfigError(f"bad train config: {exc}")

    def effective(self) -> dict:
        return asdict(self)


def load_run_config(path, overrides) -> RunConfig:
    """Read the JSON config (optional) and apply command-line overrides."""
    payload = {}
    if path is not None:
        cfg_path = Path(path)
        if not cfg_path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            payload = json.loads(cfg_path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON ({exc.msg})")
        if not isinstance(payload, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(payload) - {f for f in RunConfig.__dataclass_fields__}
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    rc = RunConfig(**payload)
    for name in ("seed", "out", "percentile", "pca_dim", "metric"):
        value = overrides.get(name)
        if value is not None:
            setattr(rc, name, value)
    for name in ("k_train", "k_eval"):
        value = overrides.get(name)
        if value is not None:
            rc.train[name] = value
    return rc.validate()


def _mixture_from_json(payload) -> MixtureSpec:
    try:
        return MixtureSpec(
            weights=np.array(payload["weights"], dtype=float),
            means=np.array(payload["means"], dtype=float),
            variances=np.array(payload["variances"], dtype=float),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad mixture spec: {exc}")


def _score_from_json(payload) -> ScoreFunction:
    kind = payload.get("kind")
    if kind == "sigmoid_linear":
        return ScoreFunction(kind=kind, a=np.array(payload["a"], dtype=float),
                             b=float(payload.get("b", 0.0)))
    if kind == "rbf_bump":
        return ScoreFunction(kind=kind, center=np.array(payload["center"], dtype=float),
                             width=float(payload.get("width", 1.0)))
    raise ConfigError(f"unknown score function kind {kind!r}")


def _synthetic_spec(rc: RunConfig, seed: int, n_override=None) -> SyntheticSpec:
    payload = dict(DEFAULT_SYNTHETIC)
    if rc.synthetic:
        payload.update(rc.synthetic)
    n_source = payload["n_source"] if n_override is None else n_override
    n_target = payload["n_target"] if n_override is None else n_override
    return SyntheticSpec(
        source=_mixture_from_json(payload["source"]),
        target=_mixture_from_json(payload["target"]),
        score=_score_from_json(payload["score"]),
        n_source=int(n_source),
        n_target=int(n_target),
        seed=seed,
        pca_dim=rc.pca_dim,
    )


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _report_payload(est, rc: RunConfig) -> dict:
    payload = est.as_dict()
    payload["config"] = rc.effective()
    payload["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    return payload


def cmd_predict(rc: RunConfig) -> int:
    if rc.source is None or rc.target is None:
        raise ConfigError("predict needs 'source' and 'target' corpus paths")
    if rc.metric is None:
        raise ConfigError("predict needs a 'metric' name")
    for label, p in (("source", rc.source), ("target", rc.target)):
        if not Path(p).exists():
            raise ConfigError(f"{label} corpus not found: {p}")
    source = load_corpus(rc.source)
    target = load_corpus(rc.target)
    result = cross_predict_detailed(
        source, target, rc.metric, rc.train_config(),
        percentile=rc.percentile, pca_dim=rc.pca_dim, density=rc.density,
        gmm_components=rc.gmm_components, normalizer_scope=rc.normalizer_scope,
    )
    out = Path(rc.out)
    out.mkdir(parents=True, exist_ok=True)
    est = result.estimate
    _write_json(out / "report.json", _report_payload(est, rc))
    save_model(result.source_model, out / "model_source.json")
    save_model(result.target_model, out / "model_target.json")
    _write_json(out / "space.json", embedding_space_to_json(result.space))
    with open(out / "weights.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "raw", "truncated", "normalized"])
        for i, sid in enumerate(result.source_ids):
            writer.writerow([
                sid,
                repr(float(est.weights.raw[i])),
                repr(float(est.weights.truncated[i])),
                repr(float(est.weights.normalized[i])),
            ])
    print(f"prediction: {est.prediction:.6f}")
    if est.error is not None:
        print(f"error: {est.error:+.6f}")
    for key, value in est.diagnostics.as_dict().items():
        print(f"{key}: {value:.6g}")
    print(f"report: {out / 'report.json'}")
    return 0


def _iter_code_samples(code_path: Path):
    if code_path.is_dir():
        for p in sorted(code_path.glob("*.py")):
            yield p.stem, p.read_text(encoding="utf-8")
    elif code_path.suffix == ".jsonl":
        with open(code_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                obj = json.loads(line)
                if "id" not in obj or "code" not in obj:
                    raise DataError(f"{code_path}: line {lineno}: need 'id' and 'code'")
                yield str(obj["id"]), obj["code"]
    else:
        raise DataError(f"{code_path}: expected a directory or a .jsonl file")


def cmd_metrics(code, findings_dir, out_path) -> int:
    code_path = Path(code)
    if not code_path.exists():
        raise DataError(f"unreadable input: {code}")
    findings_root = Path(findings_dir) if findings_dir else None
    n_total = n_skipped = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for sample_id, sample_code in _iter_code_samples(code_path):
            findings = None
            if findings_root is not None:
                fpath = findings_root / f"{sample_id}.json"
                if fpath.exists():
                    findings = load_findings(fpath)
            row = analyze_sample(sample_id, sample_code, findings)
            n_total += 1
            if row.status != "ok":
                n_skipped += 1
            fh.write(json.dumps(row.as_dict(), sort_keys=True) + "\n")
    print(json.dumps({"total": n_total, "ok": n_total - n_skipped, "skipped": n_skipped}))
    return 0


def _parse_sweep_values(sweep, raw):
    if raw is None:
        return SWEEP_DEFAULTS[sweep]
    values = []
    for part in raw.split(","):
        part = part.strip()
        if sweep == "percentile":
            values.append(float(part))
        elif sweep == "set_size":
            values.append(part if part == "full" else int(part))
        else:
            values.append(int(part))
    if not values:
        raise ConfigError("empty sweep value list")
    return values


def cmd_ablate(rc: RunConfig, sweep: str, values_raw) -> int:
    if sweep not in SWEEP_DEFAULTS:
        raise ConfigError(
            f"unknown sweep key {sweep!r}; choose from {sorted(SWEEP_DEFAULTS)}"
        )
    values = _parse_sweep_values(sweep, values_raw)
    out = Path(rc.out)
    out.mkdir(parents=True, exist_ok=True)
    n_mc = int((rc.synthetic or {}).get("n_mc", DEFAULT_SYNTHETIC["n_mc"]))
    rows = []
    for value in values:
        t0 = time.perf_counter()
        percentile = rc.percentile
        spec = _synthetic_spec(rc, rc.seed)
        cfg = rc.train_config()
        if sweep == "percentile":
            percentile = float(value)
            if not (0.0 < percentile <= 1.0):
                raise ConfigError(f"percentile sweep value {value} out of (0, 1]")
        elif sweep == "k_samples":
            cfg = rc.train_config(k_train=int(value))
        elif sweep == "pca_dim":
            if value > spec.source.dim:
                raise ConfigError(
                    f"pca_dim {value} exceeds synthetic dim {spec.source.dim}"
                )
            spec = SyntheticSpec(
                source=spec.source, target=spec.target, score=spec.score,
                n_source=spec.n_source, n_target=spec.n_target, seed=spec.seed,
                pca_dim=int(value),
            )
        elif sweep == "set_size":
            if value != "full":
                spec = _synthetic_spec(rc, rc.seed, n_override=int(value))
        trial = run_synthetic_trial(
            spec, cfg, percentile=percentile, density=rc.density,
            gmm_components=rc.gmm_components, n_mc=n_mc,
        )
        rows.append({
            "sweep": sweep,
            "value": value,
            "estimate": trial.estimate,
            "oracle_truth": trial.oracle_truth,
            "error": trial.estimate - trial.oracle_truth,
            "abs_error": trial.abs_error,
            "effective_sample_size": trial.diagnostics.effective_sample_size,
            "weight_variance": trial.diagnostics.weight_variance,
            "extreme_value_ratio": trial.diagnostics.extreme_value_ratio,
            "max_weight_share": trial.diagnostics.max_weight_share,
            "seconds": round(time.perf_counter() - t0, 3),
        })
    grid_path = out / f"sweep_{sweep}.csv"
    with open(grid_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        print(f"{sweep}={row['value']}: abs_error={row['abs_error']:.4f} "
              f"ess={row['effective_sample_size']:.1f}")
    print(f"grid: {grid_path}")
    return 0


def cmd_synthetic(rc: RunConfig) -> int:
    payload = dict(DEFAULT_SYNTHETIC)
    if rc.synthetic:
        payload.update(rc.synthetic)
    n_seeds = int(payload.get("n_seeds", 1))
    n_mc = int(payload.get("n_mc", DEFAULT_SYNTHETIC["n_mc"]))
    out = Path(rc.out)
    out.mkdir(parents=True, exist_ok=True)
    trials = []
    with open(out / "trials.jsonl", "w", encoding="utf-8") as fh:
        for i in range(n_seeds):
            spec = _synthetic_spec(rc, rc.seed + i)
            trial = run_synthetic_trial(
                spec, rc.train_config(seed=rc.seed + i), percentile=rc.percentile,
                density=rc.density, gmm_components=rc.gmm_components, n_mc=n_mc,
            )
            trials.append(trial)
            fh.write(json.dumps(trial.as_dict(), sort_keys=True) + "\n")
    abs_errors = [t.abs_error for t in trials]
    summary = {
        "n_trials": len(trials),
        "mean_abs_error": float(np.mean(abs_errors)),
        "max_abs_error": float(np.max(abs_errors)),
        "median_ess": float(np.median([t.diagnostics.effective_sample_size for t in trials])),
        "config": rc.effective(),
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    _write_json(out / "summary.json", summary)
    print(f"trials: {len(trials)}  mean_abs_error: {summary['mean_abs_error']:.4f}  "
          f"max_abs_error: {summary['max_abs_error']:.4f}")
    print(f"output: {out / 'trials.jsonl'}")
    return 0


def cmd_train_density(rc: RunConfig, corpus_path, kind) -> int:
    if not Path(corpus_path).exists():
        raise ConfigError(f"corpus not found: {corpus_path}")
    corpus = load_corpus(corpus_path)
    X = corpus.embedding_matrix()
    space = fit_embedding_space(X, target_dim=rc.pca_dim)
    Z = apply_embedding_space(space, X)
    out = Path(rc.out)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "iwae":
        model = train_iwae(Z, rc.train_config())
        final = model.history[-1] if model.history else float("nan")
        stat = f"final epoch bound {final:.4f}"
    elif kind == "gmm":
        model = train_gmm(Z, rc.gmm_components, rc.seed)
        stat = f"final log-likelihood {model.history[-1]:.4f}"
    else:
        raise ConfigError(f"unknown density kind {kind!r}")
    save_model(model, out / "model.json")
    _write_json(out / "space.json", embedding_space_to_json(space))
    print(f"trained {kind} on {Z.shape[0]} x {Z.shape[1]} features; {stat}")
    print(f"model: {out / 'model.json'}")
    return 0


def cmd_report(inputs, out_dir) -> int:
    for p in inputs:
        if not Path(p).exists():
            raise DataError(f"unreadable input: {p}")
    manifest = render_report(inputs, out_dir)
    for fig in manifest["figures"]:
        print(f"figure: {fig}")
    print(f"summary: {manifest['summary']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="benchcast",
        description="Predict benchmark mean scores from prompt distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--percentile", type=float)
        p.add_argument("--pca-dim", type=int, dest="pca_dim")
        p.add_argument("--k-train", type=int, dest="k_train")
        p.add_argument("--k-eval", type=int, dest="k_eval")
        p.add_argument("--metric")

    p = sub.add_parser("predict", help="predict a target corpus mean from a source corpus")
    add_common(p)
    p.add_argument("--source", help="source corpus JSONL (overrides config)")
    p.add_argument("--target", help="target corpus JSONL (overrides config)")

    p = sub.add_parser("metrics", help="compute per-sample code metrics")
    p.add_argument("--code", required=True, help="directory of .py files or a JSONL of {id, code}")
    p.add_argument("--findings", help="directory of per-sample findings JSON files")
    p.add_argument("--out", default="metrics.jsonl")

    p = sub.add_parser("ablate", help="sweep one knob over synthetic trials")
    add_common(p)
    p.add_argument("--sweep", required=True)
    p.add_argument("--values", help="comma-separated sweep values")

    p = sub.add_parser("synthetic", help="oracle-checked synthetic trials")
    add_common(p)

    p = sub.add_parser("train-density", help="fit one density model on a corpus")
    add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--kind", choices=("iwae", "gmm"), default="iwae")

    p = sub.add_parser("report", help="render figures and summaries from outputs")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out", default="benchcast-report")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "metrics":
            return cmd_metrics(args.code, args.findings, args.out)
        if args.command == "report":
            return cmd_report(args.inputs, args.out)

        overrides = {k: getattr(args, k, None)
                     for k in ("seed", "out", "percentile", "pca_dim", "k_train", "k_eval", "metric")}
        rc = load_run_config(args.config, overrides)
        if args.command == "predict":
            if getattr(args, "source", None):
                rc.source = args.source
            if getattr(args, "target", None):
                rc.target = args.target
            return cmd_predict(rc)
        if args.command == "ablate":
            return cmd_ablate(rc, args.sweep, args.values)
        if args.command == "synthetic":
            return cmd_synthetic(rc)
        if args.command == "train-density":
            return cmd_train_density(rc, args.corpus, args.kind)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"error: numeric: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2
    except BenchcastError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
