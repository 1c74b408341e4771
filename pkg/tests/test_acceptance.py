"""Acceptance suite: one test per exit criterion, each printing a verdict line.

Runs on synthetic data with independent oracles (analytic densities,
Monte-Carlo ground truth, hand-built control-flow graphs); tolerances are
fixed here, not tuned at runtime. The full suite needs no network access and
no external model downloads.
"""

import csv
import json
import time
from collections import Counter

import numpy as np
import pytest

from benchcast.cli import main as cli_main
from benchcast.codemetrics import ControlFlowGraph, Finding, halstead, security_score, cyclomatic
from benchcast.codemetrics.tokens import TokenStream
from benchcast.corpus import apply_embedding_space, fit_embedding_space, load_corpus
from benchcast.density import TrainConfig, iwae_elbo, log_marginal_batch, train_gmm, train_iwae
from benchcast.estimator import (
    build_weight_vector,
    compute_raw_weights,
    estimate_unnormalized,
    evaluate_error,
    normalize_weights,
    predict,
    truncate_weights,
)
from benchcast.harness import (
    MixtureSpec,
    ScoreFunction,
    SyntheticSpec,
    cross_predict,
    run_synthetic_trial,
    separation_sweep,
)

from tests.test_codemetrics import SNIPPETS


def verdict(ok, name, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


class TestAcceptance:
    def test_oracle_unbiasedness_true_densities(self):
        # Unnormalized estimator with exact densities: source N(0,1), target
        # N(1,1), f = 1{x > 1}; must land within 3 SE of the exact value 0.5.
        start = time.perf_counter()
        n = 100_000
        rng = np.random.default_rng(20240601)
        xs = rng.standard_normal(n)
        log_t = -0.5 * np.log(2 * np.pi) - 0.5 * (xs - 1.0) ** 2
        log_s = -0.5 * np.log(2 * np.pi) - 0.5 * xs**2
        w = compute_raw_weights(log_t, log_s)
        f = (xs > 1.0).astype(float)
        estimate = estimate_unnormalized(w, f)
        se = float(np.std(w * f, ddof=1) / np.sqrt(n))
        elapsed = time.perf_counter() - start
        ok = abs(estimate - 0.5) <= 3 * se and elapsed < 10.0
        assert verdict(ok, "oracle unbiasedness",
                       f"estimate {estimate:.5f} vs 0.5, 3*SE {3*se:.5f}, {elapsed:.2f}s")

    def test_identity_pipeline(self, fixtures_dir):
        corpus = load_corpus(fixtures_dir / "source.jsonl")
        errors = []
        for seed in range(5):
            est = cross_predict(corpus, corpus, "quality", TrainConfig(seed=seed),
                                percentile=0.9)
            errors.append(abs(est.error))
        learned_ok = max(errors) <= 0.02

        # Literally shared density model: weights exactly one, error exactly 0.
        X = corpus.embedding_matrix()
        space = fit_embedding_space(X)
        Z = apply_embedding_space(space, X)
        model = train_iwae(Z, TrainConfig(epochs=10, seed=0, patience=10))
        log_p = log_marginal_batch(model, Z, 32, seed=1)
        raw = compute_raw_weights(log_p, log_p)
        scores = corpus.score_vector("quality")
        est = predict(build_weight_vector(raw, 1.0), scores)
        exact_ok = bool(np.all(raw == 1.0)) and evaluate_error(est.prediction, scores) == 0.0

        ok = learned_ok and exact_ok
        assert verdict(ok, "identity pipeline",
                       f"max |error| {max(errors):.4f} over 5 seeds; shared-model "
                       f"weights all one: {exact_ok}")

    def test_synthetic_recovery(self):
        start = time.perf_counter()
        src = MixtureSpec(weights=[0.5, 0.5], means=[[-1.0, 0.0], [1.0, 0.0]],
                          variances=np.ones((2, 2)))
        tgt = MixtureSpec(weights=[0.5, 0.5], means=[[-1.0, 1.0], [1.0, 1.0]],
                          variances=np.ones((2, 2)))
        score = ScoreFunction(kind="sigmoid_linear", a=np.array([0.8, -0.5]), b=0.2)
        hits = 0
        errors = []
        for seed in range(10):
            spec = SyntheticSpec(source=src, target=tgt, score=score,
                                 n_source=1000, n_target=1000, seed=seed)
            trial = run_synthetic_trial(spec, TrainConfig(seed=seed), percentile=0.9,
                                        n_mc=1_000_000)
            errors.append(trial.abs_error)
            hits += trial.abs_error <= 0.05
        elapsed = time.perf_counter() - start
        ok = hits >= 8 and elapsed <= 600.0
        assert verdict(ok, "synthetic recovery",
                       f"{hits}/10 runs within 0.05 (max err {max(errors):.4f}), "
                       f"{elapsed:.0f}s")

    def test_iwae_bound_tightens_with_k(self):
        # Held-out linear-Gaussian data; the 10-sample bound may not sit more
        # than one standard error below the 1-sample bound, per seed.
        A = np.array([[1.0, 0.4], [-0.3, 0.9]])
        ok_all = True
        details = []
        for seed in range(5):
            rng = np.random.default_rng(100 + seed)
            data = rng.standard_normal((600, 2)) @ A.T
            heldout = rng.standard_normal((150, 2)) @ A.T
            model = train_iwae(data, TrainConfig(seed=seed))
            e10 = np.array([iwae_elbo(model, x, 10, seed=7, point_key=i)
                            for i, x in enumerate(heldout)])
            e1 = np.array([iwae_elbo(model, x, 1, seed=7, point_key=i)
                           for i, x in enumerate(heldout)])
            diff = e10 - e1
            se = diff.std(ddof=1) / np.sqrt(diff.size)
            ok_all &= diff.mean() >= -se
            details.append(f"{diff.mean():+.4f}")
        assert verdict(ok_all, "iwae tightening",
                       f"mean(ELBO10-ELBO1) per seed: {', '.join(details)}")

    def test_gmm_em_monotone_and_moment_exact(self):
        rng = np.random.default_rng(7)
        mono_ok = True
        for _ in range(20):
            n = int(rng.integers(40, 200))
            d = int(rng.integers(1, 5))
            k = int(rng.integers(1, 5))
            data = rng.standard_normal((n, d)) * rng.uniform(0.5, 2.0, d) \
                + rng.uniform(-2, 2, d)
            model = train_gmm(data, k, seed=int(rng.integers(1 << 30)))
            mono_ok &= bool(np.all(np.diff(model.history) >= -1e-9))

        data = rng.standard_normal((500, 3)) * [0.7, 1.3, 2.1] + [1.0, -2.0, 0.5]
        single = train_gmm(data, 1, seed=0)
        moment_ok = (np.max(np.abs(single.means[0] - data.mean(axis=0))) <= 1e-9
                     and np.max(np.abs(single.variances[0] - data.var(axis=0))) <= 1e-9)
        ok = mono_ok and moment_ok
        assert verdict(ok, "gmm em monotonicity",
                       f"20 EM traces monotone: {mono_ok}; single-component "
                       f"moments within 1e-9: {moment_ok}")

    def test_truncation_and_normalization_properties(self):
        rng = np.random.default_rng(11)
        clamp_ok = simplex_ok = rescale_ok = noop_ok = True
        for _ in range(200):
            n = int(rng.integers(1, 60))
            raw = rng.lognormal(0.0, 2.0, n)
            p = float(rng.uniform(0.05, 1.0))
            trunc = truncate_weights(raw, p)
            clamp_ok &= bool(np.all(trunc <= raw + 1e-15))
            rank = int(np.ceil(p * n))
            clamp_ok &= bool(np.all(trunc <= np.sort(raw)[rank - 1] + 1e-15))
            norm = normalize_weights(trunc)
            simplex_ok &= abs(float(norm.sum()) - 1.0) <= 1e-9
            scores = rng.random(n)
            base = predict(build_weight_vector(raw, p), scores).prediction
            scaled = predict(build_weight_vector(raw * 37.5, p), scores).prediction
            rescale_ok &= abs(base - scaled) <= 1e-12
            noop_ok &= bool(np.all(truncate_weights(raw, 1.0) == raw))
        ok = clamp_ok and simplex_ok and rescale_ok and noop_ok
        assert verdict(ok, "truncation/normalization properties",
                       f"clamp {clamp_ok}, simplex {simplex_ok}, "
                       f"rescale-invariance {rescale_ok}, p=1 no-op {noop_ok}")

    def test_code_metrics_exactness(self):
        report = halstead(TokenStream(Counter({"=": 1, "+": 2}), Counter({"x": 2})))
        halstead_ok = (report.length == 5.0
                       and abs(report.volume - 11.6096) <= 1e-3
                       and abs(report.effort - 40.634) <= 1e-3
                       and abs(report.time - 2.257) <= 1e-3)
        ss_ok = (security_score([Finding("High", "High")]) == 50.0
                 and security_score([Finding("Medium", "Low")]) == 94.0)
        cc_ok = all(
            cyclomatic(s["code"]) == ControlFlowGraph(
                nodes=s["cfg"]["nodes"], edges=s["cfg"]["edges"],
                components=s["cfg"]["components"],
            ).cyclomatic()
            for s in SNIPPETS
        )
        ok = halstead_ok and ss_ok and cc_ok and len(SNIPPETS) == 20
        assert verdict(ok, "code metrics exactness",
                       f"halstead {halstead_ok}, security weights {ss_ok}, "
                       f"cc vs hand-built CFG on {len(SNIPPETS)} snippets {cc_ok}")

    def test_diagnostics_monotone_across_separation(self):
        seps = [0.5, 1.0, 2.0, 5.0, 20.0]
        sweep = separation_sweep(seps, base_seed=0, cfg=TrainConfig(seed=0),
                                 n=500, n_seeds=10)
        med_ess = [float(np.median([t.diagnostics.effective_sample_size
                                    for t in row["trials"]])) for row in sweep]
        med_evr = [float(np.median([t.diagnostics.extreme_value_ratio
                                    for t in row["trials"]])) for row in sweep]
        ess_ok = bool(np.all(np.diff(med_ess) <= 1e-9))
        evr_ok = bool(np.all(np.diff(med_evr) >= -1e-9))
        ok = ess_ok and evr_ok
        assert verdict(ok, "diagnostics monotonicity",
                       f"median ESS {['%.0f' % v for v in med_ess]} non-increasing "
                       f"{ess_ok}; median EVR {['%.3f' % v for v in med_evr]} "
                       f"non-decreasing {evr_ok}")

    def test_ablation_grid_shapes(self, tmp_path):
        fast_train = {"epochs": 4, "patience": 4}
        synth_2d = {
            "n_source": 120, "n_target": 120, "n_mc": 20_000,
            "source": {"weights": [1.0], "means": [[0.0, 0.0]], "variances": [[1.0, 1.0]]},
            "target": {"weights": [1.0], "means": [[0.5, 0.0]], "variances": [[1.0, 1.0]]},
            "score": {"kind": "sigmoid_linear", "a": [0.8, -0.5], "b": 0.2},
        }

        def run_sweep(sweep, synthetic, values=None):
            out = tmp_path / sweep
            cfg_path = tmp_path / f"{sweep}.json"
            cfg_path.write_text(json.dumps({
                "train": fast_train, "seed": 0, "out": str(out),
                "synthetic": synthetic,
            }))
            argv = ["ablate", "--config", str(cfg_path), "--sweep", sweep]
            if values:
                argv += ["--values", values]
            assert cli_main(argv) == 0
            with open(out / f"sweep_{sweep}.csv") as fh:
                return [row["value"] for row in csv.DictReader(fh)]

        percentile_labels = run_sweep("percentile", synth_2d)
        k_labels = run_sweep("k_samples", synth_2d)

        rng = np.random.default_rng(0)
        d = 768
        synth_wide = {
            "n_source": 100, "n_target": 100, "n_mc": 20_000,
            "source": {"weights": [1.0], "means": [[0.0] * d],
                       "variances": [[1.0] * d]},
            "target": {"weights": [1.0],
                       "means": [list(rng.normal(0.3, 0.1, d))],
                       "variances": [[1.0] * d]},
            "score": {"kind": "sigmoid_linear", "a": [1.0 / d] * d, "b": 0.0},
        }
        pca_labels = run_sweep("pca_dim", synth_wide)

        ok = (percentile_labels == ["1.0", "0.95", "0.9", "0.85", "0.8"]
              and k_labels == ["1", "5", "10", "25", "50", "100"]
              and pca_labels == ["576", "384", "192"])
        assert verdict(ok, "ablation grids",
                       f"percentile {percentile_labels}, k {k_labels}, "
                       f"pca {pca_labels}")
