"""Token counting, complexity, and security-score metrics."""

import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benchcast.codemetrics import (
    ControlFlowGraph,
    Finding,
    analyze_sample,
    cyclomatic,
    halstead,
    load_findings,
    security_score,
    tokenize_code,
)
from benchcast.codemetrics.tokens import TokenStream
from benchcast.errors import CodeParseError, CorpusFormatError, DataError

SNIPPETS = json.loads(
    (Path(__file__).parent.parent / "src/benchcast/codemetrics/data/cc_snippets.json").read_text()
)


class TestTokenizer:
    def test_simple_assignment(self):
        ts = tokenize_code("a = b + 1")
        assert dict(ts.operators) == {"=": 1, "+": 1}
        assert dict(ts.operands) == {"a": 1, "b": 1, "1": 1}
        assert ts.n1 == 2 and ts.n2 == 3

    def test_empty_string(self):
        ts = tokenize_code("")
        assert ts.n1 == 0 and ts.n2 == 0

    def test_multiset_counts_duplicates(self):
        ts = tokenize_code("x = x")
        assert ts.n1 == 1 and ts.n2 == 2
        assert ts.operands["x"] == 2

    def test_comments_and_whitespace_excluded(self):
        ts = tokenize_code("a = 1  # set a\n\n")
        assert dict(ts.operators) == {"=": 1}
        assert dict(ts.operands) == {"a": 1, "1": 1}

    def test_keywords_are_operators_literals_are_operands(self):
        ts = tokenize_code("if x and True:\n    return None\n")
        assert ts.operators["if"] == 1 and ts.operators["and"] == 1
        assert ts.operators["return"] == 1
        assert ts.operands["True"] == 1 and ts.operands["None"] == 1

    def test_call_site_classification(self):
        ts = tokenize_code("f(x)")
        assert ts.operands["f"] == 1 and ts.operands["x"] == 1
        assert ts.operators["("] == 1 and ts.operators[")"] == 1

    def test_unterminated_string_reports_position(self):
        with pytest.raises(CodeParseError, match="unterminated string"):
            tokenize_code('x = "abc')
        with pytest.raises(CodeParseError):
            tokenize_code('x = """abc')

    def test_illegal_character_reports_position(self):
        with pytest.raises(CodeParseError, match="illegal character"):
            tokenize_code("x = 1 $ 2")

    def test_determinism(self):
        code = "def f(a):\n    return a * 2 + a\n"
        assert tokenize_code(code) == tokenize_code(code)


class TestHalstead:
    def test_frozen_reference_values(self):
        # n1=3, n2=2: L=5, V=5*log2(5), E=3.5*V, T=E/18.
        from collections import Counter

        ts = TokenStream(operators=Counter({"=": 1, "+": 2}), operands=Counter({"a": 2}))
        assert ts.n1 == 3 and ts.n2 == 2
        report = halstead(ts)
        assert report.length == 5.0
        assert report.volume == pytest.approx(11.6096, abs=1e-3)
        assert report.effort == pytest.approx(40.634, abs=1e-3)
        assert report.time == pytest.approx(2.257, abs=1e-3)

    def test_empty_stream_all_zero(self):
        report = halstead(tokenize_code(""))
        assert (report.length, report.volume, report.effort, report.time) == (0, 0, 0, 0)

    def test_doubling_counts_more_than_doubles_volume(self):
        from collections import Counter

        small = halstead(TokenStream(Counter({"+": 2}), Counter({"a": 3})))
        big = halstead(TokenStream(Counter({"+": 4}), Counter({"a": 6})))
        assert big.length == 2 * small.length
        assert big.volume > 2 * small.volume

    @given(st.integers(0, 50), st.integers(0, 50), st.integers(1, 5), st.integers(1, 5))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_counts(self, n1, n2, d1, d2):
        from collections import Counter

        def make(a, b):
            ops = Counter({"+": a}) if a else Counter()
            vals = Counter({"x": b}) if b else Counter()
            return halstead(TokenStream(ops, vals))

        base = make(n1, n2)
        grown = make(n1 + d1, n2 + d2)
        assert grown.volume >= base.volume
        assert grown.effort >= base.effort
        assert grown.time >= base.time


class TestCyclomatic:
    def test_straight_line_function(self):
        assert cyclomatic("def f(x):\n    y = x + 1\n    return y\n") == 1

    def test_if_else_matches_hand_cfg(self):
        code = "def f(v):\n    if v:\n        return 1\n    else:\n        return 0\n"
        assert cyclomatic(code) == 2
        assert ControlFlowGraph(nodes=4, edges=4, components=1).cyclomatic() == 2

    def test_two_straight_line_functions(self):
        code = "def a(x):\n    return x\n\n\ndef b(y):\n    return y\n"
        assert cyclomatic(code) == 2

    def test_parse_failure_reports_location(self):
        with pytest.raises(CodeParseError, match="line"):
            cyclomatic("def broken(:\n    pass\n")

    def test_additive_over_concatenated_routines(self):
        parts = [s["code"] for s in SNIPPETS if s["name"] in
                 ("single_if", "while_loop", "bool_and")]
        total = cyclomatic("\n\n".join(parts))
        assert total == sum(cyclomatic(p) for p in parts)

    def test_all_bundled_snippets_match_hand_built_cfgs(self):
        for snippet in SNIPPETS:
            cfg = ControlFlowGraph(
                nodes=snippet["cfg"]["nodes"],
                edges=snippet["cfg"]["edges"],
                components=snippet["cfg"]["components"],
            )
            assert cyclomatic(snippet["code"]) == cfg.cyclomatic(), snippet["name"]

    def test_snippet_corpus_size(self):
        assert len(SNIPPETS) == 20


class TestSecurityScore:
    def test_no_findings_full_score(self):
        assert security_score([]) == 100.0

    def test_single_high_high(self):
        assert security_score([Finding("High", "High")]) == 50.0

    def test_clamped_at_zero(self):
        assert security_score([Finding("High", "High")] * 3) == 0.0

    def test_medium_low_weight_product(self):
        assert security_score([Finding("Medium", "Low")]) == pytest.approx(94.0)

    def test_unknown_labels_rejected(self):
        with pytest.raises(DataError):
            Finding("Critical", "High")
        with pytest.raises(DataError):
            Finding("High", "Certain")

    @given(st.lists(st.tuples(st.sampled_from(["High", "Medium", "Low"]),
                              st.sampled_from(["High", "Medium", "Low"])), max_size=12))
    @settings(max_examples=60, deadline=None)
    def test_monotone_nonincreasing_and_bounded(self, labels):
        findings = [Finding(s, c) for s, c in labels]
        score = security_score(findings)
        assert 0.0 <= score <= 100.0
        assert security_score(findings + [Finding("Low", "Low")]) <= score


class TestFindingsFile:
    def test_empty_results(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text('{"results": []}')
        findings = load_findings(path)
        assert findings == [] and security_score(findings) == 100.0

    def test_medium_low_item(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"results": [
            {"issue_severity": "MEDIUM", "issue_confidence": "LOW", "test_id": "B101"}
        ]}))
        findings = load_findings(path)
        assert security_score(findings) == pytest.approx(94.0)

    def test_lowercase_labels_accepted(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"results": [
            {"issue_severity": "medium", "issue_confidence": "low"}
        ]}))
        assert security_score(load_findings(path)) == pytest.approx(94.0)

    def test_missing_results_rejected(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text("{}")
        with pytest.raises(CorpusFormatError, match="results"):
            load_findings(path)

    def test_unknown_label_rejected(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"results": [
            {"issue_severity": "WILD", "issue_confidence": "LOW"}
        ]}))
        with pytest.raises(CorpusFormatError):
            load_findings(path)


class TestAnalyzeSample:
    def test_ok_sample(self):
        row = analyze_sample("s1", "def f(x):\n    return x\n", findings=[])
        assert row.status == "ok" and row.cc == 1 and row.ss == 100.0
        assert row.halstead.length > 0

    def test_parse_error_gets_status_not_scores(self):
        row = analyze_sample("s2", "def broken(:\n")
        assert row.status == "parse_error"
        assert row.cc is None and row.halstead is None

    def test_no_findings_means_null_ss(self):
        row = analyze_sample("s3", "x = 1\n")
        assert row.ss is None
