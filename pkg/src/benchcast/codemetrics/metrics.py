"""Token-count metrics, cyclomatic complexity, and the security score."""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass

from ..errors import CodeParseError, CorpusFormatError, DataError
from .tokens import TokenStream, tokenize_code

SEVERITY_WEIGHTS = {"High": 50.0, "Medium": 30.0, "Low": 10.0}
CONFIDENCE_WEIGHTS = {"High": 1.0, "Medium": 0.6, "Low": 0.2}


@dataclass(frozen=True)
class HalsteadReport:
    """Length, volume, effort, and estimated seconds from token counts."""

    length: float
    volume: float
    effort: float
    time: float


@dataclass(frozen=True)
class ControlFlowGraph:
    """Node/edge/component counts of a hand-built control-flow graph."""

    nodes: int
    edges: int
    components: int

    def __post_init__(self):
        if self.nodes < 1 or self.components < 1 or self.edges < 0:
            raise DataError("invalid control-flow graph counts")

    def cyclomatic(self) -> int:
        return self.edges - self.nodes + 2 * self.components


@dataclass(frozen=True)
class Finding:
    """One static-analysis result: severity and confidence labels."""

    severity: str
    confidence: str

    def __post_init__(self):
        if self.severity not in SEVERITY_WEIGHTS:
            raise DataError(f"unknown severity {self.severity!r}")
        if self.confidence not in CONFIDENCE_WEIGHTS:
            raise DataError(f"unknown confidence {self.confidence!r}")

    @property
    def weight(self) -> float:
        return SEVERITY_WEIGHTS[self.severity] * CONFIDENCE_WEIGHTS[self.confidence]


@dataclass(frozen=True)
class MetricReport:
    """Per-sample metric row; failed parses carry a status, not fake scores."""

    id: str
    status: str  # "ok" | "parse_error"
    cc: int | None = None
    ss: float | None = None
    halstead: HalsteadReport | None = None
    detail: str | None = None

    def as_dict(self) -> dict:
        out = {"id": self.id, "cc": self.cc, "ss": self.ss, "status": self.status}
        if self.halstead is not None:
            out["halstead"] = {
                "length": self.halstead.length,
                "volume": self.halstead.volume,
                "effort": self.halstead.effort,
                "time": self.halstead.time,
            }
        else:
            out["halstead"] = None
        if self.detail:
            out["detail"] = self.detail
        return out


def halstead(tokens: TokenStream) -> HalsteadReport:
    """Length n1+n2; volume L*log2(L); effort (n1/2 + n2)*V; time E/18."""
    n1, n2 = tokens.n1, tokens.n2
    length = float(n1 + n2)
    volume = length * math.log2(n1 + n2) if length > 0 else 0.0
    effort = (n1 / 2.0 + n2) * volume
    return HalsteadReport(length=length, volume=volume, effort=effort, time=effort / 18.0)


_DECISION_NODES = (ast.If, ast.For, ast.AsyncFor, ast.While, ast.ExceptHandler, ast.IfExp)


def _decision_points(tree: ast.AST) -> int:
    count = 0
    for node in ast.walk(tree):
        if isinstance(node, _DECISION_NODES):
            count += 1
        elif isinstance(node, ast.BoolOp):
            count += len(node.values) - 1
        elif isinstance(node, ast.comprehension):
            count += 1 + len(node.ifs)
    return count


def _routine_count(tree: ast.Module) -> int:
    functions = sum(
        isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)) for stmt in tree.body
    )
    has_script_body = any(
        not isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)) for stmt in tree.body
    )
    return max(1, functions + (1 if has_script_body else 0))


def cyclomatic(code: str) -> int:
    """Independent-path count: decision points plus routine count.

    Decision points are conditionals, loop headers, exception handlers,
    conditional expressions, boolean connectives (one per extra operand),
    and comprehension clauses. For single-entry single-exit structured code
    this equals edges - nodes + 2 * components of the control-flow graph.
    """
    try:
        tree = ast.parse(code)
    except SyntaxError as exc:
        raise CodeParseError(
            f"parse failure: {exc.msg} at line {exc.lineno}, column {exc.offset}",
            line=exc.lineno, offset=exc.offset,
        )
    return _decision_points(tree) + _routine_count(tree)


def security_score(findings) -> float:
    """100 minus the summed severity*confidence weights, floored at 0."""
    penalty = sum(f.weight for f in findings)
    return max(100.0 - penalty, 0.0)


def load_findings(path) -> list:
    """Read a findings report: JSON with a ``results`` array whose items carry
    ``issue_severity`` and ``issue_confidence`` labels (case-insensitive)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"{path}: malformed JSON ({exc.msg})")
    if not isinstance(payload, dict) or not isinstance(payload.get("results"), list):
        raise CorpusFormatError(f"{path}: missing 'results' array")
    findings = []
    for i, item in enumerate(payload["results"]):
        try:
            severity = str(item["issue_severity"]).capitalize()
            confidence = str(item["issue_confidence"]).capitalize()
        except (KeyError, TypeError):
            raise CorpusFormatError(f"{path}: results[{i}] lacks severity/confidence")
        try:
            findings.append(Finding(severity=severity, confidence=confidence))
        except DataError as exc:
            raise CorpusFormatError(f"{path}: results[{i}]: {exc}")
    return findings


def analyze_sample(sample_id: str, code: str, findings=None) -> MetricReport:
    """All metrics for one code sample; parse failures yield a status row."""
    try:
        cc = cyclomatic(code)
        tokens = tokenize_code(code)
    except CodeParseError as exc:
        return MetricReport(id=sample_id, status="parse_error", detail=str(exc))
    ss = security_score(findings) if findings is not None else None
    return MetricReport(
        id=sample_id, status="ok", cc=cc, ss=ss, halstead=halstead(tokens)
    )
