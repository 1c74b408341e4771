"""Static per-sample code metrics: token-count metrics, decision-point
cyclomatic complexity, and the weighted security score from ingested
static-analysis findings.

The supported input is an indentation-structured imperative subset
(functions, if/elif/else, for, while, try/except, boolean connectives,
conditional expressions, assignments, calls, literals). Unparseable samples
get an explicit ``parse_error`` status instead of default scores so that
aggregates can skip and count them honestly.
"""

from .metrics import (
    ControlFlowGraph,
    Finding,
    HalsteadReport,
    MetricReport,
    analyze_sample,
    cyclomatic,
    halstead,
    load_findings,
    security_score,
)
from .tokens import TokenStream, tokenize_code

__all__ = [
    "TokenStream",
    "tokenize_code",
    "HalsteadReport",
    "ControlFlowGraph",
    "Finding",
    "MetricReport",
    "halstead",
    "cyclomatic",
    "security_score",
    "load_findings",
    "analyze_sample",
]
