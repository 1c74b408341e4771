"""Operator/operand token counting.

Classification (the full table ships in ``data/halstead_classification.md``):
keywords and punctuation/operator symbols are operators; identifiers and
string/number literals are operands, with the literal constants True, False,
and None counted as operands. Function names at call sites are therefore
operands and the call parentheses operators. Comments, blank space, and
layout tokens are excluded.
"""

from __future__ import annotations

import io
import keyword
import tokenize as _tok
from collections import Counter
from dataclasses import dataclass

from ..errors import CodeParseError

_LITERAL_NAMES = {"True", "False", "None"}
_SKIP_TYPES = {
    _tok.COMMENT,
    _tok.NL,
    _tok.NEWLINE,
    _tok.INDENT,
    _tok.DEDENT,
    _tok.ENDMARKER,
    _tok.ENCODING,
}


@dataclass(frozen=True)
class TokenStream:
    """Operator and operand multisets with their total counts."""

    operators: Counter
    operands: Counter

    @property
    def n1(self) -> int:
        return sum(self.operators.values())

    @property
    def n2(self) -> int:
        return sum(self.operands.values())


def tokenize_code(code: str) -> TokenStream:
    """Split source text into operator/operand multisets.

    Raises :class:`CodeParseError` (with line/offset) on an unterminated
    string literal or an illegal character.
    """
    operators: Counter = Counter()
    operands: Counter = Counter()
    try:
        for tok in _tok.generate_tokens(io.StringIO(code).readline):
            if tok.type in _SKIP_TYPES:
                continue
            if tok.type == _tok.ERRORTOKEN:
                if tok.string.strip() == "":
                    continue  # stray-whitespace artifact before the real error
                line, col = tok.start
                if tok.string in ("'", '"'):
                    raise CodeParseError(
                        f"unterminated string literal at line {line}, column {col}",
                        line=line, offset=col,
                    )
                raise CodeParseError(
                    f"illegal character {tok.string!r} at line {line}, column {col}",
                    line=line, offset=col,
                )
            if tok.type == _tok.OP:
                operators[tok.string] += 1
            elif tok.type == _tok.NAME:
                if tok.string in _LITERAL_NAMES:
                    operands[tok.string] += 1
                elif keyword.iskeyword(tok.string):
                    operators[tok.string] += 1
                else:
                    operands[tok.string] += 1
            elif tok.type in (_tok.NUMBER, _tok.STRING):
                operands[tok.string] += 1
    except _tok.TokenError as exc:
        msg, (line, col) = exc.args
        raise CodeParseError(
            f"{msg} at line {line}, column {col}", line=line, offset=col
        )
    except (SyntaxError, IndentationError) as exc:
        raise CodeParseError(
            f"cannot tokenize: {exc.msg}", line=exc.lineno, offset=exc.offset
        )
    return TokenStream(operators=operators, operands=operands)
