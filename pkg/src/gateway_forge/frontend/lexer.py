"""Tokenizer shared by model (.gdsl), construct (.gcon) and infrastructure (.germ) files."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..errors import LexError, SourceSpan
from ..model import RESERVED_WORDS

KEYWORDS = RESERVED_WORDS

IDENT = "IDENT"
KEYWORD = "KEYWORD"
NUMBER = "NUMBER"
STRING = "STRING"
PUNCT = "PUNCT"
ANNOT_OPEN = "ANNOT_OPEN"
ANNOT_CLOSE = "ANNOT_CLOSE"

# longest first
PUNCTUATION = ("::", ":=", "--", "{", "}", "(", ")", ":", ";", ".", ",", "*")

_IDENT_RE = re.compile(r"(?:[A-Za-z_]|\$\{[A-Za-z_]\w*\})(?:[A-Za-z0-9_]|-(?!-)|\$\{[A-Za-z_]\w*\})*")
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?(?![A-Za-z_])")
_STRING_RE = re.compile(r'"(?:[^"\\\n]|\\.)*"')
_SPACE_RE = re.compile(r"[ \t\r\f\v\n]+")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan

    @property
    def value(self) -> str:
        """Decoded payload (strings unquoted, everything else verbatim)."""
        if self.kind == STRING:
            return json.loads(self.text)
        return self.text

    def is_(self, kind: str, text: str = None) -> bool:
        return self.kind == kind and (text is None or self.text == text)

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.span.line}:{self.span.column})"


class _Cursor:
    def __init__(self, source: str, file: str):
        self.src = source
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1

    def advance(self, n: int):
        chunk = self.src[self.pos:self.pos + n]
        newlines = chunk.count("\n")
        if newlines:
            self.line += newlines
            self.col = len(chunk) - chunk.rfind("\n")
        else:
            self.col += n
        self.pos += n

    def span_for(self, n: int) -> SourceSpan:
        start_line, start_col = self.line, self.col
        self.advance(n)
        return SourceSpan(self.file, start_line, start_col, self.line, self.col)

    def here(self) -> SourceSpan:
        return SourceSpan(self.file, self.line, self.col, self.line, self.col)


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Split ``source`` into tokens.

    ``...`` is an elision marker and produces no token. When it directly
    follows ``{`` the free text after it, up to the next ``...`` or brace, is
    elided too, so partial listings such as ``{ ... service description ... }``
    read as empty bodies.
    """
    cur = _Cursor(source, file)
    tokens: list[Token] = []
    src = source
    while cur.pos < len(src):
        ch = src[cur.pos]
        m = _SPACE_RE.match(src, cur.pos)
        if m:
            cur.advance(m.end() - cur.pos)
            continue
        if src.startswith("//", cur.pos):
            end = src.find("\n", cur.pos)
            cur.advance((len(src) if end < 0 else end) - cur.pos)
            continue
        if src.startswith("...", cur.pos):
            cur.advance(3)
            if tokens and tokens[-1].is_(PUNCT, "{"):
                _skip_prose(cur)
            continue
        if src.startswith("--<", cur.pos):
            tokens.append(Token(ANNOT_OPEN, "--<", cur.span_for(3)))
            continue
        if src.startswith(">--", cur.pos):
            tokens.append(Token(ANNOT_CLOSE, ">--", cur.span_for(3)))
            continue
        m = _IDENT_RE.match(src, cur.pos)
        if m:
            text = m.group()
            kind = KEYWORD if text in KEYWORDS else IDENT
            tokens.append(Token(kind, text, cur.span_for(len(text))))
            continue
        m = _NUMBER_RE.match(src, cur.pos)
        if m:
            tokens.append(Token(NUMBER, m.group(), cur.span_for(len(m.group()))))
            continue
        if ch == '"':
            m = _STRING_RE.match(src, cur.pos)
            if not m:
                raise LexError("unterminated string literal", cur.here())
            try:
                json.loads(m.group())
            except ValueError:
                raise LexError(f"invalid escape in string literal {m.group()}", cur.here()) from None
            tokens.append(Token(STRING, m.group(), cur.span_for(len(m.group()))))
            continue
        for p in PUNCTUATION:
            if src.startswith(p, cur.pos):
                tokens.append(Token(PUNCT, p, cur.span_for(len(p))))
                break
        else:
            raise LexError(f"unexpected character {ch!r}", cur.here())
    return tokens


def _skip_prose(cur: _Cursor):
    src = cur.src
    i = cur.pos
    while i < len(src):
        if src.startswith("...", i):
            cur.advance(i + 3 - cur.pos)
            return
        if src[i] in "{}":
            break
        i += 1
    cur.advance(i - cur.pos)
