"""Recursive-descent parser for the gateway DSL, construct scripts and GERM files.

The parser only builds :class:`AstNode` trees; :mod:`.elaborate` turns them
into model values.
"""

from __future__ import annotations

from typing import Iterable, Optional

from ..constructs import ACTION_VERBS, SCOPE_LEVELS
from ..errors import ParseError, SourceSpan, UnknownActionKind
from .ast import AstNode
from .lexer import ANNOT_CLOSE, ANNOT_OPEN, IDENT, KEYWORD, NUMBER, PUNCT, STRING, Token

MODEL_SECTIONS = ("structure", "connection", "constraint", "behaviour")
ELEMENT_SECTIONS = MODEL_SECTIONS + ("metadata",)
CONSTRUCT_KINDS = ("qualityOfServiceProperty", "executionPlatformProperty")
SEPARATORS = (";", ".")
MAX_DEPTH = 64


class Parser:
    def __init__(self, tokens: list[Token], file: str = "<input>"):
        self.tokens = tokens
        self.file = file
        self.i = 0
        self.depth = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, k: int = 0) -> Optional[Token]:
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def at(self, kind: str, text: str = None, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.is_(kind, text)

    def at_kw(self, *words: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind == KEYWORD and tok.text in words

    def at_punct(self, *marks: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind == PUNCT and tok.text in marks

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            self.fail(["more input"])
        self.i += 1
        return tok

    def eof_span(self) -> SourceSpan:
        if not self.tokens:
            return SourceSpan(self.file, 1, 1, 1, 1)
        s = self.tokens[-1].span
        return SourceSpan(s.file, s.end_line, s.end_column, s.end_line, s.end_column)

    def fail(self, expected: Iterable[str], cls=ParseError):
        expected = sorted(set(expected))
        tok = self.peek()
        found = "end of input" if tok is None else repr(tok.text)
        span = self.eof_span() if tok is None else tok.span
        raise cls(f"expected {' or '.join(expected)}, found {found}", span, expected)

    def expect(self, kind: str, text: str = None) -> Token:
        if not self.at(kind, text):
            self.fail([text if text is not None else kind])
        return self.advance()

    def expect_kw(self, *words: str) -> Token:
        if not self.at_kw(*words):
            self.fail(words)
        return self.advance()

    def expect_punct(self, mark: str) -> Token:
        if not self.at_punct(mark):
            self.fail([mark])
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if not self.at(IDENT):
            self.fail([what])
        return self.advance()

    def skip_separators(self):
        while self.at_punct(*SEPARATORS):
            self.i += 1

    def span_from(self, start: Token) -> SourceSpan:
        end = self.tokens[self.i - 1].span if self.i > 0 else start.span
        return SourceSpan(start.span.file, start.span.line, start.span.column, end.end_line, end.end_column)

    def finish(self):
        if self.peek() is not None:
            self.fail(["end of input"])

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            tok = self.peek()
            raise ParseError("nesting too deep", tok.span if tok else self.eof_span(), ())

    def leave(self):
        self.depth -= 1

    # -- shared productions -------------------------------------------------

    def annotation(self) -> AstNode:
        start = self.peek()
        resolved = False
        if self.at_kw("resolved"):
            self.advance()
            resolved = True
        self.expect(ANNOT_OPEN)
        category = self.expect_ident("constraint category").text
        self.expect_punct("::")
        name = self.expect_ident("constraint name").text
        self.expect_punct("::")
        tok = self.peek()
        if tok is not None and (tok.kind in (IDENT, KEYWORD, NUMBER, STRING) or tok.is_(PUNCT, "*")):
            value = self.advance().value
        else:
            self.fail(["constraint value"])
        self.expect(ANNOT_CLOSE)
        return AstNode("annotation", self.span_from(start), None,
                       attrs={"category": category, "name": name, "value": value, "resolved": resolved})

    def path(self) -> AstNode:
        start = self.expect_ident("element name")
        self.expect_punct("::")
        port = self.expect_ident("port name")
        self.expect_punct("::")
        point = self.expect_ident("connection point name")
        text = f"{start.text}::{port.text}::{point.text}"
        return AstNode("path", self.span_from(start), text,
                       attrs={"element": start.text, "port": port.text, "point": point.text})

    def attachment(self) -> AstNode:
        start = self.expect_kw("unify")
        first = self.path()
        self.expect_kw("with")
        second = self.path()
        return AstNode("attachment", self.span_from(start), None, [first, second])

    def scalar(self, what: str) -> str:
        tok = self.peek()
        if tok is not None and tok.kind in (IDENT, KEYWORD, NUMBER, STRING):
            return self.advance().value
        self.fail([what])

    # -- models -------------------------------------------------------------

    def model(self) -> AstNode:
        start = self.expect_ident("model name")
        self.expect_kw("is")
        self.expect_kw("style")
        style = self.expect_ident("style name").text
        stage = None
        if self.at_kw("stage"):
            self.advance()
            stage = self.expect_ident("stage name").text
        self.expect_kw("where")
        self.expect_punct("{")
        node = AstNode("model", start.span, start.text, attrs={"style": style, "stage": stage})
        while not self.at_punct("}"):
            self.skip_separators()
            if self.at_punct("}"):
                break
            if self.at_kw("resolved") or self.at(ANNOT_OPEN):
                node.children.append(self.annotation())
            elif self.at_kw(*MODEL_SECTIONS):
                node.children.append(self.section(model_level=True))
            else:
                self.fail(list(MODEL_SECTIONS) + ["--<"])
        self.expect_punct("}")
        self.skip_separators()
        self.finish()
        node.span = self.span_from(start)
        return node

    def section(self, model_level: bool) -> AstNode:
        start = self.advance()
        kind = start.text
        self.expect_kw("is")
        self.expect_punct("{")
        node = AstNode("section", start.span, kind)
        while True:
            self.skip_separators()
            if self.at_punct("}"):
                break
            node.children.append(self.section_item(kind, model_level))
        self.expect_punct("}")
        node.span = self.span_from(start)
        return node

    def section_item(self, section: str, model_level: bool) -> AstNode:
        if self.at_kw("resolved") or self.at(ANNOT_OPEN):
            return self.annotation()
        if section == "connection":
            return self.attachment()
        if section == "constraint":
            self.fail(["--<"])
        if section == "behaviour" and not model_level:
            if self.at_kw("recursive", "value"):
                return self.abstraction()
            if self.at_kw("compose"):
                return self.compose()
            self.fail(["value", "recursive", "compose"])
        if section == "metadata":
            return self.metadata_entry()
        # structure (either level) or model-level behaviour
        if not model_level:
            if self.at_kw("port"):
                return self.port()
            if self.at(IDENT) and self.at_punct(":", k=1):
                return self.property()
        if self.at_kw("archetype") or self.at(IDENT):
            return self.element()
        self.fail(["element declaration"] + ([] if model_level else ["port", "property"]))

    def element(self, allow_archetype: bool = True) -> AstNode:
        start = self.peek()
        if allow_archetype and self.at_kw("archetype"):
            self.advance()
        name = self.expect_ident("element name")
        self.expect_kw("is")
        kind_tok = self.expect_kw("component", "connector", "style")
        style_ref = None
        kind = kind_tok.text
        if kind == "style":
            style_ref = self.expect_ident("style name").text
            kind = "component"
        if self.at_kw("where"):
            self.advance()
        self.enter()
        node = AstNode("element", name.span, name.text, attrs={"kind": kind, "style_ref": style_ref})
        self.expect_punct("{")
        while True:
            self.skip_separators()
            if self.at_punct("}"):
                break
            node.children.append(self.element_item())
        self.expect_punct("}")
        self.leave()
        node.span = self.span_from(start)
        return node

    def element_item(self) -> AstNode:
        if self.at_kw("resolved") or self.at(ANNOT_OPEN):
            return self.annotation()
        if self.at_kw(*ELEMENT_SECTIONS) and self.at_kw("is", k=1):
            return self.section(model_level=False)
        if self.at_kw("port"):
            return self.port()
        if self.at_kw("unify"):
            return self.attachment()
        if self.at(IDENT) and self.at_punct(":", k=1):
            return self.property()
        if self.at_kw("archetype") or self.at(IDENT):
            return self.element()
        self.fail(list(ELEMENT_SECTIONS) + ["port", "--<", "element declaration"])

    def port(self) -> AstNode:
        start = self.expect_kw("port")
        name = self.expect_ident("port name")
        self.expect_punct("{")
        node = AstNode("port", start.span, name.text)
        while True:
            self.skip_separators()
            if self.at_punct("}") or self.peek() is None:
                break
            if self.at_punct(","):
                self.advance()
                continue
            d = self.expect_kw("in", "out")
            self.expect_kw("point")
            p = self.expect_ident("connection point name")
            node.children.append(AstNode("point", self.span_from(d), p.text, attrs={"direction": d.text}))
        self.expect_punct("}")
        node.span = self.span_from(start)
        return node

    def property(self) -> AstNode:
        key = self.expect_ident("property name")
        self.expect_punct(":")
        value = self.scalar("property value")
        return AstNode("property", self.span_from(key), key.text, attrs={"value": value})

    def metadata_entry(self) -> AstNode:
        key = self.expect_ident("metadata key")
        self.expect_punct(":")
        value = self.scalar("metadata value")
        return AstNode("meta", self.span_from(key), key.text, attrs={"value": value})

    # -- behaviour ----------------------------------------------------------

    def abstraction(self) -> AstNode:
        start = self.peek()
        recursive = False
        if self.at_kw("recursive"):
            self.advance()
            recursive = True
        self.expect_kw("value")
        name = self.expect_ident("abstraction name")
        self.expect_kw("is")
        self.expect_kw("abstraction")
        self.expect_punct("(")
        params = []
        while not self.at_punct(")"):
            params.append(self.expect_ident("parameter name").text)
            if not self.at_punct(")"):
                self.expect_punct(",")
        self.expect_punct(")")
        if self.at_punct(";"):
            self.advance()
        node = AstNode("abstraction", start.span, name.text, attrs={"recursive": recursive, "parameters": params})
        if self.at_punct("{"):
            self.advance()
            while True:
                while self.at_punct(";"):
                    self.advance()
                if self.at_punct("}"):
                    break
                node.children.append(self.statement())
            self.expect_punct("}")
        node.span = self.span_from(start)
        return node

    def statement(self) -> AstNode:
        start = self.peek()
        if start is None:
            self.fail(["statement"])
        toks: list[Token] = []
        depth = 0
        while True:
            tok = self.peek()
            if tok is None:
                self.fail([";", "}"])
            if tok.kind == PUNCT:
                if tok.text in "({" and len(tok.text) == 1:
                    depth += 1
                elif tok.text in ")}" and len(tok.text) == 1:
                    if depth == 0:
                        if tok.text == ")":
                            self.fail(["statement"])
                        break  # closing brace of the body
                    depth -= 1
                elif tok.text == ";" and depth == 0:
                    break
            toks.append(self.advance())
        if self.at_punct(";"):
            self.advance()
        invocations = []
        for a, b in zip(toks, toks[1:]):
            if a.kind == IDENT and b.is_(PUNCT, "("):
                invocations.append(a.text)
        return AstNode("statement", self.span_from(start), None, attrs={
            "tokens": [t.text for t in toks],
            "invocations": invocations,
            "conditional": toks[0].is_(KEYWORD, "if"),
        })

    def compose(self) -> AstNode:
        start = self.expect_kw("compose")
        self.expect_punct("{")
        names = []
        while not self.at_punct("}"):
            names.append(self.expect_ident("abstraction invocation").text)
            self.expect_punct("(")
            depth = 1
            while depth:
                tok = self.advance()
                if tok.is_(PUNCT, "("):
                    depth += 1
                elif tok.is_(PUNCT, ")"):
                    depth -= 1
            if not self.at_punct("}"):
                self.expect_kw("and")
        self.expect_punct("}")
        return AstNode("compose", self.span_from(start), None, attrs={"names": names})

    # -- constructs ---------------------------------------------------------

    def construct(self) -> AstNode:
        start = self.expect_ident("construct name")
        self.expect_kw("is")
        kind = self.expect_kw(*CONSTRUCT_KINDS).text
        key = self.annotation()
        self.expect_punct("{")
        node = AstNode("construct", start.span, start.text, [key], {"kind": kind})
        while True:
            self.skip_separators()
            if self.at_punct("}"):
                break
            node.children.append(self.scope())
        self.expect_punct("}")
        self.skip_separators()
        self.finish()
        node.span = self.span_from(start)
        return node

    def scope(self) -> AstNode:
        start = self.expect_kw("on")
        target = self.expect_ident("scope target")
        self.expect_punct(":")
        level = self.peek()
        if level is None or level.kind != IDENT or level.text not in SCOPE_LEVELS:
            self.fail(SCOPE_LEVELS)
        self.advance()
        self.expect_kw("actions")
        self.expect_punct("{")
        self.enter()
        node = AstNode("scope", start.span, target.text, attrs={"level": level.text})
        while True:
            self.skip_separators()
            if self.at_punct("}"):
                break
            if self.at_kw("on"):
                node.children.append(self.scope())
            else:
                node.children.append(self.action())
        self.expect_punct("}")
        self.leave()
        node.span = self.span_from(start)
        return node

    def action(self) -> AstNode:
        start = self.peek()
        if self.at_kw("include"):
            self.advance()
            element = self.element(allow_archetype=False)
            return AstNode("action", self.span_from(start), "include", [element])
        if self.at_kw("replicate"):
            self.advance()
            src = self.expect_ident("element name").text
            self.expect_kw("to")
            dst = self.expect_ident("clone name").text
            return AstNode("action", self.span_from(start), "replicate", attrs={"source": src, "target": dst})
        if self.at_kw("unify"):
            att = self.attachment()
            return AstNode("action", att.span, "unify", att.children)
        if self.at(IDENT, "remove"):
            self.advance()
            name = self.expect_ident("element name").text
            return AstNode("action", self.span_from(start), "remove", attrs={"name": name})
        if self.at(IDENT, "rename"):
            self.advance()
            old = self.expect_ident("element name").text
            self.expect_kw("to")
            new = self.expect_ident("new name").text
            return AstNode("action", self.span_from(start), "rename", attrs={"old": old, "new": new})
        if self.at(IDENT) or self.at(KEYWORD):
            raise UnknownActionKind(
                f"unknown action {start.text!r}; expected one of {', '.join(ACTION_VERBS)}",
                start.span, ACTION_VERBS + ("on",))
        self.fail(ACTION_VERBS + ("on", "}"))

    # -- infrastructure -----------------------------------------------------

    def infrastructure(self) -> AstNode:
        start = self.expect_ident("infrastructure name")
        self.expect_kw("is")
        self.expect_kw("infrastructure")
        self.expect_punct("{")
        node = AstNode("infrastructure", start.span, start.text)
        while True:
            self.skip_separators()
            if self.at_punct("}"):
                break
            if self.at_kw("node"):
                node.children.append(self.infra_node())
            elif self.at_kw("link"):
                first = self.advance()
                a = self.expect_ident("node name")
                self.expect_punct("--")
                b = self.expect_ident("node name")
                node.children.append(AstNode("link", self.span_from(first), None,
                                             attrs={"a": a.text, "b": b.text}))
            else:
                self.fail(["node", "link", "}"])
        self.expect_punct("}")
        self.skip_separators()
        self.finish()
        node.span = self.span_from(start)
        return node

    def infra_node(self) -> AstNode:
        start = self.expect_kw("node")
        name = self.expect_ident("node name")
        self.expect_punct("{")
        attrs: list[tuple[str, str, SourceSpan]] = []
        while True:
            while self.at_punct(",", ";"):
                self.advance()
            if self.at_punct("}"):
                break
            key = self.expect_ident("attribute name")
            self.expect_punct(":")
            attrs.append((key.text, self.scalar("attribute value"), key.span))
        self.expect_punct("}")
        return AstNode("node", self.span_from(start), name.text, attrs={"attributes": attrs})


def parse_model_ast(tokens: list[Token], file: str = "<input>") -> AstNode:
    return Parser(tokens, file).model()


def parse_construct_ast(tokens: list[Token], file: str = "<input>") -> AstNode:
    return Parser(tokens, file).construct()


def parse_infrastructure_ast(tokens: list[Token], file: str = "<input>") -> AstNode:
    return Parser(tokens, file).infrastructure()


def detect_kind(tokens: list[Token]) -> str:
    """Guess the file kind from its header: ``model``, ``construct`` or ``infrastructure``."""
    if len(tokens) >= 3 and tokens[1].is_(KEYWORD, "is"):
        third = tokens[2]
        if third.is_(KEYWORD, "style"):
            return "model"
        if third.is_(KEYWORD, "infrastructure"):
            return "infrastructure"
        if third.kind == KEYWORD and third.text in CONSTRUCT_KINDS:
            return "construct"
    return "model"
