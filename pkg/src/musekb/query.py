"""A small conjunctive graph-pattern query language.

Surface form::

    select ?track ?composer
    where { ?track hasComposer ?composer . ?track hasGenre genre:jazz . }
    filter ?year <= 1900

Pattern positions are variables, angle-bracketed IRIs, prefixed names
(expanded through the graph's prefix map; bare names use the default
prefix, with ``a``/``type`` standing for the type predicate), quoted
strings or integers. Evaluation is the natural join of the per-pattern
match relations with set semantics and canonical row order.
"""

from __future__ import annotations

import csv
import io
import operator
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import MusekbError
from .kg import DEFAULT_PREFIXES, Graph, Iri, Literal, Node, node_text
from .namespaces import RDF_TYPE


class QuerySyntaxError(MusekbError):
    code = "SyntaxError"

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class UnknownPrefix(MusekbError):
    code = "UnknownPrefix"


class UnboundSelectVariable(MusekbError):
    code = "UnboundSelectVariable"


@dataclass(frozen=True)
class Variable:
    name: str


PatternTerm = Union[Iri, Literal, Variable]
Pattern = tuple[PatternTerm, PatternTerm, PatternTerm]

COMPARATORS = ("=", "!=", "<", "<=", ">", ">=")
_COMPARATOR_ALIASES = {"≠": "!=", "≤": "<=", "≥": ">="}
_OPS = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


@dataclass(frozen=True)
class Filter:
    variable: Variable
    comparator: str
    value: Literal

    def __post_init__(self):
        if self.comparator not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.comparator!r}")


@dataclass(frozen=True)
class QueryAst:
    select_vars: tuple[Variable, ...]
    patterns: tuple[Pattern, ...]
    filters: tuple[Filter, ...] = ()

    def __post_init__(self):
        if not self.patterns:
            raise ValueError("query needs at least one pattern")
        bound = {t.name for p in self.patterns for t in p if isinstance(t, Variable)}
        for v in self.select_vars:
            if v.name not in bound:
                raise UnboundSelectVariable(f"?{v.name} appears in no pattern")
        for f in self.filters:
            if f.variable.name not in bound:
                raise UnboundSelectVariable(f"filter variable ?{f.variable.name} appears in no pattern")


@dataclass(frozen=True)
class BindingTable:
    variables: tuple[str, ...]
    rows: tuple[tuple[Node, ...], ...]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.variables)
        for row in self.rows:
            writer.writerow([c.value if isinstance(c, Iri) else c.lexical for c in row])
        return out.getvalue()


# -- tokenizer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<var>\?[A-Za-z_][\w-]*)
    | (?P<iri><[^<>\s]*>)
    | (?P<string>"(?:[^"\\\n\r]|\\.)*")
    | (?P<int>-?\d+)
    | (?P<pname>[A-Za-z_][\w-]*:[A-Za-z_][\w-]*|:[A-Za-z_][\w-]*)
    | (?P<bare>[A-Za-z_][\w-]*)
    | (?P<punct>\^\^|<=|>=|!=|[{}.=<>≠≤≥])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"select", "where", "filter"}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise QuerySyntaxError(line, col, f"unexpected character {text[pos]!r}")
        raw = m.group(0)
        kind = m.lastgroup or "punct"
        if kind != "ws":
            if kind == "bare" and raw.lower() in _KEYWORDS:
                tokens.append(_Token("keyword", raw.lower(), line, col))
            else:
                tokens.append(_Token(kind, raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], prefixes: Mapping[str, str]):
        self.tokens = tokens
        self.pos = 0
        self.prefixes = prefixes

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str) -> QuerySyntaxError:
        tok = self.current
        return QuerySyntaxError(tok.line, tok.col, message)

    def advance(self) -> _Token:
        tok = self.current
        self.pos += 1
        return tok

    def expect_keyword(self, word: str) -> None:
        if self.current.kind != "keyword" or self.current.text != word:
            raise self.error(f"expected {word!r}")
        self.advance()

    def expect_punct(self, text: str) -> None:
        if self.current.kind != "punct" or self.current.text != text:
            raise self.error(f"expected {text!r}")
        self.advance()

    def expand(self, prefix: str, local: str) -> Iri:
        if prefix not in self.prefixes:
            raise UnknownPrefix(f"prefix {prefix or ':'!r} is not declared")
        return Iri(self.prefixes[prefix] + local)

    def parse_literal_token(self, tok: _Token) -> Literal:
        if tok.kind == "int":
            return Literal(tok.text, "integer")
        body = tok.text[1:-1]
        value = re.sub(r"\\(.)", lambda m: {"n": "\n", "r": "\r"}.get(m.group(1), m.group(1)), body)
        datatype = "string"
        if self.current.kind == "punct" and self.current.text == "^^":
            self.advance()
            dt = self.advance()
            if dt.kind != "bare" or dt.text not in ("string", "integer", "year"):
                raise QuerySyntaxError(dt.line, dt.col, "expected a datatype name after ^^")
            datatype = dt.text
        return Literal(value, datatype)

    def parse_term(self) -> PatternTerm:
        tok = self.advance()
        if tok.kind == "var":
            return Variable(tok.text[1:])
        if tok.kind == "iri":
            try:
                return Iri(tok.text[1:-1])
            except ValueError as exc:
                raise QuerySyntaxError(tok.line, tok.col, str(exc)) from None
        if tok.kind in ("string", "int"):
            return self.parse_literal_token(tok)
        if tok.kind == "pname":
            prefix, _, local = tok.text.partition(":")
            return self.expand(prefix, local)
        if tok.kind == "bare":
            if tok.text in ("a", "type"):
                return Iri(RDF_TYPE)
            return self.expand("", tok.text)
        raise QuerySyntaxError(tok.line, tok.col, f"expected a pattern term, found {tok.text!r}")

    def parse(self) -> QueryAst:
        self.expect_keyword("select")
        select_vars: list[Variable] = []
        while self.current.kind == "var":
            select_vars.append(Variable(self.advance().text[1:]))
        if not select_vars:
            raise self.error("expected at least one ?variable after select")
        self.expect_keyword("where")
        self.expect_punct("{")
        patterns: list[Pattern] = []
        while not (self.current.kind == "punct" and self.current.text == "}"):
            s = self.parse_term()
            p = self.parse_term()
            o = self.parse_term()
            self.expect_punct(".")
            patterns.append((s, p, o))
        self.expect_punct("}")
        filters: list[Filter] = []
        while self.current.kind == "keyword" and self.current.text == "filter":
            self.advance()
            var_tok = self.advance()
            if var_tok.kind != "var":
                raise QuerySyntaxError(var_tok.line, var_tok.col, "expected a ?variable after filter")
            op_tok = self.advance()
            op_text = _COMPARATOR_ALIASES.get(op_tok.text, op_tok.text)
            if op_tok.kind != "punct" or op_text not in COMPARATORS:
                raise QuerySyntaxError(op_tok.line, op_tok.col, "expected a comparator")
            value_tok = self.advance()
            if value_tok.kind not in ("string", "int"):
                raise QuerySyntaxError(value_tok.line, value_tok.col, "expected a literal filter value")
            filters.append(
                Filter(Variable(var_tok.text[1:]), op_text, self.parse_literal_token(value_tok))
            )
        if self.current.kind != "eof":
            raise self.error(f"unexpected trailing input {self.current.text!r}")
        if not patterns:
            raise self.error("expected at least one pattern")
        try:
            return QueryAst(tuple(select_vars), tuple(patterns), tuple(filters))
        except ValueError as exc:
            raise self.error(str(exc)) from None


def parse_query(text: str, prefixes: Mapping[str, str] | None = None) -> QueryAst:
    """Parse query text, expanding prefixed and bare names via ``prefixes``."""
    return _Parser(_tokenize(text), prefixes if prefixes is not None else DEFAULT_PREFIXES).parse()


def print_query(ast: QueryAst) -> str:
    """Canonical text of an AST (full IRIs); parses back to the same AST."""

    def term(t: PatternTerm) -> str:
        if isinstance(t, Variable):
            return f"?{t.name}"
        if isinstance(t, Iri):
            return f"<{t.value}>"
        if t.datatype == "integer":
            return t.lexical
        escaped = t.lexical.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\r", "\\r")
        quoted = f'"{escaped}"'
        return quoted if t.datatype == "string" else f"{quoted}^^{t.datatype}"

    parts = ["select " + " ".join(f"?{v.name}" for v in ast.select_vars), "where {"]
    for s, p, o in ast.patterns:
        parts.append(f"  {term(s)} {term(p)} {term(o)} .")
    parts.append("}")
    for f in ast.filters:
        parts.append(f"filter ?{f.variable.name} {f.comparator} {term(f.value)}")
    return "\n".join(parts) + "\n"


# -- evaluation ------------------------------------------------------------------


def _match_pattern(pattern: Pattern, graph: Graph) -> list[dict[str, Node]]:
    bindings: list[dict[str, Node]] = []
    for triple in graph:
        binding: dict[str, Node] = {}
        ok = True
        for term, value in zip(pattern, (triple.subject, triple.predicate, triple.object)):
            if isinstance(term, Variable):
                if term.name in binding and binding[term.name] != value:
                    ok = False
                    break
                binding[term.name] = value
            elif term != value:
                ok = False
                break
        if ok:
            bindings.append(binding)
    return bindings


def _join(left: list[dict[str, Node]], right: list[dict[str, Node]]) -> list[dict[str, Node]]:
    if not left or not right:
        return []
    shared = sorted(set(left[0]) & set(right[0]))
    index: dict[tuple, list[dict[str, Node]]] = {}
    for rb in right:
        index.setdefault(tuple(rb[v] for v in shared), []).append(rb)
    out: list[dict[str, Node]] = []
    for lb in left:
        for rb in index.get(tuple(lb[v] for v in shared), []):
            merged = dict(lb)
            merged.update(rb)
            out.append(merged)
    return out


def _filter_holds(f: Filter, binding: Mapping[str, Node]) -> bool:
    bound = binding[f.variable.name]
    if isinstance(bound, Iri):
        return False
    numeric = ("integer", "year")
    if (bound.datatype in numeric) != (f.value.datatype in numeric):
        return False
    if bound.datatype in numeric:
        return _OPS[f.comparator](int(bound.lexical), int(f.value.lexical))
    return _OPS[f.comparator](bound.lexical, f.value.lexical)


def evaluate_query(ast: QueryAst, graph: Graph) -> BindingTable:
    """Evaluate with set semantics; rows come out in canonical text order."""
    solutions = _match_pattern(ast.patterns[0], graph)
    for pattern in ast.patterns[1:]:
        solutions = _join(solutions, _match_pattern(pattern, graph))
    solutions = [b for b in solutions if all(_filter_holds(f, b) for f in ast.filters)]
    projected = {tuple(b[v.name] for v in ast.select_vars) for b in solutions}
    rows = sorted(projected, key=lambda row: tuple(node_text(c) for c in row))
    return BindingTable(
        variables=tuple(v.name for v in ast.select_vars),
        rows=tuple(rows),
    )
