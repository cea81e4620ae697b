"""Triple graph compiled from enriched records, with class axioms and I/O.

Graphs are sets of (subject, predicate, object) triples plus a prefix map.
The text form is one triple per line, IRIs angle-bracketed, literals quoted
with backslash escapes and an optional ``^^integer`` / ``^^year`` datatype
suffix; lines are sorted so equal graphs serialize to identical bytes.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence, Union
from urllib.parse import quote

from . import namespaces as ns
from .catalog import TrackRecord, WriteFailure
from .errors import MusekbError
from .vocabulary import Category, Vocabulary, builtin_vocabularies


class DuplicateTrackId(MusekbError):
    code = "DuplicateTrackId"


class UnknownPredicate(MusekbError):
    code = "UnknownPredicate"


class GraphSyntaxError(MusekbError):
    code = "GraphSyntaxError"

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


_IRI_FORBIDDEN = set(' \t\n\r<>"')


@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self):
        if not self.value:
            raise ValueError("IRI must be non-empty")
        if any(c in _IRI_FORBIDDEN for c in self.value):
            raise ValueError(f"IRI contains forbidden characters: {self.value!r}")
        if ":" not in self.value:
            raise ValueError(f"IRI lacks a scheme separator: {self.value!r}")


DATATYPES = ("string", "integer", "year")


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str = "string"

    def __post_init__(self):
        if self.datatype not in DATATYPES:
            raise ValueError(f"unknown literal datatype: {self.datatype!r}")
        if self.datatype in ("integer", "year"):
            int(self.lexical)


Node = Union[Iri, Literal]


@dataclass(frozen=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: Node


class Graph:
    """A duplicate-free triple set with a namespace prefix map."""

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        prefixes: Mapping[str, str] | None = None,
    ):
        self._triples: set[Triple] = set(triples)
        self.prefixes: dict[str, str] = dict(prefixes or {})

    def add(self, triple: Triple) -> None:
        self._triples.add(triple)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self):
        return iter(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self._triples == other._triples

    def triples(
        self,
        subject: Iri | None = None,
        predicate: Iri | None = None,
        object: Node | None = None,
    ) -> list[Triple]:
        return [
            t
            for t in self._triples
            if (subject is None or t.subject == subject)
            and (predicate is None or t.predicate == predicate)
            and (object is None or t.object == object)
        ]

    def subjects(self) -> set[Iri]:
        return {t.subject for t in self._triples}

    def predicates(self) -> set[Iri]:
        return {t.predicate for t in self._triples}

    def terms(self) -> set[Node]:
        out: set[Node] = set()
        for t in self._triples:
            out.add(t.subject)
            out.add(t.predicate)
            out.add(t.object)
        return out

    def copy(self) -> "Graph":
        return Graph(self._triples, self.prefixes)


# -- schema -------------------------------------------------------------------

RDF_TYPE = Iri(ns.RDF_TYPE)
SONG = Iri(ns.BASE + "Song")
COMPOSER = Iri(ns.BASE + "Composer")

EUROPEANA_ID = Iri(ns.BASE + "europeanaId")
TITLE = Iri(ns.BASE + "title")
YEAR = Iri(ns.BASE + "year")
DURATION = Iri(ns.BASE + "duration")
PUBLISHER = Iri(ns.BASE + "publisher")
PLACE = Iri(ns.BASE + "place")
AUDIO_URL = Iri(ns.BASE + "audioUrl")
HAS_COMPOSER = Iri(ns.BASE + "hasComposer")
HAS_GENRE = Iri(ns.BASE + "hasGenre")
HAS_EMOTION = Iri(ns.BASE + "hasEmotion")
HAS_INSTRUMENT = Iri(ns.BASE + "hasInstrument")
HAS_COMMENT = Iri(ns.BASE + "hasComment")
NAME = Iri(ns.BASE + "name")
BIRTH_DATE = Iri(ns.BASE + "birthDate")
DEATH_DATE = Iri(ns.BASE + "deathDate")
BIOGRAPHY = Iri(ns.BASE + "biography")
ENRICHED_FROM = Iri(ns.BASE + "enrichedFrom")

TAG_PREDICATES = {
    Category.GENRE: HAS_GENRE,
    Category.EMOTION: HAS_EMOTION,
    Category.INSTRUMENT: HAS_INSTRUMENT,
}

DEFAULT_PREFIXES = {
    "": ns.BASE,
    "rdf": ns.RDF_NS,
    "track": ns.TRACK_BASE,
    "composer": ns.COMPOSER_BASE,
    "genre": ns.vocab_ns(Category.GENRE.value),
    "emotion": ns.vocab_ns(Category.EMOTION.value),
    "instrument": ns.vocab_ns(Category.INSTRUMENT.value),
}


def track_iri(europeana_id: str) -> Iri:
    return Iri(ns.TRACK_BASE + quote(europeana_id, safe=""))


def composer_iri(name: str) -> Iri:
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return Iri(ns.COMPOSER_BASE + (quote(slug, safe="") or quote(name, safe="")))


def _date_literal(value) -> Literal:
    text = str(value)
    if value.month is None:
        return Literal(text, "year")
    return Literal(text, "string")


def build_graph(
    records: Sequence[TrackRecord],
    vocabularies: Mapping[Category, Vocabulary] | None = None,
) -> Graph:
    """Compile enriched records into a triple graph with deterministic IRIs."""
    vocabs = vocabularies or builtin_vocabularies()
    seen: set[str] = set()
    graph = Graph(prefixes=DEFAULT_PREFIXES)
    for record in records:
        if record.europeana_id in seen:
            raise DuplicateTrackId(f"duplicate europeana_id {record.europeana_id!r}")
        seen.add(record.europeana_id)
        track = track_iri(record.europeana_id)
        graph.add(Triple(track, RDF_TYPE, SONG))
        graph.add(Triple(track, EUROPEANA_ID, Literal(record.europeana_id)))
        if record.title is not None:
            graph.add(Triple(track, TITLE, Literal(record.title)))
        if record.year is not None:
            graph.add(Triple(track, YEAR, Literal(str(record.year), "year")))
        if record.duration_ms is not None:
            graph.add(Triple(track, DURATION, Literal(str(record.duration_ms), "integer")))
        if record.publisher is not None:
            graph.add(Triple(track, PUBLISHER, Literal(record.publisher)))
        if record.place is not None:
            graph.add(Triple(track, PLACE, Literal(record.place)))
        if record.audio_url is not None:
            graph.add(Triple(track, AUDIO_URL, Literal(record.audio_url)))
        if record.composer is not None:
            comp = composer_iri(record.composer)
            graph.add(Triple(track, HAS_COMPOSER, comp))
            graph.add(Triple(comp, RDF_TYPE, COMPOSER))
            graph.add(Triple(comp, NAME, Literal(record.composer)))
            if record.composer_birth is not None:
                graph.add(Triple(comp, BIRTH_DATE, _date_literal(record.composer_birth)))
            if record.composer_death is not None:
                graph.add(Triple(comp, DEATH_DATE, _date_literal(record.composer_death)))
            if record.biography is not None:
                graph.add(Triple(comp, BIOGRAPHY, Literal(record.biography)))
        for category, predicate in TAG_PREDICATES.items():
            for term_id in sorted(record.tags(category)):
                term = vocabs[category].get(term_id)
                if term is None:
                    from .vocabulary import UnknownTerm

                    raise UnknownTerm(f"enrichment id {term_id!r} not in {category.value} vocabulary")
                graph.add(Triple(track, predicate, Iri(term.uri)))
        for comment in record.comments:
            graph.add(Triple(track, HAS_COMMENT, Literal(comment)))
    return graph


# -- class axioms ---------------------------------------------------------------


@dataclass(frozen=True)
class HasValue:
    predicate: Iri
    object: Iri


@dataclass(frozen=True)
class YearRange:
    predicate: Iri
    min_year: int
    max_year: int


Condition = Union[HasValue, YearRange]


@dataclass(frozen=True)
class ClassAxiom:
    """Conjunctive class definition: members get a type triple when materialized."""

    class_iri: Iri
    conjuncts: tuple[Condition, ...]

    def __post_init__(self):
        if not self.conjuncts:
            raise ValueError("axiom needs at least one conjunct")


def literal_year(node: Node) -> int | None:
    """Extract a calendar year from a literal, if any."""
    if not isinstance(node, Literal):
        return None
    if node.datatype in ("year", "integer"):
        return int(node.lexical)
    m = re.match(r"(\d{4})(?:-|$)", node.lexical)
    return int(m.group(1)) if m else None


def _predicate_known(graph: Graph, predicate: Iri) -> bool:
    if any(predicate.value.startswith(base) for base in graph.prefixes.values()):
        return True
    return predicate in graph.predicates()


def _satisfies(graph: Graph, entity: Iri, condition: Condition) -> bool:
    if isinstance(condition, HasValue):
        return Triple(entity, condition.predicate, condition.object) in graph
    for t in graph.triples(subject=entity, predicate=condition.predicate):
        year = literal_year(t.object)
        if year is not None and condition.min_year <= year <= condition.max_year:
            return True
    return False


def materialize_axioms(graph: Graph, axioms: Sequence[ClassAxiom]) -> Graph:
    """Add a type triple for every entity satisfying all conjuncts of an axiom.

    The input graph is untouched; re-running on the output is a no-op.
    """
    for axiom in axioms:
        if axiom.class_iri in graph.predicates():
            raise ValueError(f"axiom class {axiom.class_iri.value!r} is used as a predicate")
        for condition in axiom.conjuncts:
            if not _predicate_known(graph, condition.predicate):
                raise UnknownPredicate(condition.predicate.value)
    result = graph.copy()
    for axiom in axioms:
        for entity in sorted(graph.subjects(), key=lambda i: i.value):
            if all(_satisfies(graph, entity, c) for c in axiom.conjuncts):
                result.add(Triple(entity, RDF_TYPE, axiom.class_iri))
    return result


def axiom_members(graph: Graph, axiom: ClassAxiom) -> set[Iri]:
    """Entities typed as the axiom's class (on a materialized graph)."""
    return {t.subject for t in graph.triples(predicate=RDF_TYPE, object=axiom.class_iri)}


# -- external facts -------------------------------------------------------------


class FactResolver(Protocol):
    source: str

    def resolve(self, entity: Iri) -> list[tuple[Iri, Node]] | None:
        """Facts about an entity, or None when the entity is unresolvable."""


class FixtureResolver:
    """Offline resolver backed by ``entity_iri,predicate_iri,object`` lines.

    Objects containing "://" are read as IRIs, all-digit objects as integer
    literals, anything else as string literals.
    """

    def __init__(self, path: str | Path | None = None, source: str = "fixture"):
        self.source = source
        self._facts: dict[str, list[tuple[Iri, Node]]] = {}
        if path is not None:
            with open(path, newline="", encoding="utf-8") as fh:
                for row in csv.reader(fh):
                    if not row or (len(row) == 1 and not row[0].strip()):
                        continue
                    if len(row) != 3:
                        raise ValueError(f"fixture line needs 3 fields, got {row!r}")
                    self.add(row[0].strip(), row[1].strip(), row[2].strip())

    def add(self, entity: str, predicate: str, obj: str) -> None:
        node: Node
        if "://" in obj:
            node = Iri(obj)
        elif re.fullmatch(r"-?\d+", obj):
            node = Literal(obj, "integer")
        else:
            node = Literal(obj)
        self._facts.setdefault(entity, []).append((Iri(predicate), node))

    def resolve(self, entity: Iri) -> list[tuple[Iri, Node]] | None:
        return self._facts.get(entity.value)


@dataclass
class IntegrationReport:
    enriched: list[Iri] = field(default_factory=list)
    skipped: list[tuple[Iri, str]] = field(default_factory=list)
    added_triples: int = 0

    def lines(self) -> list[str]:
        out = [f"enriched {i.value}" for i in self.enriched]
        out += [f"skipped {i.value}: {reason}" for i, reason in self.skipped]
        return out


def integrate_external(
    graph: Graph,
    resolver: FactResolver,
    entities: Sequence[Iri],
) -> tuple[Graph, IntegrationReport]:
    """Attach resolver facts to graph entities, marking their provenance.

    Entities the resolver cannot answer for (or that are absent from the
    graph) are reported, never raised. Each enriched entity gets one
    provenance triple naming the resolver source.
    """
    result = graph.copy()
    report = IntegrationReport()
    known = graph.terms()
    for entity in entities:
        if entity not in known:
            report.skipped.append((entity, "not in graph"))
            continue
        facts = resolver.resolve(entity)
        if facts is None:
            report.skipped.append((entity, "unresolvable"))
            continue
        before = len(result)
        for predicate, obj in facts:
            result.add(Triple(entity, predicate, obj))
        result.add(Triple(entity, ENRICHED_FROM, Literal(resolver.source)))
        report.enriched.append(entity)
        report.added_triples += len(result) - before
    return result, report


# -- text form --------------------------------------------------------------------

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r"}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in text)


def node_text(node: Node) -> str:
    if isinstance(node, Iri):
        return f"<{node.value}>"
    quoted = f'"{_escape(node.lexical)}"'
    if node.datatype == "string":
        return quoted
    return f"{quoted}^^{node.datatype}"


def triple_line(triple: Triple) -> str:
    return f"{node_text(triple.subject)} {node_text(triple.predicate)} {node_text(triple.object)} ."


def render_graph(graph: Graph) -> str:
    lines = [f"@prefix {p}: <{base}> ." for p, base in sorted(graph.prefixes.items())]
    lines += sorted(triple_line(t) for t in graph)
    return "\n".join(lines) + ("\n" if lines else "")


def serialize_graph(graph: Graph, path: str | Path) -> None:
    """Write the canonical text form: equal graphs produce identical bytes."""
    try:
        Path(path).write_text(render_graph(graph), encoding="utf-8")
    except OSError as exc:
        raise WriteFailure(str(exc)) from None


_PREFIX_RE = re.compile(r"@prefix\s+([A-Za-z][\w-]*)?:\s+<([^<>\s]*)>\s+\.\s*$")
_TOKEN_RE = re.compile(
    r"""\s*(?:
        <(?P<iri>[^<>\s]*)>
      | "(?P<lit>(?:[^"\\\n\r]|\\.)*)"(?:\^\^(?P<dt>[a-z]+))?
      | (?P<dot>\.)
    )""",
    re.VERBOSE,
)


def _unescape(text: str, line_no: int) -> str:
    out: list[str] = []
    it = iter(text)
    for ch in it:
        if ch != "\\":
            out.append(ch)
            continue
        code = next(it, None)
        if code is None or code not in _UNESCAPES:
            raise GraphSyntaxError(line_no, f"bad escape sequence \\{code or ''}")
        out.append(_UNESCAPES[code])
    return "".join(out)


def _parse_line(line: str, line_no: int) -> Triple:
    nodes: list[Node] = []
    pos = 0
    dot = False
    while pos < len(line):
        if line[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(line, pos)
        if not m:
            raise GraphSyntaxError(line_no, f"unparseable at column {pos + 1}")
        if m.group("dot"):
            dot = True
            pos = m.end()
            if line[pos:].strip():
                raise GraphSyntaxError(line_no, "content after terminating period")
            break
        if dot:
            raise GraphSyntaxError(line_no, "content after terminating period")
        if m.group("iri") is not None:
            try:
                nodes.append(Iri(m.group("iri")))
            except ValueError as exc:
                raise GraphSyntaxError(line_no, str(exc)) from None
        else:
            datatype = m.group("dt") or "string"
            if datatype not in DATATYPES:
                raise GraphSyntaxError(line_no, f"unknown datatype {datatype!r}")
            try:
                nodes.append(Literal(_unescape(m.group("lit"), line_no), datatype))
            except ValueError as exc:
                raise GraphSyntaxError(line_no, str(exc)) from None
        pos = m.end()
    if not dot:
        raise GraphSyntaxError(line_no, "missing terminating period")
    if len(nodes) != 3:
        raise GraphSyntaxError(line_no, f"expected 3 terms, found {len(nodes)}")
    subject, predicate, obj = nodes
    if not isinstance(subject, Iri):
        raise GraphSyntaxError(line_no, "subject must be an IRI")
    if not isinstance(predicate, Iri):
        raise GraphSyntaxError(line_no, "predicate must be an IRI")
    return Triple(subject, predicate, obj)


def parse_graph(path: str | Path) -> Graph:
    """Read the text form back; inverse of serialize_graph on the triple set."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise GraphSyntaxError(0, f"cannot read {path}: {exc}") from None
    graph = Graph()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.lstrip().startswith("@prefix"):
            m = _PREFIX_RE.match(line.strip())
            if not m:
                raise GraphSyntaxError(line_no, "malformed @prefix line")
            graph.prefixes[m.group(1) or ""] = m.group(2)
            continue
        graph.add(_parse_line(line, line_no))
    return graph
