"""Music metadata records: parsing, curation and delimited-text export.

Records travel as UTF-8 comma-separated text with a mandatory header row.
The recognized columns are EuropeanaID, Title, Year, Duration, Composer,
DateOfBirth, DateOfDeath, Biography, Publisher, Place, AudioUrl plus the
enrichment columns Genre, Emotion, Instrument and Comments. Enrichment
cells are ";"-separated term labels normalized lexicographically so that
exports are byte-deterministic.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import MusekbError
from .vocabulary import Category, Vocabulary, builtin_vocabularies, resolve_term


class MissingIdentifier(MusekbError):
    code = "MissingIdentifier"


class MalformedDuration(MusekbError):
    code = "MalformedDuration"


class MalformedDate(MusekbError):
    code = "MalformedDate"


class FileUnreadable(MusekbError):
    code = "FileUnreadable"


class EmptyDataset(MusekbError):
    code = "EmptyDataset"


class WriteFailure(MusekbError):
    code = "WriteFailure"


@dataclass(frozen=True)
class PartialDate:
    """An ISO-8601 date that may stop at year or month precision."""

    year: int
    month: int | None = None
    day: int | None = None

    def __post_init__(self):
        if not 0 <= self.year <= 9999:
            raise ValueError(f"year out of range: {self.year}")
        if self.month is None and self.day is not None:
            raise ValueError("day without month")
        if self.month is not None:
            if self.day is not None:
                _dt.date(self.year, self.month, self.day)  # validates ranges
            elif not 1 <= self.month <= 12:
                raise ValueError(f"month out of range: {self.month}")

    @classmethod
    def parse(cls, text: str) -> "PartialDate":
        m = re.fullmatch(r"(\d{1,4})(?:-(\d{2})(?:-(\d{2}))?)?", text.strip())
        if not m:
            raise ValueError(f"not an ISO date or year: {text!r}")
        return cls(
            year=int(m.group(1)),
            month=int(m.group(2)) if m.group(2) else None,
            day=int(m.group(3)) if m.group(3) else None,
        )

    def sort_key(self) -> tuple[int, int, int]:
        return (self.year, self.month or 0, self.day or 0)

    def __str__(self) -> str:
        out = f"{self.year:04d}"
        if self.month is not None:
            out += f"-{self.month:02d}"
            if self.day is not None:
                out += f"-{self.day:02d}"
        return out


@dataclass
class TrackRecord:
    """One music item: the flat metadata projection plus enrichment slots."""

    europeana_id: str
    title: str | None = None
    year: int | None = None
    duration_ms: int | None = None
    composer: str | None = None
    composer_birth: PartialDate | None = None
    composer_death: PartialDate | None = None
    biography: str | None = None
    publisher: str | None = None
    place: str | None = None
    audio_url: str | None = None
    genres: set[str] = field(default_factory=set)
    emotions: set[str] = field(default_factory=set)
    instruments: set[str] = field(default_factory=set)
    comments: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.europeana_id:
            raise ValueError("europeana_id must be non-empty")
        if self.duration_ms is not None and self.duration_ms < 0:
            raise ValueError("duration_ms must be non-negative")
        if (
            self.composer_birth is not None
            and self.composer_death is not None
            and self.composer_death.sort_key() < self.composer_birth.sort_key()
        ):
            raise ValueError("composer death precedes birth")

    def tags(self, category: Category) -> set[str]:
        return {
            Category.GENRE: self.genres,
            Category.EMOTION: self.emotions,
            Category.INSTRUMENT: self.instruments,
        }[category]


# Rejection reason codes used by apply_curation.
DURATION_EXCEEDED = "DurationExceeded"
MISSING_REQUIRED_FIELD = "MissingRequiredField"

_RECORD_FIELDS = {
    "europeana_id",
    "title",
    "year",
    "duration_ms",
    "composer",
    "composer_birth",
    "composer_death",
    "biography",
    "publisher",
    "place",
    "audio_url",
}


@dataclass(frozen=True)
class CurationPolicy:
    max_duration_ms: int = 360_000
    required_fields: frozenset[str] = frozenset({"europeana_id", "title", "composer", "duration_ms"})

    def __post_init__(self):
        if self.max_duration_ms <= 0:
            raise ValueError("max_duration_ms must be positive")
        unknown = set(self.required_fields) - _RECORD_FIELDS
        if unknown:
            raise ValueError(f"required_fields not record fields: {sorted(unknown)}")


@dataclass(frozen=True)
class Rejection:
    record: TrackRecord
    reasons: tuple[str, ...]


@dataclass
class LoadResult:
    """Parsed records plus the per-row errors that did not abort the batch."""

    records: list[TrackRecord]
    errors: list[tuple[int, MusekbError]]

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


COLUMNS = [
    "EuropeanaID",
    "Title",
    "Year",
    "Duration",
    "Composer",
    "DateOfBirth",
    "DateOfDeath",
    "Biography",
    "Publisher",
    "Place",
    "AudioUrl",
    "Genre",
    "Emotion",
    "Instrument",
    "Comments",
]

_CATEGORY_COLUMNS = {
    "Genre": Category.GENRE,
    "Emotion": Category.EMOTION,
    "Instrument": Category.INSTRUMENT,
}


def _cell(row: Mapping[str, str | None], column: str) -> str | None:
    value = row.get(column)
    if value is None:
        return None
    value = value.strip()
    return value or None


def _parse_date(raw: str | None, column: str) -> PartialDate | None:
    if raw is None:
        return None
    try:
        return PartialDate.parse(raw)
    except ValueError as exc:
        raise MalformedDate(f"{column}: {exc}") from None


def parse_record(
    row: Mapping[str, str | None] | Sequence[str] | str,
    vocabularies: Mapping[Category, Vocabulary] | None = None,
) -> TrackRecord:
    """Build a TrackRecord from one row.

    Accepts a header-keyed mapping, a cell sequence in COLUMNS order, or a
    raw comma-separated line. Empty cells become absent fields; surrounding
    whitespace is trimmed. Unrecognized columns are ignored.
    """
    if isinstance(row, str):
        row = next(csv.reader([row]))
    if not isinstance(row, Mapping):
        row = dict(zip(COLUMNS, row))
    vocabs = vocabularies or builtin_vocabularies()
    europeana_id = _cell(row, "EuropeanaID")
    if not europeana_id:
        raise MissingIdentifier("row lacks an EuropeanaID value")

    raw_duration = _cell(row, "Duration")
    duration_ms = None
    if raw_duration is not None:
        try:
            duration_ms = int(raw_duration)
        except ValueError:
            raise MalformedDuration(f"not an integer: {raw_duration!r}") from None
        if duration_ms < 0:
            raise MalformedDuration(f"negative duration: {duration_ms}")

    raw_year = _cell(row, "Year")
    year = None
    if raw_year is not None:
        try:
            year = int(raw_year)
        except ValueError:
            raise MalformedDate(f"Year: not an integer: {raw_year!r}") from None

    birth = _parse_date(_cell(row, "DateOfBirth"), "DateOfBirth")
    death = _parse_date(_cell(row, "DateOfDeath"), "DateOfDeath")
    if birth is not None and death is not None and death.sort_key() < birth.sort_key():
        raise MalformedDate("DateOfDeath precedes DateOfBirth")

    enrichments: dict[Category, set[str]] = {}
    for column, category in _CATEGORY_COLUMNS.items():
        cell = _cell(row, column)
        ids: set[str] = set()
        if cell:
            for label in cell.split(";"):
                label = label.strip()
                if label:
                    ids.add(resolve_term(label, category, vocabs).id)
        enrichments[category] = ids

    comments_cell = row.get("Comments") or ""
    comments = split_comments(comments_cell)

    return TrackRecord(
        europeana_id=europeana_id,
        title=_cell(row, "Title"),
        year=year,
        duration_ms=duration_ms,
        composer=_cell(row, "Composer"),
        composer_birth=birth,
        composer_death=death,
        biography=_cell(row, "Biography"),
        publisher=_cell(row, "Publisher"),
        place=_cell(row, "Place"),
        audio_url=_cell(row, "AudioUrl"),
        genres=enrichments[Category.GENRE],
        emotions=enrichments[Category.EMOTION],
        instruments=enrichments[Category.INSTRUMENT],
        comments=comments,
    )


def apply_curation(
    records: Iterable[TrackRecord],
    policy: CurationPolicy | None = None,
) -> tuple[list[TrackRecord], list[Rejection]]:
    """Split records into kept and rejected under a curation policy.

    A record is rejected iff its duration exceeds the cutoff (strict) or any
    required field is absent; every rejection carries its reason codes.
    """
    policy = policy or CurationPolicy()
    kept: list[TrackRecord] = []
    rejected: list[Rejection] = []
    for record in records:
        reasons: list[str] = []
        if record.duration_ms is not None and record.duration_ms > policy.max_duration_ms:
            reasons.append(DURATION_EXCEEDED)
        for name in sorted(policy.required_fields):
            if getattr(record, name) is None:
                reasons.append(f"{MISSING_REQUIRED_FIELD}({name})")
        if reasons:
            rejected.append(Rejection(record=record, reasons=tuple(reasons)))
        else:
            kept.append(record)
    return kept, rejected


def load_dataset(
    path: str | Path,
    vocabularies: Mapping[Category, Vocabulary] | None = None,
) -> LoadResult:
    """Load all parseable records from a delimited-text file.

    Rows that fail to parse are reported in the result instead of aborting
    the batch; input order is preserved.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise FileUnreadable(str(exc)) from None
    with fh:
        reader = csv.DictReader(fh)
        records: list[TrackRecord] = []
        errors: list[tuple[int, MusekbError]] = []
        for line_no, row in enumerate(reader, start=2):
            try:
                records.append(parse_record(row, vocabularies))
            except MusekbError as exc:
                errors.append((line_no, exc))
    if not records and not errors:
        raise EmptyDataset(f"no data rows in {path}")
    return LoadResult(records=records, errors=errors)


def export_enriched(
    records: Iterable[TrackRecord],
    path: str | Path,
    vocabularies: Mapping[Category, Vocabulary] | None = None,
) -> None:
    """Write records as delimited text, one row each, enrichments included.

    Multi-valued cells hold term labels sorted lexicographically; the
    export re-imports to equal records via load_dataset.
    """
    vocabs = vocabularies or builtin_vocabularies()
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(render_enriched(records, vocabs))
    except OSError as exc:
        raise WriteFailure(str(exc)) from None


def render_enriched(
    records: Iterable[TrackRecord],
    vocabularies: Mapping[Category, Vocabulary] | None = None,
) -> str:
    vocabs = vocabularies or builtin_vocabularies()
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for record in records:
        writer.writerow(_record_row(record, vocabs))
    return out.getvalue()


def _record_row(record: TrackRecord, vocabs: Mapping[Category, Vocabulary]) -> list[str]:
    def opt(value) -> str:
        return "" if value is None else str(value)

    def tag_cell(category: Category) -> str:
        labels = sorted(_term_label(vocabs, category, tid) for tid in record.tags(category))
        return ";".join(labels)

    return [
        record.europeana_id,
        opt(record.title),
        opt(record.year),
        opt(record.duration_ms),
        opt(record.composer),
        opt(record.composer_birth),
        opt(record.composer_death),
        opt(record.biography),
        opt(record.publisher),
        opt(record.place),
        opt(record.audio_url),
        tag_cell(Category.GENRE),
        tag_cell(Category.EMOTION),
        tag_cell(Category.INSTRUMENT),
        join_comments(record.comments),
    ]


def _term_label(vocabs: Mapping[Category, Vocabulary], category: Category, term_id: str) -> str:
    term = vocabs[category].get(term_id)
    if term is None:
        from .vocabulary import UnknownTerm

        raise UnknownTerm(f"enrichment id {term_id!r} not in the {category.value} vocabulary")
    return term.label


def join_comments(comments: Iterable[str]) -> str:
    """Join free-text comments with ";", backslash-escaping separators."""
    return ";".join(c.replace("\\", "\\\\").replace(";", "\\;") for c in comments)


def split_comments(cell: str) -> list[str]:
    if not cell:
        return []
    parts: list[str] = []
    current: list[str] = []
    it = iter(cell)
    for ch in it:
        if ch == "\\":
            nxt = next(it, "")
            current.append(nxt)
        elif ch == ";":
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts
