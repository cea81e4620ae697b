"""Controlled tag vocabularies: emotions, genres and instruments.

The three term lists are fixed at import time. Emotion terms additionally
carry a position on the valence/arousal unit circle, spaced at 45 degree
intervals counterclockwise starting from Pleasure on the positive valence
axis.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import MusekbError
from .namespaces import vocab_ns


class Category(str, Enum):
    EMOTION = "emotion"
    GENRE = "genre"
    INSTRUMENT = "instrument"


class UnknownTerm(MusekbError):
    code = "UnknownTerm"


class AmbiguousTerm(MusekbError):
    code = "AmbiguousTerm"


class NotAnEmotion(MusekbError):
    code = "NotAnEmotion"


@dataclass(frozen=True)
class Term:
    """A controlled tag with a stable id and an external concept URI."""

    id: str
    label: str
    category: Category
    uri: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("term id must be non-empty")
        if not self.label:
            raise ValueError("term label must be non-empty")
        if not _is_absolute_uri(self.uri):
            raise ValueError(f"term uri not an absolute URI: {self.uri!r}")


@dataclass(frozen=True)
class EmotionPosition:
    """Valence/arousal coordinates of an emotion term on the unit circle."""

    term_id: str
    valence: float
    arousal: float

    def __post_init__(self):
        if self.valence**2 + self.arousal**2 > 1 + 1e-9:
            raise ValueError("emotion position outside the unit circle")


@dataclass(frozen=True)
class Vocabulary:
    category: Category
    terms: tuple[Term, ...]

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def get(self, term_id: str) -> Term | None:
        for t in self.terms:
            if t.id == term_id:
                return t
        return None


def _is_absolute_uri(value: str) -> bool:
    if not value or any(c.isspace() for c in value):
        return False
    scheme, sep, rest = value.partition(":")
    return bool(sep) and scheme.isalpha() and bool(rest)


def _slug(label: str) -> str:
    return "-".join(part for part in label.lower().replace("-", " ").split()) or label.lower()


_EMOTION_LABELS = [
    "Arousal",
    "Joy",
    "Pleasure",
    "Calmness",
    "Boredom",
    "Sadness",
    "Anxiety",
    "Fear",
]

_GENRE_LABELS = [
    "Pop",
    "Rock",
    "Country",
    "Classical",
    "Opera",
    "Instrumental",
    "Funk",
    "Hip-hop",
    "Reggae",
    "Jazz",
    "Traditional Folk",
]

_INSTRUMENT_LABELS = [
    "Piano",
    "Electric Guitar",
    "Acoustic Guitar",
    "Drums",
    "Synthesizer",
    "Violin",
    "Harmonica",
    "Banjo",
    "Bass",
    "Woodwind",
    "Brass",
    "Orchestra",
]

# Counterclockwise placement on the circle, 45 degrees apart, starting from
# Pleasure at 0 degrees on the positive valence axis.
_CIRCUMPLEX_ORDER = [
    "pleasure",
    "joy",
    "arousal",
    "fear",
    "anxiety",
    "sadness",
    "boredom",
    "calmness",
]


def _make_vocabulary(category: Category, labels: Iterable[str]) -> Vocabulary:
    terms = tuple(
        Term(id=_slug(label), label=label, category=category, uri=f"{vocab_ns(category.value)}{_slug(label)}")
        for label in labels
    )
    return Vocabulary(category=category, terms=terms)


_BUILTIN: dict[Category, Vocabulary] = {
    Category.EMOTION: _make_vocabulary(Category.EMOTION, _EMOTION_LABELS),
    Category.GENRE: _make_vocabulary(Category.GENRE, _GENRE_LABELS),
    Category.INSTRUMENT: _make_vocabulary(Category.INSTRUMENT, _INSTRUMENT_LABELS),
}

_POSITIONS: dict[str, EmotionPosition] = {}
for _i, _term_id in enumerate(_CIRCUMPLEX_ORDER):
    _angle = math.radians(45.0 * _i)
    _POSITIONS[_term_id] = EmotionPosition(
        term_id=_term_id,
        valence=round(math.cos(_angle), 12),
        arousal=round(math.sin(_angle), 12),
    )


def builtin_vocabularies() -> dict[Category, Vocabulary]:
    """Return the three builtin vocabularies keyed by category."""
    return dict(_BUILTIN)


def resolve_term(
    label_or_id: str,
    category: Category,
    vocabularies: Mapping[Category, Vocabulary] | None = None,
) -> Term:
    """Find the unique term matching ``label_or_id`` (case-insensitive) in a category."""
    vocab = (vocabularies or _BUILTIN)[Category(category)]
    needle = label_or_id.strip().casefold()
    matches = [t for t in vocab.terms if t.id.casefold() == needle or t.label.casefold() == needle]
    if not matches:
        raise UnknownTerm(f"no {category.value} term matching {label_or_id!r}")
    if len({t.id for t in matches}) > 1:
        raise AmbiguousTerm(f"{label_or_id!r} matches several {category.value} terms")
    return matches[0]


def emotion_position(term: Term) -> EmotionPosition:
    """Return the circumplex coordinates of an emotion term."""
    if term.category is not Category.EMOTION:
        raise NotAnEmotion(f"{term.id!r} is a {term.category.value} term")
    try:
        return _POSITIONS[term.id]
    except KeyError:
        raise NotAnEmotion(f"no circumplex position configured for {term.id!r}") from None


def load_vocabulary_file(
    path: str | Path,
    base: Mapping[Category, Vocabulary] | None = None,
) -> dict[Category, Vocabulary]:
    """Apply a vocabulary-override file on top of the builtin lists.

    One term per line: ``category,id,label,uri``. A line whose id already
    exists in its category replaces that term (e.g. to swap in real concept
    URIs); a new id is appended to the category's list.
    """
    result = {cat: list(vocab.terms) for cat, vocab in (base or _BUILTIN).items()}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise ValueError(f"vocabulary line needs 4 fields, got {row!r}")
            category = Category(row[0].strip().lower())
            term = Term(id=row[1].strip(), label=row[2].strip(), category=category, uri=row[3].strip())
            terms = result.setdefault(category, [])
            for i, existing in enumerate(terms):
                if existing.id == term.id:
                    terms[i] = term
                    break
            else:
                terms.append(term)
    return {cat: Vocabulary(category=cat, terms=tuple(terms)) for cat, terms in result.items()}


def all_term_ids(vocabularies: Mapping[Category, Vocabulary] | None = None) -> set[str]:
    vocabs = vocabularies or _BUILTIN
    return {t.id for vocab in vocabs.values() for t in vocab.terms}
