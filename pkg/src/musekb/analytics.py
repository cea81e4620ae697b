"""Tag mining, comment sentiment and tag-overlap recommendation.

All functions are pure over immutable inputs. Tag transactions merge the
three enrichment categories of a record into one set, which is what the
pair-support statistics are computed on.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .catalog import TrackRecord
from .errors import MusekbError


class EmptyTransactionSet(MusekbError):
    code = "EmptyTransactionSet"


class EmptyCorpus(MusekbError):
    code = "EmptyCorpus"


@dataclass(frozen=True)
class TagTransaction:
    item_id: str
    tags: frozenset[str]


def transactions_from_records(records: Iterable[TrackRecord]) -> list[TagTransaction]:
    return [
        TagTransaction(
            item_id=r.europeana_id,
            tags=frozenset(r.genres | r.emotions | r.instruments),
        )
        for r in records
    ]


def pair_support(transactions: Sequence[TagTransaction], tag_a: str, tag_b: str) -> float:
    """Fraction of transactions containing both tags; symmetric in its arguments."""
    if not transactions:
        raise EmptyTransactionSet("no transactions")
    hits = sum(1 for t in transactions if tag_a in t.tags and tag_b in t.tags)
    return hits / len(transactions)


def frequent_pairs(
    transactions: Sequence[TagTransaction], min_support: float
) -> list[tuple[tuple[str, str], float]]:
    """All tag pairs with support >= min_support, by descending support.

    Candidate pairs are generated only from tags that individually meet the
    threshold; ties are ordered lexicographically by pair.
    """
    if not transactions:
        raise EmptyTransactionSet("no transactions")
    if not 0 < min_support <= 1:
        raise ValueError("min_support must be in (0, 1]")
    total = len(transactions)
    singles: dict[str, int] = {}
    for t in transactions:
        for tag in t.tags:
            singles[tag] = singles.get(tag, 0) + 1
    frequent_tags = {tag for tag, n in singles.items() if n / total >= min_support}
    counts: dict[tuple[str, str], int] = {}
    for t in transactions:
        present = sorted(tag for tag in t.tags if tag in frequent_tags)
        for pair in combinations(present, 2):
            counts[pair] = counts.get(pair, 0) + 1
    result = [
        (pair, n / total) for pair, n in counts.items() if n / total >= min_support
    ]
    result.sort(key=lambda item: (-item[1], item[0]))
    return result


# -- sentiment -------------------------------------------------------------------

DEFAULT_NEGATIONS = frozenset(
    """not no never none nothing nowhere neither nor cannot cant wont dont didnt
    doesnt isnt wasnt arent werent aint wouldnt couldnt shouldnt hardly barely
    scarcely without lacks lacking don didn doesn isn wasn aren weren ain wouldn
    couldn shouldn""".split()
)


@dataclass(frozen=True)
class SentimentLexicon:
    """Token valences in [-4, 4] plus the tokens that negate what follows."""

    valences: Mapping[str, float]
    negations: frozenset[str] = DEFAULT_NEGATIONS

    def __post_init__(self):
        for token, valence in self.valences.items():
            if token != token.lower():
                raise ValueError(f"lexicon tokens must be lowercase: {token!r}")
            if not -4 <= valence <= 4:
                raise ValueError(f"valence out of range for {token!r}: {valence}")

    @classmethod
    def from_file(cls, path: str | Path, negations: frozenset[str] = DEFAULT_NEGATIONS) -> "SentimentLexicon":
        """Load "token,valence" lines."""
        valences: dict[str, float] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 2:
                    raise ValueError(f"lexicon line needs 2 fields, got {row!r}")
                valences[row[0].strip()] = float(row[1])
        return cls(valences=valences, negations=negations)


_default_lexicon: SentimentLexicon | None = None


def default_lexicon() -> SentimentLexicon:
    """The shipped mini-lexicon (~200 words)."""
    global _default_lexicon
    if _default_lexicon is None:
        with resources.as_file(resources.files("musekb").joinpath("data/lexicon.csv")) as path:
            _default_lexicon = SentimentLexicon.from_file(path)
    return _default_lexicon


_WORD = re.compile(r"[a-z]+")

_NORMALIZER = 15.0  # denominator constant of the bounded compound score
_NEGATION_WINDOW = 2


def tokenize(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def sentiment_score(text: str, lexicon: SentimentLexicon | None = None) -> float:
    """Bounded compound valence of a text, in (-1, 1).

    Token valences are summed, a negation within two tokens before a scored
    word flips its sign, and the sum s is squashed to s/sqrt(s^2 + 15).
    """
    lexicon = lexicon or default_lexicon()
    tokens = tokenize(text)
    total = 0.0
    for i, token in enumerate(tokens):
        valence = lexicon.valences.get(token)
        if valence is None:
            continue
        window = tokens[max(0, i - _NEGATION_WINDOW) : i]
        if any(t in lexicon.negations for t in window):
            valence = -valence
        total += valence
    if total == 0.0:
        return 0.0
    return total / math.sqrt(total * total + _NORMALIZER)


def track_sentiment(record: TrackRecord, lexicon: SentimentLexicon | None = None) -> float:
    """Arithmetic mean of the record's comment scores; 0 without comments."""
    if not record.comments:
        return 0.0
    scores = [sentiment_score(text, lexicon) for text in record.comments]
    return sum(scores) / len(scores)


# -- recommendation ----------------------------------------------------------------


@dataclass(frozen=True)
class SimilarityWeights:
    w_genre: float = 0.4
    w_emotion: float = 0.3
    w_instrument: float = 0.3

    def __post_init__(self):
        if min(self.w_genre, self.w_emotion, self.w_instrument) < 0:
            raise ValueError("weights must be non-negative")
        if abs(self.w_genre + self.w_emotion + self.w_instrument - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


DEFAULT_WEIGHTS = SimilarityWeights()


def _jaccard(a: set[str], b: set[str]) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def similarity(
    a: TrackRecord, b: TrackRecord, weights: SimilarityWeights = DEFAULT_WEIGHTS
) -> float:
    """Weighted per-category Jaccard overlap of two records' tags, in [0, 1]."""
    return (
        weights.w_genre * _jaccard(a.genres, b.genres)
        + weights.w_emotion * _jaccard(a.emotions, b.emotions)
        + weights.w_instrument * _jaccard(a.instruments, b.instruments)
    )


def recommend(
    seed: TrackRecord,
    corpus: Sequence[TrackRecord],
    k: int,
    weights: SimilarityWeights = DEFAULT_WEIGHTS,
) -> list[tuple[TrackRecord, float]]:
    """Top-k corpus records by similarity to the seed, seed itself excluded."""
    if not corpus:
        raise EmptyCorpus("no records to recommend from")
    if k < 1:
        raise ValueError("k must be at least 1")
    candidates = [r for r in corpus if r.europeana_id != seed.europeana_id]
    scored = [(r, similarity(seed, r, weights)) for r in candidates]
    scored.sort(key=lambda item: (-item[1], item[0].europeana_id))
    return scored[:k]
