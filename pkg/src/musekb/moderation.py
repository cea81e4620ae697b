"""Post-campaign filtering of raw annotations and merging into records.

Emotion and genre tags survive when their up/down vote difference is at
least the configured minimum (default 2) and they rank in the top two for
their item; instrument tags survive with a vote difference strictly above
the instrument cutoff (default 5) with no cap. Annotations of the same
term by different creators are merged (tallies summed) before ranking.
Comments are never filtered.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .campaign import AnnotationRow, CampaignExport
from .catalog import TrackRecord
from .errors import MusekbError
from .vocabulary import Category


class UnknownItemInExport(MusekbError):
    code = "UnknownItemInExport"


@dataclass(frozen=True)
class ModerationPolicy:
    top_k_emotion_genre: int = 2
    min_diff_emotion_genre: int = 2
    min_diff_instruments_exclusive: int = 5  # kept only when score is strictly above

    def __post_init__(self):
        if min(self.top_k_emotion_genre, self.min_diff_emotion_genre, self.min_diff_instruments_exclusive) < 0:
            raise ValueError("moderation parameters must be non-negative")


@dataclass(frozen=True)
class MergedTag:
    """Per-(item, term) consensus after summing tallies across creators."""

    term_id: str
    upvotes: int
    downvotes: int


def annotation_score(annotation) -> int:
    """Vote difference of an annotation-like object: upvotes minus downvotes."""
    return annotation.upvotes - annotation.downvotes


def merge_tallies(annotations: Iterable) -> list[MergedTag]:
    """Sum tallies per term across creators, in first-seen term order."""
    ups: dict[str, int] = defaultdict(int)
    downs: dict[str, int] = defaultdict(int)
    order: list[str] = []
    for a in annotations:
        if a.term_id not in ups:
            order.append(a.term_id)
        ups[a.term_id] += a.upvotes
        downs[a.term_id] += a.downvotes
    return [MergedTag(term_id=t, upvotes=ups[t], downvotes=downs[t]) for t in order]


def _rank_key(tag: MergedTag) -> tuple[int, int, str]:
    return (-annotation_score(tag), -tag.upvotes, tag.term_id)


def moderate_item(
    annotations_by_category: Mapping[Category, Sequence],
    policy: ModerationPolicy | None = None,
) -> dict[Category, list[MergedTag]]:
    """Apply the filtering rules to one item's annotations.

    Input annotations need term_id/upvotes/downvotes attributes and must all
    belong to the same item. Returns surviving merged tags per category in
    rank order.
    """
    policy = policy or ModerationPolicy()
    kept: dict[Category, list[MergedTag]] = {}
    for category, annotations in annotations_by_category.items():
        category = Category(category)
        merged = sorted(merge_tallies(annotations), key=_rank_key)
        if category is Category.INSTRUMENT:
            kept[category] = [
                t for t in merged if annotation_score(t) > policy.min_diff_instruments_exclusive
            ]
        else:
            survivors = [t for t in merged if annotation_score(t) >= policy.min_diff_emotion_genre]
            kept[category] = survivors[: policy.top_k_emotion_genre]
    return kept


@dataclass
class CategoryReport:
    kept: int = 0
    dropped: int = 0

    @property
    def kept_fraction(self) -> float:
        total = self.kept + self.dropped
        return self.kept / total if total else 0.0


@dataclass
class ModerationReport:
    categories: dict[str, CategoryReport]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["category", "kept", "dropped", "kept_fraction"])
        for name in sorted(self.categories):
            rep = self.categories[name]
            writer.writerow([name, rep.kept, rep.dropped, f"{rep.kept_fraction:.4f}"])
        return out.getvalue()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def moderate_campaign(
    export: CampaignExport,
    policy: ModerationPolicy | None = None,
    records: Sequence[TrackRecord] = (),
) -> tuple[list[TrackRecord], ModerationReport]:
    """Filter a raw campaign export and write survivors into the records.

    Every annotation row's item must resolve to a record. Returns new record
    objects (inputs untouched) with surviving term ids in their enrichment
    sets and all comments attached verbatim, plus kept/dropped counts per
    category at merged-tag granularity.
    """
    policy = policy or ModerationPolicy()
    by_id = {r.europeana_id: r for r in records}
    rows_by_item: dict[str, dict[Category, list[AnnotationRow]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for row in export.annotations:
        if row.item_id not in by_id:
            raise UnknownItemInExport(f"exported item {row.item_id!r} matches no record")
        rows_by_item[row.item_id][row.category].append(row)
    comments_by_item: dict[str, list[str]] = defaultdict(list)
    for comment in export.comments:
        if comment.item_id not in by_id:
            raise UnknownItemInExport(f"exported item {comment.item_id!r} matches no record")
        comments_by_item[comment.item_id].append(comment.text)

    report = ModerationReport(
        categories={c.value: CategoryReport() for c in Category} | {"comments": CategoryReport()}
    )
    enriched: list[TrackRecord] = []
    for record in records:
        grouped = rows_by_item.get(record.europeana_id, {})
        kept = moderate_item(grouped, policy)
        sets = {category: {t.term_id for t in kept.get(category, [])} for category in Category}
        for category in Category:
            total_terms = len({r.term_id for r in grouped.get(category, [])})
            report.categories[category.value].kept += len(sets[category])
            report.categories[category.value].dropped += total_terms - len(sets[category])
        comments = comments_by_item.get(record.europeana_id, [])
        report.categories["comments"].kept += len(comments)
        enriched.append(
            replace(
                record,
                genres=sets[Category.GENRE],
                emotions=sets[Category.EMOTION],
                instruments=sets[Category.INSTRUMENT],
                comments=list(comments),
            )
        )
    return enriched, report
