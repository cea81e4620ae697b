"""Annotation campaigns: contributions from identified users over batched items.

The store keeps campaigns, annotations, votes and comments in memory behind
a lock (per-annotation tally updates are atomic, exports are consistent
snapshots) and persists to a single JSON file.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .errors import MusekbError
from .vocabulary import Category, Vocabulary, builtin_vocabularies

MAX_COMMENT_LENGTH = 2000
DEFAULT_BATCH_COUNT = 8
DEFAULT_CAMPAIGN_DAYS = 18


class CampaignClosed(MusekbError):
    code = "CampaignClosed"


class UnknownCampaign(MusekbError):
    code = "UnknownCampaign"


class UnknownItem(MusekbError):
    code = "UnknownItem"


class DuplicateAnnotation(MusekbError):
    code = "DuplicateAnnotation"


class UnknownAnnotation(MusekbError):
    code = "UnknownAnnotation"


class SelfVote(MusekbError):
    code = "SelfVote"


class EmptyComment(MusekbError):
    code = "EmptyComment"


class CommentTooLong(MusekbError):
    code = "CommentTooLong"


class TooFewItems(MusekbError):
    code = "TooFewItems"


class CorruptStore(MusekbError):
    code = "CorruptStore"


class VoteDirection(str, Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class Campaign:
    id: str
    title: str
    instructions: str
    item_ids: tuple[str, ...]
    start: datetime
    end: datetime
    batch_count: int = DEFAULT_BATCH_COUNT

    def __post_init__(self):
        if self.batch_count < 1:
            raise ValueError("batch_count must be positive")
        if self.batch_count > len(self.item_ids):
            raise TooFewItems(
                f"{len(self.item_ids)} items cannot fill {self.batch_count} batches"
            )
        if self.end <= self.start:
            raise ValueError("campaign end must be after start")

    def is_open(self, now: datetime) -> bool:
        return self.start <= now <= self.end


@dataclass
class Annotation:
    id: str
    campaign_id: str
    item_id: str
    category: Category
    term_id: str
    creator: str
    created_at: datetime
    upvotes: int = 0
    downvotes: int = 0


@dataclass(frozen=True)
class Vote:
    annotation_id: str
    voter: str
    direction: VoteDirection
    cast_at: datetime


@dataclass(frozen=True)
class Comment:
    id: str
    item_id: str
    author: str
    text: str
    created_at: datetime

    def __post_init__(self):
        if not 1 <= len(self.text) <= MAX_COMMENT_LENGTH:
            raise ValueError("comment text must be 1..2000 characters")


@dataclass(frozen=True)
class AnnotationRow:
    """One exported tag: identity plus its live tallies."""

    item_id: str
    category: Category
    term_id: str
    upvotes: int
    downvotes: int
    creator: str


@dataclass(frozen=True)
class CommentRow:
    item_id: str
    author: str
    text: str
    created_at: datetime


@dataclass(frozen=True)
class CampaignExport:
    annotations: tuple[AnnotationRow, ...]
    comments: tuple[CommentRow, ...]


def partition_batches(campaign: Campaign) -> list[list[str]]:
    """Split campaign items into batches whose sizes differ by at most one.

    The shuffle is seeded from the campaign id, so the partition is
    reproducible and spreads contributions evenly across the collection.
    """
    items = list(campaign.item_ids)
    if len(items) < campaign.batch_count:
        raise TooFewItems(f"{len(items)} items for {campaign.batch_count} batches")
    seed = int.from_bytes(hashlib.sha256(campaign.id.encode("utf-8")).digest()[:8], "big")
    random.Random(seed).shuffle(items)
    base, extra = divmod(len(items), campaign.batch_count)
    batches: list[list[str]] = []
    cursor = 0
    for i in range(campaign.batch_count):
        size = base + (1 if i < extra else 0)
        batches.append(items[cursor : cursor + size])
        cursor += size
    return batches


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class CampaignStore:
    """In-memory campaign store with JSON persistence.

    All mutating calls are serialized by a lock, making per-annotation tally
    updates atomic under concurrent use; ``export_annotations`` and ``save``
    take the same lock and therefore see consistent snapshots.
    """

    def __init__(
        self,
        vocabularies: Mapping[Category, Vocabulary] | None = None,
        clock: Callable[[], datetime] | None = None,
    ):
        self._lock = threading.RLock()
        self._vocabularies = dict(vocabularies or builtin_vocabularies())
        self.clock = clock or _utc_now
        self._campaigns: dict[str, Campaign] = {}
        self._annotations: dict[str, Annotation] = {}
        self._annotation_keys: set[tuple[str, str, str]] = set()
        self._votes: dict[str, dict[str, Vote]] = {}
        self._comments: dict[str, Comment] = {}
        self._item_campaign: dict[str, str] = {}
        self._next_annotation = 1
        self._next_comment = 1

    # -- campaign lifecycle -------------------------------------------------

    def add_campaign(self, campaign: Campaign) -> Campaign:
        with self._lock:
            if campaign.id in self._campaigns:
                raise ValueError(f"campaign {campaign.id!r} already exists")
            self._campaigns[campaign.id] = campaign
            for item_id in campaign.item_ids:
                self._item_campaign.setdefault(item_id, campaign.id)
            return campaign

    def create_campaign(
        self,
        campaign_id: str,
        title: str,
        instructions: str,
        item_ids: Iterable[str],
        start: datetime | None = None,
        days: int = DEFAULT_CAMPAIGN_DAYS,
        batch_count: int = DEFAULT_BATCH_COUNT,
    ) -> Campaign:
        start = start or self.clock()
        campaign = Campaign(
            id=campaign_id,
            title=title,
            instructions=instructions,
            item_ids=tuple(item_ids),
            start=start,
            end=start + timedelta(days=days),
            batch_count=batch_count,
        )
        return self.add_campaign(campaign)

    def campaigns(self) -> list[Campaign]:
        with self._lock:
            return list(self._campaigns.values())

    def campaign(self, campaign_id: str) -> Campaign:
        try:
            return self._campaigns[campaign_id]
        except KeyError:
            raise UnknownCampaign(f"no campaign {campaign_id!r}") from None

    def _campaign_for_item(self, item_id: str) -> Campaign:
        campaign_id = self._item_campaign.get(item_id)
        if campaign_id is None:
            raise UnknownItem(f"item {item_id!r} is not part of any campaign")
        return self._campaigns[campaign_id]

    # -- contributions ------------------------------------------------------

    def submit_annotation(
        self, item_id: str, term_id: str, category: Category, user: str
    ) -> Annotation:
        """Store a new tag with zero tallies; duplicates by the same user are rejected."""
        with self._lock:
            campaign = self._campaign_for_item(item_id)
            if not campaign.is_open(self.clock()):
                raise CampaignClosed(f"campaign {campaign.id!r} is not accepting contributions")
            category = Category(category)
            term = self._vocabularies[category].get(term_id)
            if term is None:
                from .vocabulary import UnknownTerm

                raise UnknownTerm(f"no {category.value} term with id {term_id!r}")
            if (item_id, term_id, user) in self._annotation_keys:
                raise DuplicateAnnotation(f"{user!r} already tagged {item_id!r} with {term_id!r}")
            annotation = Annotation(
                id=f"ann-{self._next_annotation:06d}",
                campaign_id=campaign.id,
                item_id=item_id,
                category=category,
                term_id=term_id,
                creator=user,
                created_at=self.clock(),
            )
            self._next_annotation += 1
            self._annotations[annotation.id] = annotation
            self._annotation_keys.add((item_id, term_id, user))
            self._votes[annotation.id] = {}
            return annotation

    def cast_vote(
        self, annotation_id: str, voter: str, direction: VoteDirection
    ) -> tuple[int, int]:
        """Cast or replace ``voter``'s vote; returns the updated (up, down) tallies."""
        with self._lock:
            annotation = self._annotations.get(annotation_id)
            if annotation is None:
                raise UnknownAnnotation(f"no annotation {annotation_id!r}")
            if voter == annotation.creator:
                raise SelfVote("creators cannot vote on their own annotations")
            campaign = self._campaigns[annotation.campaign_id]
            if not campaign.is_open(self.clock()):
                raise CampaignClosed(f"campaign {campaign.id!r} is not accepting contributions")
            direction = VoteDirection(direction)
            votes = self._votes[annotation_id]
            previous = votes.get(voter)
            if previous is not None:
                if previous.direction is VoteDirection.UP:
                    annotation.upvotes -= 1
                else:
                    annotation.downvotes -= 1
            votes[voter] = Vote(
                annotation_id=annotation_id,
                voter=voter,
                direction=direction,
                cast_at=self.clock(),
            )
            if direction is VoteDirection.UP:
                annotation.upvotes += 1
            else:
                annotation.downvotes += 1
            return annotation.upvotes, annotation.downvotes

    def add_comment(self, item_id: str, author: str, text: str) -> Comment:
        with self._lock:
            campaign = self._campaign_for_item(item_id)
            if not campaign.is_open(self.clock()):
                raise CampaignClosed(f"campaign {campaign.id!r} is not accepting contributions")
            text = text.strip()
            if not text:
                raise EmptyComment("comment text is empty after trimming")
            if len(text) > MAX_COMMENT_LENGTH:
                raise CommentTooLong(f"comment exceeds {MAX_COMMENT_LENGTH} characters")
            comment = Comment(
                id=f"com-{self._next_comment:06d}",
                item_id=item_id,
                author=author,
                text=text,
                created_at=self.clock(),
            )
            self._next_comment += 1
            self._comments[comment.id] = comment
            return comment

    # -- views --------------------------------------------------------------

    def annotations_for_item(self, item_id: str) -> list[Annotation]:
        with self._lock:
            return [a for a in self._annotations.values() if a.item_id == item_id]

    def annotations_for_campaign(self, campaign_id: str) -> list[Annotation]:
        with self._lock:
            self.campaign(campaign_id)
            return [a for a in self._annotations.values() if a.campaign_id == campaign_id]

    def comments_for_item(self, item_id: str) -> list[Comment]:
        with self._lock:
            return [c for c in self._comments.values() if c.item_id == item_id]

    def vote_of(self, annotation_id: str, voter: str) -> VoteDirection | None:
        with self._lock:
            vote = self._votes.get(annotation_id, {}).get(voter)
            return vote.direction if vote else None

    def live_vote_tallies(self, annotation_id: str) -> tuple[int, int]:
        """Recount tallies from the vote records (consistency checks)."""
        with self._lock:
            votes = self._votes.get(annotation_id)
            if votes is None:
                raise UnknownAnnotation(f"no annotation {annotation_id!r}")
            up = sum(1 for v in votes.values() if v.direction is VoteDirection.UP)
            return up, len(votes) - up

    def leaderboard(self, campaign_id: str) -> list[tuple[str, int]]:
        """Users ranked by annotations created plus received vote balance.

        Ties are broken by earliest first contribution, then by user id.
        """
        with self._lock:
            campaign = self.campaign(campaign_id)
            items = set(campaign.item_ids)
            points: dict[str, int] = {}
            first_seen: dict[str, datetime] = {}

            def saw(user: str, at: datetime) -> None:
                points.setdefault(user, 0)
                if user not in first_seen or at < first_seen[user]:
                    first_seen[user] = at

            for annotation in self._annotations.values():
                if annotation.campaign_id != campaign_id:
                    continue
                saw(annotation.creator, annotation.created_at)
                points[annotation.creator] += 1 + annotation.upvotes - annotation.downvotes
                for vote in self._votes[annotation.id].values():
                    saw(vote.voter, vote.cast_at)
            for comment in self._comments.values():
                if comment.item_id in items:
                    saw(comment.author, comment.created_at)
            return sorted(
                points.items(), key=lambda kv: (-kv[1], first_seen[kv[0]], kv[0])
            )

    def export_annotations(self, campaign_id: str) -> CampaignExport:
        """Lossless, deterministically ordered snapshot of a campaign's contributions."""
        with self._lock:
            campaign = self.campaign(campaign_id)
            items = set(campaign.item_ids)
            rows = [
                AnnotationRow(
                    item_id=a.item_id,
                    category=a.category,
                    term_id=a.term_id,
                    upvotes=a.upvotes,
                    downvotes=a.downvotes,
                    creator=a.creator,
                )
                for a in self._annotations.values()
                if a.campaign_id == campaign_id
            ]
            rows.sort(key=lambda r: (r.item_id, r.category.value, r.term_id, r.creator))
            comments = [
                CommentRow(
                    item_id=c.item_id,
                    author=c.author,
                    text=c.text,
                    created_at=c.created_at,
                )
                for c in self._comments.values()
                if c.item_id in items
            ]
            comments.sort(key=lambda c: (c.item_id, c.created_at, c.author, c.text))
            return CampaignExport(annotations=tuple(rows), comments=tuple(comments))

    # -- persistence ----------------------------------------------------------

    def save(self, path: str | Path) -> None:
        with self._lock:
            payload = {
                "campaigns": [
                    {
                        "id": c.id,
                        "title": c.title,
                        "instructions": c.instructions,
                        "item_ids": list(c.item_ids),
                        "start": c.start.isoformat(),
                        "end": c.end.isoformat(),
                        "batch_count": c.batch_count,
                    }
                    for c in self._campaigns.values()
                ],
                "annotations": [
                    {
                        "id": a.id,
                        "campaign_id": a.campaign_id,
                        "item_id": a.item_id,
                        "category": a.category.value,
                        "term_id": a.term_id,
                        "creator": a.creator,
                        "created_at": a.created_at.isoformat(),
                        "upvotes": a.upvotes,
                        "downvotes": a.downvotes,
                    }
                    for a in self._annotations.values()
                ],
                "votes": [
                    {
                        "annotation_id": v.annotation_id,
                        "voter": v.voter,
                        "direction": v.direction.value,
                        "cast_at": v.cast_at.isoformat(),
                    }
                    for votes in self._votes.values()
                    for v in votes.values()
                ],
                "comments": [
                    {
                        "id": c.id,
                        "item_id": c.item_id,
                        "author": c.author,
                        "text": c.text,
                        "created_at": c.created_at.isoformat(),
                    }
                    for c in self._comments.values()
                ],
                "next_annotation": self._next_annotation,
                "next_comment": self._next_comment,
            }
            Path(path).write_text(
                json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8"
            )

    @classmethod
    def load(
        cls,
        path: str | Path,
        vocabularies: Mapping[Category, Vocabulary] | None = None,
        clock: Callable[[], datetime] | None = None,
    ) -> "CampaignStore":
        store = cls(vocabularies=vocabularies, clock=clock)
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
            for c in payload["campaigns"]:
                store.add_campaign(
                    Campaign(
                        id=c["id"],
                        title=c["title"],
                        instructions=c["instructions"],
                        item_ids=tuple(c["item_ids"]),
                        start=datetime.fromisoformat(c["start"]),
                        end=datetime.fromisoformat(c["end"]),
                        batch_count=c["batch_count"],
                    )
                )
            for a in payload["annotations"]:
                annotation = Annotation(
                    id=a["id"],
                    campaign_id=a["campaign_id"],
                    item_id=a["item_id"],
                    category=Category(a["category"]),
                    term_id=a["term_id"],
                    creator=a["creator"],
                    created_at=datetime.fromisoformat(a["created_at"]),
                    upvotes=a["upvotes"],
                    downvotes=a["downvotes"],
                )
                store._annotations[annotation.id] = annotation
                store._annotation_keys.add(
                    (annotation.item_id, annotation.term_id, annotation.creator)
                )
                store._votes[annotation.id] = {}
            for v in payload["votes"]:
                store._votes[v["annotation_id"]][v["voter"]] = Vote(
                    annotation_id=v["annotation_id"],
                    voter=v["voter"],
                    direction=VoteDirection(v["direction"]),
                    cast_at=datetime.fromisoformat(v["cast_at"]),
                )
            for c in payload["comments"]:
                comment = Comment(
                    id=c["id"],
                    item_id=c["item_id"],
                    author=c["author"],
                    text=c["text"],
                    created_at=datetime.fromisoformat(c["created_at"]),
                )
                store._comments[comment.id] = comment
            store._next_annotation = payload["next_annotation"]
            store._next_comment = payload["next_comment"]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CorruptStore(f"cannot load store from {path}: {exc}") from None
        return store


# -- export files -------------------------------------------------------------

ANNOTATION_COLUMNS = ["item_id", "category", "term_id", "upvotes", "downvotes", "creator"]
COMMENT_COLUMNS = ["item_id", "author", "text", "created_at"]


def render_annotation_rows(rows: Iterable[AnnotationRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(ANNOTATION_COLUMNS)
    for r in rows:
        writer.writerow(
            [r.item_id, r.category.value, r.term_id, r.upvotes, r.downvotes, r.creator]
        )
    return out.getvalue()


def render_comment_rows(comments: Iterable[CommentRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COMMENT_COLUMNS)
    for c in comments:
        writer.writerow([c.item_id, c.author, c.text, c.created_at.isoformat()])
    return out.getvalue()


def write_export(export: CampaignExport, annotations_path: str | Path, comments_path: str | Path) -> None:
    Path(annotations_path).write_text(render_annotation_rows(export.annotations), encoding="utf-8")
    Path(comments_path).write_text(render_comment_rows(export.comments), encoding="utf-8")


def read_export(annotations_path: str | Path, comments_path: str | Path) -> CampaignExport:
    from .catalog import FileUnreadable

    try:
        with open(annotations_path, newline="", encoding="utf-8") as fh:
            rows = tuple(
                AnnotationRow(
                    item_id=row["item_id"],
                    category=Category(row["category"]),
                    term_id=row["term_id"],
                    upvotes=int(row["upvotes"]),
                    downvotes=int(row["downvotes"]),
                    creator=row["creator"],
                )
                for row in csv.DictReader(fh)
            )
        with open(comments_path, newline="", encoding="utf-8") as fh:
            comments = tuple(
                CommentRow(
                    item_id=row["item_id"],
                    author=row["author"],
                    text=row["text"],
                    created_at=datetime.fromisoformat(row["created_at"]),
                )
                for row in csv.DictReader(fh)
            )
    except OSError as exc:
        raise FileUnreadable(str(exc)) from None
    return CampaignExport(annotations=rows, comments=comments)
