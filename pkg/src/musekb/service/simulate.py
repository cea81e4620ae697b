"""Synthetic annotator harness: fills a campaign from a planted ground truth.

Each simulated annotator works through a batch, tagging a configurable
number of items (hitting the planted truth with the configured accuracy)
and then votes on other users' annotations, agreeing with the truth most
of the time. Everything, including timestamps, derives from the seed, so
two runs with the same seed produce identical stores.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from ..campaign import (
    CampaignStore,
    DuplicateAnnotation,
    VoteDirection,
    partition_batches,
)
from ..vocabulary import Category, builtin_vocabularies, emotion_position

DEFAULT_SIM_START = datetime(2026, 1, 1, tzinfo=timezone.utc)

_CATEGORIES = (Category.GENRE, Category.EMOTION, Category.INSTRUMENT)
_TRUTH_SIZES = {Category.GENRE: (1, 2), Category.EMOTION: (1, 2), Category.INSTRUMENT: (1, 3)}

_POSITIVE_PHRASES = [
    "lovely recording, very calm and pleasant",
    "really enjoyed this one, great melody",
    "beautiful piece, would recommend",
    "cheerful and uplifting throughout",
    "wonderful performance, warm sound",
]
_NEGATIVE_PHRASES = [
    "rather boring and repetitive",
    "the recording is noisy and harsh",
    "dull piece, not my taste",
    "sad and gloomy, hard to sit through",
    "poor sound quality, quite annoying",
]


class TickingClock:
    """Monotonic fake clock; every call advances by a fixed step."""

    def __init__(self, start: datetime, step: timedelta = timedelta(seconds=1)):
        self._now = start
        self._step = step

    def __call__(self) -> datetime:
        now = self._now
        self._now += self._step
        return now


@dataclass(frozen=True)
class SimulationBehavior:
    items_per_annotator: int = 80
    extra_tag_prob: float = 0.07
    accuracy: float = 0.8
    votes_per_annotator: int = 500
    vote_agreement: float = 0.95
    comment_prob: float = 0.1


@dataclass
class SimulationResult:
    campaign_id: str
    users: list[str]
    ground_truth: dict[str, dict[Category, set[str]]]
    annotations_created: int = 0
    votes_cast: int = 0
    comments_added: int = 0
    rejected_duplicates: int = 0

    def summary(self) -> str:
        return (
            f"{len(self.users)} annotators: {self.annotations_created} annotations, "
            f"{self.votes_cast} votes, {self.comments_added} comments"
        )


def plant_ground_truth(item_ids, seed: int) -> dict[str, dict[Category, set[str]]]:
    """Pick the 'true' tags per item, deterministically from the seed."""
    vocabs = builtin_vocabularies()
    truth: dict[str, dict[Category, set[str]]] = {}
    for item_id in item_ids:
        rng = random.Random(f"truth:{seed}:{item_id}")
        per_item: dict[Category, set[str]] = {}
        for category in _CATEGORIES:
            low, high = _TRUTH_SIZES[category]
            ids = sorted(t.id for t in vocabs[category])
            per_item[category] = set(rng.sample(ids, rng.randint(low, high)))
        truth[item_id] = per_item
    return truth


def _comment_for(truth_emotions: set[str], rng: random.Random) -> str:
    vocab = builtin_vocabularies()[Category.EMOTION]
    valence = 0.0
    for term_id in sorted(truth_emotions):
        term = vocab.get(term_id)
        if term is not None:
            valence += emotion_position(term).valence
    phrases = _POSITIVE_PHRASES if valence >= 0 else _NEGATIVE_PHRASES
    return rng.choice(phrases)


def simulate_annotators(
    store: CampaignStore,
    campaign_id: str,
    annotators: int,
    seed: int,
    behavior: SimulationBehavior | None = None,
) -> SimulationResult:
    """Populate a campaign with seeded synthetic contributions."""
    if annotators < 1:
        raise ValueError("need at least one annotator")
    behavior = behavior or SimulationBehavior()
    campaign = store.campaign(campaign_id)
    store.clock = TickingClock(campaign.start)
    rng = random.Random(seed)
    vocabs = builtin_vocabularies()
    users = [f"student-{i + 1:03d}" for i in range(annotators)]
    batches = partition_batches(campaign)
    truth = plant_ground_truth(campaign.item_ids, seed)
    result = SimulationResult(campaign_id=campaign_id, users=users, ground_truth=truth)

    for u_idx, user in enumerate(users):
        batch = batches[u_idx % len(batches)]
        items = rng.sample(batch, min(behavior.items_per_annotator, len(batch)))
        for item_id in items:
            categories = [rng.choice(_CATEGORIES)]
            if rng.random() < behavior.extra_tag_prob:
                categories.append(rng.choice([c for c in _CATEGORIES if c not in categories]))
            for category in categories:
                true_ids = sorted(truth[item_id][category])
                if rng.random() < behavior.accuracy:
                    term_id = rng.choice(true_ids)
                else:
                    wrong = sorted(
                        t.id for t in vocabs[category] if t.id not in truth[item_id][category]
                    )
                    term_id = rng.choice(wrong)
                try:
                    store.submit_annotation(item_id, term_id, category, user)
                    result.annotations_created += 1
                except DuplicateAnnotation:
                    result.rejected_duplicates += 1
            if rng.random() < behavior.comment_prob:
                store.add_comment(
                    item_id, user, _comment_for(truth[item_id][Category.EMOTION], rng)
                )
                result.comments_added += 1

    annotations = store.annotations_for_campaign(campaign_id)
    for user in users:
        candidates = [a for a in annotations if a.creator != user]
        if not candidates:
            continue
        picks = rng.sample(candidates, min(behavior.votes_per_annotator, len(candidates)))
        for annotation in picks:
            matches_truth = (
                annotation.term_id in truth[annotation.item_id][annotation.category]
            )
            agrees = rng.random() < behavior.vote_agreement
            direction = VoteDirection.UP if matches_truth == agrees else VoteDirection.DOWN
            store.cast_vote(annotation.id, user, direction)
            result.votes_cast += 1
    return result
