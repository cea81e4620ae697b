from __future__ import annotations

import random

import pytest

from musekb.catalog import PartialDate, TrackRecord
from musekb.vocabulary import Category, builtin_vocabularies

VOCABS = builtin_vocabularies()
GENRE_IDS = sorted(t.id for t in VOCABS[Category.GENRE])
EMOTION_IDS = sorted(t.id for t in VOCABS[Category.EMOTION])
INSTRUMENT_IDS = sorted(t.id for t in VOCABS[Category.INSTRUMENT])


def random_record(rng: random.Random, index: int = 0, with_tags: bool = True) -> TrackRecord:
    """A randomized record exercising absent fields, tags and odd comment text."""
    composer = rng.choice([None, "Clara Holm", "Pavel Dvorak", "Ines Valdez; Trio"])
    birth = None
    death = None
    if composer is not None and rng.random() < 0.7:
        birth_year = rng.randint(1700, 1900)
        birth = (
            PartialDate(birth_year, rng.randint(1, 12), rng.randint(1, 28))
            if rng.random() < 0.5
            else PartialDate(birth_year)
        )
        if rng.random() < 0.8:
            death = PartialDate(birth_year + rng.randint(20, 80))
    comments = []
    for _ in range(rng.randint(0, 3)):
        comments.append(
            rng.choice(
                [
                    "plain comment",
                    "has; a separator",
                    'quoted "phrase" inside',
                    "backslash \\ and ; mix",
                    "multi\nline note",
                    "trailing backslash \\",
                ]
            )
        )
    return TrackRecord(
        europeana_id=f"/rec/{index:04d}",
        title=rng.choice([None, "Evening Air", 'A "quoted" Song', "Semi;colon title"]),
        year=rng.choice([None, rng.randint(1880, 1970)]),
        duration_ms=rng.choice([None, rng.randint(0, 400_000)]),
        composer=composer,
        composer_birth=birth,
        composer_death=death,
        biography=rng.choice([None, "Toured the continent.\nLater taught."]),
        publisher=rng.choice([None, "Aurora Editions"]),
        place=rng.choice([None, "Vienna"]),
        audio_url=rng.choice([None, f"https://audio.example/{index}.mp3"]),
        genres=set(rng.sample(GENRE_IDS, rng.randint(0, 3))) if with_tags else set(),
        emotions=set(rng.sample(EMOTION_IDS, rng.randint(0, 3))) if with_tags else set(),
        instruments=set(rng.sample(INSTRUMENT_IDS, rng.randint(0, 3))) if with_tags else set(),
        comments=comments,
    )


@pytest.fixture
def rng():
    return random.Random(20260809)
