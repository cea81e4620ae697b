"""Deterministic synthetic datasets for demos and tests."""

from __future__ import annotations

import random

from .catalog import PartialDate, TrackRecord

_COMPOSERS = [
    ("Anna Freylinghaus", 1811, 1878),
    ("Bela Kovats", 1842, 1901),
    ("Carlo Venturi", 1795, 1864),
    ("Dora Lindqvist", 1857, 1923),
    ("Elias Brandt", 1823, 1889),
    ("Franca Moretti", 1868, 1940),
    ("Gustav Ahlberg", 1801, 1872),
    ("Helene Dupont", 1834, 1899),
    ("Igor Malek", 1879, 1951),
    ("Jutta Weiss", 1815, 1880),
    ("Karel Novak", 1850, 1912),
    ("Lucia Ferrante", 1888, 1962),
    ("Mats Oberg", 1806, 1871),
    ("Nora Jensen", 1861, 1930),
    ("Otto Reinhardt", 1829, 1897),
    ("Pilar Soler", 1874, 1948),
]

_TITLE_HEADS = [
    "Nocturne", "Serenade", "Polka", "March", "Waltz", "Ballad", "Prelude",
    "Fantasia", "Rhapsody", "Lament", "Overture", "Caprice", "Hymn", "Reel",
]
_TITLE_TAILS = [
    "in B minor", "for the Harvest", "of the North Wind", "No. 3", "in E flat",
    "for Two Voices", "at Dusk", "of the River", "No. 12", "for the Fair",
    "in G", "of Farewell", "at Midsummer", "for Strings",
]

_PUBLISHERS = [
    "Aurora Editions", "Cantus Press", "Harbour Music House", "Lyra Verlag",
    "Meridian Phonographics", "Northern Sound Archive",
]

_PLACES = [
    "Athens", "Bologna", "Copenhagen", "Dresden", "Gothenburg", "Lyon",
    "Milan", "Prague", "Thessaloniki", "Vienna",
]


def synthetic_records(count: int, seed: int = 0) -> list[TrackRecord]:
    """Generate ``count`` curated-looking records, reproducible per seed.

    Every record passes the default curation policy; optional fields are
    occasionally absent, mirroring patchy source metadata.
    """
    rng = random.Random(seed)
    records = []
    for i in range(count):
        name, birth, death = _COMPOSERS[rng.randrange(len(_COMPOSERS))]
        full_birth = rng.random() < 0.5
        records.append(
            TrackRecord(
                europeana_id=f"/sound/{seed:02d}{i:05d}",
                title=f"{rng.choice(_TITLE_HEADS)} {rng.choice(_TITLE_TAILS)}",
                year=rng.randint(1900, 1965) if rng.random() < 0.85 else None,
                duration_ms=rng.randint(45_000, 360_000),
                composer=name,
                composer_birth=(
                    PartialDate(birth, rng.randint(1, 12), rng.randint(1, 28))
                    if full_birth
                    else PartialDate(birth)
                ),
                composer_death=PartialDate(death) if rng.random() < 0.8 else None,
                biography=(
                    f"{name} wrote for small ensembles and toured widely."
                    if rng.random() < 0.4
                    else None
                ),
                publisher=rng.choice(_PUBLISHERS) if rng.random() < 0.7 else None,
                place=rng.choice(_PLACES) if rng.random() < 0.7 else None,
                audio_url=f"https://audio.musekb.example/{seed:02d}{i:05d}.mp3",
            )
        )
    return records
