from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timezone

import pytest

from musekb.campaign import AnnotationRow, CampaignExport, CommentRow
from musekb.catalog import TrackRecord
from musekb.moderation import (
    MergedTag,
    ModerationPolicy,
    UnknownItemInExport,
    annotation_score,
    moderate_campaign,
    moderate_item,
)
from musekb.vocabulary import Category

from conftest import EMOTION_IDS, GENRE_IDS, INSTRUMENT_IDS


@dataclass(frozen=True)
class Tally:
    term_id: str
    upvotes: int
    downvotes: int


def row(item, category, term, up, down, creator="u1"):
    return AnnotationRow(
        item_id=item, category=category, term_id=term, upvotes=up, downvotes=down, creator=creator
    )


# Independent check written straight from the filtering rules: rank every
# merged value, take the two top-ranked ones for emotion/genre and keep them
# only with an up/down difference of at least two; for instruments keep the
# values with a difference above five.
def brute_force_moderate(tallies_by_category, top_k=2, min_diff=2, instrument_cutoff=5):
    kept = {}
    for category, tallies in tallies_by_category.items():
        merged = {}
        for t in tallies:
            up, down = merged.get(t.term_id, (0, 0))
            merged[t.term_id] = (up + t.upvotes, down + t.downvotes)
        ranked = sorted(
            merged.items(), key=lambda kv: (-(kv[1][0] - kv[1][1]), -kv[1][0], kv[0])
        )
        if category is Category.INSTRUMENT:
            kept[category] = {
                term for term, (up, down) in ranked if up - down > instrument_cutoff
            }
        else:
            top_ranked = ranked[:top_k]
            kept[category] = {
                term for term, (up, down) in top_ranked if up - down >= min_diff
            }
    return kept


def random_item_config(rng: random.Random):
    """Random per-item annotation/vote configuration, duplicates included."""
    pools = {
        Category.GENRE: GENRE_IDS,
        Category.EMOTION: EMOTION_IDS,
        Category.INSTRUMENT: INSTRUMENT_IDS,
    }
    config = {}
    for category, pool in pools.items():
        tallies = []
        for _ in range(rng.randint(0, 8)):
            tallies.append(
                Tally(
                    term_id=rng.choice(pool),
                    upvotes=rng.randint(0, 12),
                    downvotes=rng.randint(0, 8),
                )
            )
        config[category] = tallies
    return config


class TestScore:
    @pytest.mark.parametrize("up,down,expected", [(5, 1, 4), (0, 0, 0), (0, 3, -3)])
    def test_vote_difference(self, up, down, expected):
        assert annotation_score(Tally("x", up, down)) == expected


class TestModerateItem:
    def test_genre_threshold_and_cap(self):
        result = moderate_item(
            {
                Category.GENRE: [
                    Tally("rock", 5, 1),
                    Tally("pop", 3, 0),
                    Tally("jazz", 2, 1),
                ]
            }
        )
        assert [t.term_id for t in result[Category.GENRE]] == ["rock", "pop"]

    def test_instrument_cutoff_is_strict(self):
        dropped = moderate_item({Category.INSTRUMENT: [Tally("drums", 6, 1)]})
        kept = moderate_item({Category.INSTRUMENT: [Tally("drums", 7, 1)]})
        assert dropped[Category.INSTRUMENT] == []
        assert [t.term_id for t in kept[Category.INSTRUMENT]] == ["drums"]

    def test_emotion_top_two_cap(self):
        result = moderate_item(
            {
                Category.EMOTION: [
                    Tally("joy", 4, 0),
                    Tally("calmness", 3, 0),
                    Tally("sadness", 2, 0),
                ]
            }
        )
        assert [t.term_id for t in result[Category.EMOTION]] == ["joy", "calmness"]

    def test_no_top_k_cap_for_instruments(self):
        tallies = [Tally(t, 10, 0) for t in ("drums", "piano", "violin", "banjo")]
        result = moderate_item({Category.INSTRUMENT: tallies})
        assert len(result[Category.INSTRUMENT]) == 4

    def test_same_term_merged_across_creators_before_ranking(self):
        result = moderate_item(
            {
                Category.GENRE: [
                    Tally("rock", 1, 0),
                    Tally("rock", 1, 0),
                    Tally("jazz", 2, 1),
                ]
            }
        )
        assert result[Category.GENRE] == [MergedTag("rock", 2, 0)]

    def test_tie_breaking_by_upvotes_then_term_id(self):
        result = moderate_item(
            {
                Category.GENRE: [
                    Tally("pop", 4, 2),
                    Tally("jazz", 2, 0),
                    Tally("rock", 6, 4),
                ]
            }
        )
        # all score 2; pop wins on upvotes 4 < 6 -> rock first, then pop
        assert [t.term_id for t in result[Category.GENRE]] == ["rock", "pop"]

    def test_matches_brute_force_on_random_configs(self):
        rng = random.Random(99)
        for _ in range(300):
            config = random_item_config(rng)
            mine = moderate_item(config)
            theirs = brute_force_moderate(config)
            for category in config:
                assert {t.term_id for t in mine.get(category, [])} == theirs[category]

    def test_monotone_in_upvotes(self):
        rng = random.Random(7)
        for _ in range(200):
            config = random_item_config(rng)
            kept = moderate_item(config)
            for category, tags in kept.items():
                if not tags:
                    continue
                boosted_term = rng.choice(tags).term_id
                boosted = {
                    cat: [
                        Tally(
                            t.term_id,
                            t.upvotes + (1 if cat == category and t.term_id == boosted_term else 0),
                            t.downvotes,
                        )
                        for t in tallies
                    ]
                    for cat, tallies in config.items()
                }
                rekept = moderate_item(boosted)
                assert boosted_term in {t.term_id for t in rekept[category]}


def make_export(rows, comments=()):
    return CampaignExport(annotations=tuple(rows), comments=tuple(comments))


class TestModerateCampaign:
    def test_empty_export(self):
        records = [TrackRecord("a"), TrackRecord("b")]
        enriched, report = moderate_campaign(make_export([]), records=records)
        assert all(not (r.genres | r.emotions | r.instruments) for r in enriched)
        assert report.categories["genre"].kept == 0
        assert report.categories["comments"].kept == 0

    def test_unknown_item(self):
        with pytest.raises(UnknownItemInExport):
            moderate_campaign(
                make_export([row("ghost", Category.GENRE, "rock", 5, 0)]),
                records=[TrackRecord("a")],
            )

    def test_survivors_written_and_comments_verbatim(self):
        records = [TrackRecord("a")]
        now = datetime(2026, 1, 1, tzinfo=timezone.utc)
        export = make_export(
            [
                row("a", Category.GENRE, "rock", 5, 1),
                row("a", Category.GENRE, "jazz", 1, 1),
                row("a", Category.INSTRUMENT, "drums", 9, 1),
            ],
            [CommentRow("a", "alice", "low quality recording!!", now)],
        )
        enriched, report = moderate_campaign(export, records=records)
        assert enriched[0].genres == {"rock"}
        assert enriched[0].instruments == {"drums"}
        assert enriched[0].comments == ["low quality recording!!"]
        assert report.categories["genre"].kept == 1
        assert report.categories["genre"].dropped == 1
        assert report.categories["comments"].kept == 1
        # input untouched
        assert records[0].genres == set()

    def test_deterministic_output(self, rng):
        records = [TrackRecord(f"r{i}") for i in range(30)]
        rows = []
        for r in records:
            for _ in range(rng.randint(0, 6)):
                category = rng.choice(list(Category))
                pool = {
                    Category.GENRE: GENRE_IDS,
                    Category.EMOTION: EMOTION_IDS,
                    Category.INSTRUMENT: INSTRUMENT_IDS,
                }[category]
                rows.append(
                    row(
                        r.europeana_id,
                        category,
                        rng.choice(pool),
                        rng.randint(0, 10),
                        rng.randint(0, 6),
                        creator=f"u{rng.randint(1, 5)}",
                    )
                )
        export = make_export(rows)
        from musekb.catalog import render_enriched

        first, _ = moderate_campaign(export, records=records)
        second, _ = moderate_campaign(export, records=records)
        assert render_enriched(first) == render_enriched(second)

    def test_report_csv_shape(self):
        records = [TrackRecord("a")]
        export = make_export([row("a", Category.GENRE, "rock", 5, 1)])
        _, report = moderate_campaign(export, records=records)
        lines = report.to_csv().splitlines()
        assert lines[0] == "category,kept,dropped,kept_fraction"
        assert any(line.startswith("genre,1,0,") for line in lines)
