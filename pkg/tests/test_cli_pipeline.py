from __future__ import annotations

import csv

from musekb.service.cli import run_cli

SIM_ARGS = [
    "campaign",
    "simulate",
    "--annotators",
    "10",
    "--seed",
    "7",
    "--items-per-annotator",
    "8",
    "--votes-per-annotator",
    "60",
]


def run_pipeline(data_dir, tracks=60, seed=1):
    raw = data_dir / "raw.csv"
    assert run_cli(["synth", "--tracks", str(tracks), "--seed", str(seed), "--output", str(raw)]) == 0
    base = ["--data-dir", str(data_dir)]
    assert run_cli(base + ["ingest", "--input", str(raw)]) == 0
    assert run_cli(base + SIM_ARGS) == 0
    assert run_cli(base + ["moderate"]) == 0
    assert run_cli(base + ["build-kg"]) == 0
    return base


class TestPipeline:
    def test_end_to_end(self, tmp_path, capsys):
        base = run_pipeline(tmp_path)
        capsys.readouterr()
        q = tmp_path / "songs.q"
        q.write_text("select ?s where { ?s type Song . }", encoding="utf-8")
        assert run_cli(base + ["query", "-f", str(q)]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[-1].startswith("https://musekb.example/track/")

        assert run_cli(base + ["mine", "--min-support", "0.02"]) == 0
        mined = capsys.readouterr().out.splitlines()
        assert mined[0] == "support,pair"

        with open(tmp_path / "records.csv", newline="", encoding="utf-8") as fh:
            seed_id = next(csv.DictReader(fh))["EuropeanaID"]
        assert run_cli(base + ["recommend", "--seed", seed_id, "-k", "3"]) == 0
        recommended = capsys.readouterr().out.splitlines()
        assert recommended[0] == "europeana_id,score,title"
        assert 1 <= len(recommended) - 1 <= 3

        out_csv = tmp_path / "open_dataset.csv"
        assert run_cli(base + ["export", "--output", str(out_csv)]) == 0
        assert out_csv.exists()

    def test_ingest_reports_rejections(self, tmp_path, capsys):
        raw = tmp_path / "raw.csv"
        raw.write_text(
            "EuropeanaID,Title,Duration,Composer\n"
            "/r/1,Keep Me,100000,Someone\n"
            "/r/2,Too Long,400000,Someone\n"
            "/r/3,No Composer,100000,\n",
            encoding="utf-8",
        )
        assert run_cli(["--data-dir", str(tmp_path), "ingest", "--input", str(raw)]) == 0
        rejected = (tmp_path / "rejected.csv").read_text(encoding="utf-8").splitlines()
        assert rejected[0] == "europeana_id,reasons"
        assert "/r/2,DurationExceeded" in rejected
        assert "/r/3,MissingRequiredField(composer)" in rejected

    def test_domain_error_exits_1(self, tmp_path, capsys):
        code = run_cli(["--data-dir", str(tmp_path), "ingest", "--input", str(tmp_path / "missing.csv")])
        assert code == 1
        assert "error[FileUnreadable]" in capsys.readouterr().err

    def test_usage_error_exits_2(self, capsys):
        assert run_cli(["mine"]) == 2
        assert run_cli(["no-such-command"]) == 2

    def test_moderate_before_simulate_exits_1(self, tmp_path, capsys):
        raw = tmp_path / "raw.csv"
        assert run_cli(["synth", "--tracks", "10", "--seed", "1", "--output", str(raw)]) == 0
        base = ["--data-dir", str(tmp_path)]
        assert run_cli(base + ["ingest", "--input", str(raw)]) == 0
        assert run_cli(base + ["moderate"]) == 1
        assert "error[FileUnreadable]" in capsys.readouterr().err

    def test_query_missing_file_exits_1(self, tmp_path, capsys):
        base = run_pipeline(tmp_path, tracks=30)
        assert run_cli(base + ["query", "-f", str(tmp_path / "nope.q")]) == 1
        assert "error[FileUnreadable]" in capsys.readouterr().err

    def test_query_from_argument(self, tmp_path, capsys):
        base = run_pipeline(tmp_path, tracks=30)
        capsys.readouterr()
        assert run_cli(base + ["query", "-q", "select ?s where { ?s type Song . }"]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 31

    def test_recommend_unknown_seed_exits_1(self, tmp_path, capsys):
        base = run_pipeline(tmp_path, tracks=30)
        assert run_cli(base + ["recommend", "--seed", "/nope", "-k", "2"]) == 1
        assert "error[UnknownItem]" in capsys.readouterr().err


class TestDeterminism:
    def test_simulate_twice_is_byte_identical(self, tmp_path):
        contents = []
        for run in range(2):
            data_dir = tmp_path / f"run{run}"
            data_dir.mkdir()
            raw = data_dir / "raw.csv"
            assert run_cli(["synth", "--tracks", "60", "--seed", "1", "--output", str(raw)]) == 0
            base = ["--data-dir", str(data_dir)]
            assert run_cli(base + ["ingest", "--input", str(raw)]) == 0
            assert run_cli(base + SIM_ARGS) == 0
            contents.append(
                (
                    (data_dir / "annotations.csv").read_bytes(),
                    (data_dir / "comments.csv").read_bytes(),
                    (data_dir / "store.json").read_bytes(),
                )
            )
        assert contents[0] == contents[1]

    def test_full_pipeline_byte_identical_per_seed(self, tmp_path):
        digests = []
        for run in range(2):
            data_dir = tmp_path / f"run{run}"
            data_dir.mkdir()
            run_pipeline(data_dir, tracks=60, seed=4)
            digests.append(
                (
                    (data_dir / "annotations.csv").read_bytes(),
                    (data_dir / "enriched.csv").read_bytes(),
                    (data_dir / "moderation_report.csv").read_bytes(),
                    (data_dir / "graph.triples").read_bytes(),
                )
            )
        assert digests[0] == digests[1]

    def test_moderated_tags_respect_thresholds(self, tmp_path):
        base = run_pipeline(tmp_path)
        from musekb.campaign import read_export
        from musekb.catalog import load_dataset
        from musekb.vocabulary import Category

        export = read_export(tmp_path / "annotations.csv", tmp_path / "comments.csv")
        enriched = {r.europeana_id: r for r in load_dataset(tmp_path / "enriched.csv").records}
        merged_scores = {}
        for row in export.annotations:
            key = (row.item_id, row.category, row.term_id)
            up, down = merged_scores.get(key, (0, 0))
            merged_scores[key] = (up + row.upvotes, down + row.downvotes)
        kept_any = False
        for record in enriched.values():
            for category, tags in (
                (Category.GENRE, record.genres),
                (Category.EMOTION, record.emotions),
                (Category.INSTRUMENT, record.instruments),
            ):
                if category is not Category.INSTRUMENT:
                    assert len(tags) <= 2
                for term_id in tags:
                    kept_any = True
                    up, down = merged_scores[(record.europeana_id, category, term_id)]
                    if category is Category.INSTRUMENT:
                        assert up - down >= 6
                    else:
                        assert up - down >= 2
        assert kept_any
