"""Namespace constants shared by the vocabulary and knowledge-graph modules."""

from __future__ import annotations

BASE = "https://musekb.example/"
VOCAB_BASE = BASE + "vocab/"
TRACK_BASE = BASE + "track/"
COMPOSER_BASE = BASE + "composer/"
RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDF_TYPE = RDF_NS + "type"


def vocab_ns(category: str) -> str:
    return f"{VOCAB_BASE}{category}/"
