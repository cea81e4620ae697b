"""Crowd-enriched music knowledge base.

Pipeline: curated metadata records are annotated by a crowd during a
campaign, the raw tags are moderated by vote difference, survivors are
compiled into a queryable triple graph, and the enriched dataset feeds
association mining, sentiment scoring and tag-based recommendation.
"""

from .catalog import (
    CurationPolicy,
    LoadResult,
    PartialDate,
    TrackRecord,
    apply_curation,
    export_enriched,
    load_dataset,
    parse_record,
)
from .vocabulary import (
    Category,
    EmotionPosition,
    Term,
    Vocabulary,
    builtin_vocabularies,
    emotion_position,
    resolve_term,
)
from .campaign import (
    Annotation,
    Campaign,
    CampaignExport,
    CampaignStore,
    Comment,
    Vote,
    VoteDirection,
    partition_batches,
)
from .moderation import (
    ModerationPolicy,
    annotation_score,
    moderate_campaign,
    moderate_item,
)
from .kg import (
    ClassAxiom,
    FixtureResolver,
    Graph,
    HasValue,
    Iri,
    Literal,
    Triple,
    YearRange,
    build_graph,
    integrate_external,
    materialize_axioms,
    parse_graph,
    serialize_graph,
)
from .query import BindingTable, QueryAst, evaluate_query, parse_query, print_query
from .analytics import (
    SentimentLexicon,
    SimilarityWeights,
    TagTransaction,
    frequent_pairs,
    pair_support,
    recommend,
    sentiment_score,
    similarity,
    track_sentiment,
    transactions_from_records,
)

__version__ = "0.1.0"
