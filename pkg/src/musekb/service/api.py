"""HTTP/JSON API over the campaign store.

Responses wrap payloads in ``{"data": ...}``; domain errors become
``{"error": {"code", "message"}}`` with the code taken verbatim from the
raised error class, so clients can switch on stable identifiers.
"""

from __future__ import annotations

import socket
import threading
from dataclasses import dataclass, field
from pathlib import Path

import uvicorn
from fastapi import FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..campaign import Campaign, CampaignStore, UnknownItem, VoteDirection
from ..catalog import TrackRecord, load_dataset
from ..errors import MusekbError
from ..moderation import annotation_score
from ..vocabulary import (
    Category,
    NotAnEmotion,
    Term,
    builtin_vocabularies,
    emotion_position,
)


class PortInUse(MusekbError):
    code = "PortInUse"


STATUS_BY_CODE = {
    "UnknownCampaign": 404,
    "UnknownItem": 404,
    "UnknownAnnotation": 404,
    "SelfVote": 409,
    "DuplicateAnnotation": 409,
    "CampaignClosed": 409,
    "UnknownTerm": 422,
    "AmbiguousTerm": 422,
    "NotAnEmotion": 422,
    "EmptyComment": 422,
    "CommentTooLong": 422,
    "TooFewItems": 422,
    "UnknownItemInExport": 422,
    "InvalidRequest": 422,
    "CorruptStore": 500,
    "PortInUse": 500,
}


class AnnotationIn(BaseModel):
    term_id: str
    category: str
    user: str


class VoteIn(BaseModel):
    user: str
    direction: str


class CommentIn(BaseModel):
    user: str
    text: str


@dataclass
class ServiceState:
    store: CampaignStore
    records: dict[str, TrackRecord] = field(default_factory=dict)


def _error_response(code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=STATUS_BY_CODE.get(code, 500),
        content={"error": {"code": code, "message": message}},
    )


def _campaign_json(campaign: Campaign, store: CampaignStore) -> dict:
    return {
        "id": campaign.id,
        "title": campaign.title,
        "instructions": campaign.instructions,
        "item_count": len(campaign.item_ids),
        "batch_count": campaign.batch_count,
        "start": campaign.start.isoformat(),
        "end": campaign.end.isoformat(),
        "open": campaign.is_open(store.clock()),
    }


def _term_json(term: Term) -> dict:
    data = {"id": term.id, "label": term.label, "category": term.category.value, "uri": term.uri}
    if term.category is Category.EMOTION:
        try:
            position = emotion_position(term)
            data["valence"] = position.valence
            data["arousal"] = position.arousal
        except NotAnEmotion:
            pass
    return data


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="musekb", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = state.store

    @app.exception_handler(MusekbError)
    async def _domain_error(_request: Request, exc: MusekbError):
        return _error_response(exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return _error_response("InvalidRequest", str(exc.errors()[:1]))

    def _item_json(item_id: str, user: str | None) -> dict:
        record = state.records.get(item_id)
        annotations = sorted(
            store.annotations_for_item(item_id), key=lambda a: (a.created_at, a.id)
        )
        comments = sorted(
            store.comments_for_item(item_id), key=lambda c: (c.created_at, c.id)
        )
        return {
            "item_id": item_id,
            "title": record.title if record else None,
            "composer": record.composer if record else None,
            "year": record.year if record else None,
            "audio_url": record.audio_url if record else None,
            "annotations": [
                {
                    "id": a.id,
                    "term_id": a.term_id,
                    "category": a.category.value,
                    "creator": a.creator,
                    "upvotes": a.upvotes,
                    "downvotes": a.downvotes,
                    "score": annotation_score(a),
                    "my_vote": store.vote_of(a.id, user) if user else None,
                }
                for a in annotations
            ],
            "comments": [
                {"author": c.author, "text": c.text, "created_at": c.created_at.isoformat()}
                for c in comments
            ],
        }

    @app.get("/campaigns")
    def list_campaigns():
        return {"data": [_campaign_json(c, store) for c in store.campaigns()]}

    @app.get("/campaigns/{campaign_id}/batches/{batch}/items")
    def batch_items(
        campaign_id: str, batch: int, x_user_id: str | None = Header(default=None)
    ):
        from ..campaign import partition_batches

        campaign = store.campaign(campaign_id)
        batches = partition_batches(campaign)
        if not 1 <= batch <= len(batches):
            raise UnknownItem(f"campaign {campaign_id!r} has no batch {batch}")
        item_ids = batches[batch - 1]
        return {
            "data": {
                "campaign_id": campaign_id,
                "batch": batch,
                "total_batches": len(batches),
                "items": [_item_json(i, x_user_id) for i in item_ids],
            }
        }

    @app.get("/vocabularies")
    def vocabularies():
        vocabs = builtin_vocabularies()
        return {
            "data": {
                category.value: [_term_json(t) for t in vocabs[category]]
                for category in Category
            }
        }

    @app.post("/items/{item_id:path}/annotations", status_code=201)
    def submit_annotation(item_id: str, body: AnnotationIn):
        annotation = store.submit_annotation(
            item_id, body.term_id, Category(body.category), body.user
        )
        return {
            "data": {
                "id": annotation.id,
                "item_id": annotation.item_id,
                "term_id": annotation.term_id,
                "category": annotation.category.value,
                "creator": annotation.creator,
                "upvotes": annotation.upvotes,
                "downvotes": annotation.downvotes,
                "created_at": annotation.created_at.isoformat(),
            }
        }

    @app.post("/annotations/{annotation_id}/votes")
    def cast_vote(annotation_id: str, body: VoteIn):
        try:
            direction = VoteDirection(body.direction)
        except ValueError:
            return _error_response("InvalidRequest", f"direction must be up or down, got {body.direction!r}")
        up, down = store.cast_vote(annotation_id, body.user, direction)
        return {
            "data": {
                "annotation_id": annotation_id,
                "upvotes": up,
                "downvotes": down,
                "my_vote": direction.value,
            }
        }

    @app.post("/items/{item_id:path}/comments", status_code=201)
    def add_comment(item_id: str, body: CommentIn):
        comment = store.add_comment(item_id, body.user, body.text)
        return {
            "data": {
                "id": comment.id,
                "item_id": comment.item_id,
                "author": comment.author,
                "text": comment.text,
                "created_at": comment.created_at.isoformat(),
            }
        }

    @app.get("/campaigns/{campaign_id}/leaderboard")
    def leaderboard(campaign_id: str):
        return {
            "data": [
                {"user": user, "points": points}
                for user, points in store.leaderboard(campaign_id)
            ]
        }

    @app.get("/campaigns/{campaign_id}/export")
    def export(campaign_id: str):
        snapshot = store.export_annotations(campaign_id)
        return {
            "data": {
                "annotations": [
                    {
                        "item_id": r.item_id,
                        "category": r.category.value,
                        "term_id": r.term_id,
                        "upvotes": r.upvotes,
                        "downvotes": r.downvotes,
                        "creator": r.creator,
                    }
                    for r in snapshot.annotations
                ],
                "comments": [
                    {
                        "item_id": c.item_id,
                        "author": c.author,
                        "text": c.text,
                        "created_at": c.created_at.isoformat(),
                    }
                    for c in snapshot.comments
                ],
            }
        }

    return app


@dataclass
class ServiceConfig:
    data_dir: Path
    host: str = "127.0.0.1"
    port: int = 8080


class ServiceHandle:
    """A running service; ``stop()`` shuts it down and flushes the store."""

    def __init__(self, config: ServiceConfig, state: ServiceState, server: uvicorn.Server, thread: threading.Thread):
        self._config = config
        self._state = state
        self._server = server
        self._thread = thread

    @property
    def url(self) -> str:
        return f"http://{self._config.host}:{self._config.port}"

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)
        self._state.store.save(self._config.data_dir / "store.json")


def load_state(data_dir: Path) -> ServiceState:
    """Build service state from a data directory (store.json, records.csv)."""
    store_path = data_dir / "store.json"
    if store_path.exists():
        store = CampaignStore.load(store_path)
    else:
        store = CampaignStore()
    records: dict[str, TrackRecord] = {}
    records_path = data_dir / "records.csv"
    if records_path.exists():
        records = {r.europeana_id: r for r in load_dataset(records_path).records}
    return ServiceState(store=store, records=records)


def check_port_available(host: str, port: int) -> None:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        raise PortInUse(f"cannot bind {host}:{port}: {exc}") from None
    finally:
        probe.close()


def serve(config: ServiceConfig, state: ServiceState | None = None) -> ServiceHandle:
    """Start the service in a background thread and return a stoppable handle."""
    check_port_available(config.host, config.port)
    if state is None:
        state = load_state(config.data_dir)
    app = create_app(state)
    server = uvicorn.Server(
        uvicorn.Config(app, host=config.host, port=config.port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    return ServiceHandle(config, state, server, thread)
