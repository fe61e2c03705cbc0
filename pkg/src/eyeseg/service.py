"""HTTP annotation service: embed once per image, predict per prompt edit.

Masks travel as run-length payloads (see :mod:`eyeseg.rle`). Point labels
on the wire are 1 (foreground) and 0 (background). Exported label images
are 8-bit single-channel PNGs with class codes 0..3, so an export can be
re-ingested through the generic-folder dataset layout unchanged.

Run standalone with ``eyeseg serve`` or embed via :func:`create_app`.
"""

from __future__ import annotations

import base64
import binascii
import io
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from PIL import Image
from pydantic import BaseModel, Field

from .backends import EmbeddingHandle, SegmenterBackend, image_digest, select_prompted_mask
from .datasets import CLASS_CODES, FEATURES, DatasetManifest
from .errors import EmptyPromptError, EyesegError
from .masks import Box, Point
from .prompts import PromptSet
from .rle import decode_mask, encode_mask

# export paints outer features first so nested inner features win overlaps
_PAINT_ORDER = ("sclera", "iris", "pupil")


class PointIn(BaseModel):
    x: int
    y: int
    label: int = Field(ge=0, le=1)


class BoxIn(BaseModel):
    x_min: int
    y_min: int
    x_max: int
    y_max: int


class SessionIn(BaseModel):
    image_b64: Optional[str] = None
    item_id: Optional[str] = None


class PredictIn(BaseModel):
    model_config = {"populate_by_name": True}

    points: list[PointIn] = []
    box: Optional[BoxIn] = None
    feature: str = Field(alias="class")


class RlePayload(BaseModel):
    width: int
    height: int
    counts: list[int]


class CommitIn(BaseModel):
    model_config = {"populate_by_name": True}

    feature: str = Field(alias="class")
    mask: RlePayload
    prompts: Optional[PredictIn] = None


@dataclass
class _Commit:
    feature: str
    mask: np.ndarray
    prompts: Optional[dict]


@dataclass
class _Session:
    id: str
    image: np.ndarray
    handle: EmbeddingHandle
    labels: Optional[np.ndarray] = None
    history: list[_Commit] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def shape(self) -> tuple[int, int]:
        return self.image.shape[:2]


def _to_prompt_set(body: PredictIn, shape: tuple[int, int]) -> PromptSet:
    h, w = shape
    for p in body.points:
        if not (0 <= p.x < w and 0 <= p.y < h):
            raise HTTPException(422, detail=f"point ({p.x},{p.y}) outside {w}x{h} image")
    box = None
    if body.box is not None:
        try:
            box = Box(body.box.x_min, body.box.y_min, body.box.x_max, body.box.y_max)
        except ValueError as exc:
            raise HTTPException(422, detail=str(exc))
        box = box.clamped((w, h))
    points = tuple(Point(p.x, p.y, p.label) for p in body.points)
    if not points and box is None:
        raise HTTPException(422, detail="prompt needs at least one point or a box")
    return PromptSet(points=points, box=box)


def create_app(
    backend: Optional[SegmenterBackend] = None,
    manifest: Optional[DatasetManifest] = None,
) -> FastAPI:
    """Build the service around one backend and an optional dataset."""
    app = FastAPI(title="eyeseg annotation service")
    # the browser client is typically served from a separate static origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions: dict[str, _Session] = {}
    embed_cache: dict[str, EmbeddingHandle] = {}
    cache_lock = threading.Lock()

    def _session(session_id: str) -> _Session:
        try:
            return sessions[session_id]
        except KeyError:
            raise HTTPException(404, detail=f"unknown session {session_id}")

    def _require_backend() -> SegmenterBackend:
        if backend is None:
            raise HTTPException(503, detail="no segmentation backend configured")
        return backend

    def _embed(image: np.ndarray) -> EmbeddingHandle:
        digest = image_digest(image)
        cached = embed_cache.get(digest)
        if cached is not None:
            return cached
        handle = _require_backend().embed(image)
        with cache_lock:
            embed_cache[digest] = handle
        return handle

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionIn):
        labels = None
        if body.item_id is not None:
            if manifest is None:
                raise HTTPException(404, detail="no dataset attached to this service")
            try:
                item = manifest.get(body.item_id)
            except KeyError:
                raise HTTPException(404, detail=f"unknown item {body.item_id}")
            image = item.load_image()
            if item.has_labels:
                labels = item.load_labels()
        elif body.image_b64 is not None:
            try:
                raw = base64.b64decode(body.image_b64, validate=True)
                with Image.open(io.BytesIO(raw)) as im:
                    image = np.asarray(im.convert("L") if im.mode == "L" else im.convert("RGB"))
            except (binascii.Error, OSError, ValueError) as exc:
                raise HTTPException(400, detail=f"undecodable image: {exc}")
        else:
            raise HTTPException(400, detail="provide image_b64 or item_id")

        try:
            handle = _embed(image)  # eager, so the first predict is fast
        except EyesegError as exc:
            raise HTTPException(503, detail=f"backend failed to embed: {exc}")
        session = _Session(
            id=uuid.uuid4().hex, image=image, handle=handle, labels=labels
        )
        sessions[session.id] = session
        h, w = session.shape
        return {"session_id": session.id, "width": w, "height": h}

    @app.get("/items")
    def list_items():
        if manifest is None:
            return {"items": []}
        return {"items": [it.id for it in manifest]}

    @app.get("/sessions/{session_id}/image")
    def session_image(session_id: str):
        session = _session(session_id)
        buf = io.BytesIO()
        Image.fromarray(session.image).save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/sessions/{session_id}/predict")
    def predict(session_id: str, body: PredictIn):
        session = _session(session_id)
        if body.feature not in FEATURES:
            raise HTTPException(422, detail=f"class must be one of {FEATURES}")
        prompt_set = _to_prompt_set(body, session.shape)
        seg = _require_backend()
        with session.lock:
            if session.labels is not None:
                prime = getattr(seg, "prime", None)
                if prime is not None:
                    prime(session.labels, body.feature)
            try:
                preds = seg.predict(session.handle, prompt_set)
            except EmptyPromptError as exc:
                raise HTTPException(422, detail=str(exc))
            except EyesegError as exc:
                raise HTTPException(503, detail=f"backend error: {exc}")
        best = int(np.argmax(preds.scores))
        return {
            "mask": encode_mask(select_prompted_mask(preds)),
            "score": float(preds.scores[best]),
        }

    @app.post("/sessions/{session_id}/commit")
    def commit(session_id: str, body: CommitIn):
        session = _session(session_id)
        if body.feature not in FEATURES:
            raise HTTPException(422, detail=f"class must be one of {FEATURES}")
        try:
            mask = decode_mask(body.mask.model_dump())
        except ValueError as exc:
            raise HTTPException(422, detail=str(exc))
        if mask.shape != session.shape:
            raise HTTPException(
                422,
                detail=f"mask shape {mask.shape} does not match image {session.shape}",
            )
        prompts = body.prompts.model_dump(by_alias=True) if body.prompts else None
        with session.lock:
            session.history.append(_Commit(body.feature, mask, prompts))
            depth = len(session.history)
        return {"class": body.feature, "history_depth": depth}

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        session = _session(session_id)
        with session.lock:
            if not session.history:
                raise HTTPException(409, detail="nothing to undo")
            session.history.pop()
            depth = len(session.history)
        return {"history_depth": depth}

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        session = _session(session_id)
        with session.lock:
            if not session.history:
                raise HTTPException(409, detail="session has no committed masks")
            # replaying history reproduces state: the latest commit per
            # class wins its slot, inner classes win overlapping pixels
            slots = {c.feature: c.mask for c in session.history}
            labels = np.zeros(session.shape, dtype=np.uint8)
            for feature in _PAINT_ORDER:
                if feature in slots:
                    labels[slots[feature]] = CLASS_CODES[feature]
            provenance = [
                {"class": c.feature, "prompts": c.prompts} for c in session.history
            ]
        buf = io.BytesIO()
        Image.fromarray(labels, mode="L").save(buf, format="PNG")
        h, w = session.shape
        return {
            "label_image_b64": base64.b64encode(buf.getvalue()).decode("ascii"),
            "provenance": provenance,
            "width": w,
            "height": h,
        }

    return app


def load_app_from_env() -> FastAPI:  # pragma: no cover - uvicorn entry helper
    """Factory for ``uvicorn eyeseg.service:load_app_from_env --factory``."""
    import os

    from .backends import build_backend
    from .datasets import load_dataset

    backend = build_backend({"name": os.environ.get("EYESEG_BACKEND", "mock")})
    manifest = None
    root = os.environ.get("EYESEG_DATA_ROOT")
    if root:
        manifest = load_dataset(root, os.environ.get("EYESEG_DATA_LAYOUT", "generic-folder"))
    return create_app(backend=backend, manifest=manifest)
