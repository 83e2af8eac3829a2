"""HTTP chat service wrapping the dialogue manager.

Endpoints: POST /api/chat, GET /api/health, GET /api/info. The HTTP layer
adds no dialogue semantics of its own: a chat request is exactly one
``dialogue.handle`` call on immutable checkpoints.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import dialogue, generative_backend, retrieval_backend
from .checkpoint import ModelCheckpoint
from .dialogue import RuleSet

DEFAULT_BACKEND = "retrieval"


def create_app(
    checkpoints: dict[str, ModelCheckpoint],
    rules: RuleSet,
    turn_log_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    if not checkpoints:
        raise ValueError("at least one checkpoint is required")
    # models are rebuilt once; inference on them is read-only
    models = {}
    for kind, ckpt in checkpoints.items():
        loader = retrieval_backend if kind == "retrieval" else generative_backend
        models[kind] = loader.load_model(ckpt)
    default_kind = DEFAULT_BACKEND if DEFAULT_BACKEND in checkpoints else next(iter(checkpoints))
    log_lock = threading.Lock()

    app = FastAPI(title="sambad chat service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/health")
    def health():
        return {"status": "ok", "model_kind": default_kind}

    @app.get("/api/info")
    def info():
        return {
            "backends": sorted(checkpoints),
            "default_backend": default_kind,
            "models": {
                kind: {
                    "seed": ckpt.seed,
                    "dataset_hash": ckpt.dataset_hash,
                    "vocab_size": len(ckpt.vocab),
                    "stemming": ckpt.pipeline.apply_stemming,
                }
                for kind, ckpt in checkpoints.items()
            },
        }

    @app.post("/api/chat")
    async def chat(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "malformed JSON body"}, status_code=400)
        if not isinstance(body, dict) or not isinstance(body.get("message", None), str):
            return JSONResponse({"error": "body must have a string 'message'"}, 400)
        message = body["message"]
        if not message.strip():
            return JSONResponse({"error": "message must be non-empty"}, status_code=422)
        session_id = str(body.get("session_id", ""))
        kind = body.get("backend", default_kind)
        if kind not in checkpoints:
            return JSONResponse({"error": f"unknown backend {kind!r}"}, status_code=400)
        try:
            turn = dialogue.handle(
                message, rules, checkpoints[kind], session_id, models[kind]
            )
        except Exception:
            incident = uuid.uuid4().hex[:12]
            return JSONResponse({"error": "internal failure", "id": incident}, 500)
        if turn_log_path is not None:
            with log_lock:
                dialogue.append_turn_log(turn, turn_log_path)
        return {
            "reply": turn.reply,
            "source": turn.source.value,
            "verdict": turn.verdict.value,
            "confidence": turn.confidence,
            "session_id": session_id,
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
