"""Rule-based dialogue management: greeting rule, out-of-scope rule, then
backend routing.

Rule precedence is fixed: exact greeting match on the normalized input,
then the vocabulary scope check (at least ``min_scope_matches`` input
tokens must appear in the training-question vocabulary), then the backend.
``handle`` never raises; backend failures are folded into an out-of-scope
turn flagged as an internal error.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

from . import generative_backend, retrieval_backend, textkit
from .checkpoint import ModelCheckpoint
from .corpus import QAPair
from .errors import BackendFailure, EmptyCorpus
from .textkit import PipelineConfig, Vocabulary

DEFAULT_GREETING = "नमस्ते"
DEFAULT_GREETING_REPLY = "नमस्ते, म हजुरलाई कसरी सहयोग गर्न सक्छु?"
DEFAULT_FALLBACK = "माफ गर्नुहोला, मैले तपाईंको प्रश्न बुझ्न सकिन"


class Verdict(str, Enum):
    GREETING = "greeting"
    OUT_OF_SCOPE = "out_of_scope"
    ANSWERED = "answered"


class Source(str, Enum):
    RULE = "rule"
    RETRIEVAL = "retrieval"
    GENERATIVE = "generative"


@dataclass
class RuleSet:
    scope_vocab: Vocabulary
    greeting_map: dict[str, str] = field(
        default_factory=lambda: {DEFAULT_GREETING: DEFAULT_GREETING_REPLY}
    )
    fallback_reply: str = DEFAULT_FALLBACK
    min_scope_matches: int = 1


@dataclass
class DialogueTurn:
    session_id: str
    user_text: str
    verdict: Verdict
    reply: str
    source: Source
    confidence: float | None
    timestamp: float
    internal_error: bool = False

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "user_text": self.user_text,
            "verdict": self.verdict.value,
            "reply": self.reply,
            "source": self.source.value,
            "confidence": self.confidence,
            "timestamp": self.timestamp,
            "internal_error": self.internal_error,
        }


def build_scope_vocab(train_pairs: Sequence[QAPair], pipeline: PipelineConfig) -> Vocabulary:
    """Vocabulary over preprocessed training questions, min frequency 1."""
    docs = [textkit.preprocess(p.question_raw, pipeline) for p in train_pairs]
    if not any(docs):
        raise EmptyCorpus("no tokens in training questions")
    return textkit.build_vocabulary(docs, min_frequency=1)


def load_rules(path: str | Path, scope_vocab: Vocabulary) -> RuleSet:
    """Rules file: JSON with ``greetings`` object, ``fallback`` string and
    optional ``min_scope_matches``."""
    cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    return RuleSet(
        scope_vocab=scope_vocab,
        greeting_map=dict(cfg.get("greetings", {DEFAULT_GREETING: DEFAULT_GREETING_REPLY})),
        fallback_reply=cfg.get("fallback", DEFAULT_FALLBACK),
        min_scope_matches=int(cfg.get("min_scope_matches", 1)),
    )


def _backend_answer(question: str, ckpt: ModelCheckpoint, model=None) -> tuple[str, Source, float | None]:
    try:
        if ckpt.model_kind == "retrieval":
            _, confidence, answer = retrieval_backend.classify(question, ckpt, model)
            return answer, Source.RETRIEVAL, confidence
        if ckpt.model_kind == "generative":
            answer, trace = generative_backend.generate(question, ckpt, model)
            conf = min(trace.step_probs) if trace.step_probs else None
            return answer, Source.GENERATIVE, conf
        raise BackendFailure(f"unknown model kind {ckpt.model_kind!r}")
    except BackendFailure:
        raise
    except Exception as e:
        raise BackendFailure(str(e)) from e


def handle(
    user_text: str,
    rules: RuleSet,
    backend: ModelCheckpoint,
    session_id: str = "",
    model=None,
) -> DialogueTurn:
    pipeline = backend.pipeline
    now = time.time()
    normalized = textkit.normalize(user_text, pipeline)
    greeting_reply = rules.greeting_map.get(normalized)
    if greeting_reply is not None:
        return DialogueTurn(
            session_id, user_text, Verdict.GREETING, greeting_reply, Source.RULE, None, now
        )
    tokens = textkit.preprocess(user_text, pipeline)
    specials = set(textkit.SPECIAL_TOKENS)
    matches = sum(
        1 for t in tokens if t.surface not in specials and t.surface in rules.scope_vocab
    )
    if matches < rules.min_scope_matches:
        return DialogueTurn(
            session_id, user_text, Verdict.OUT_OF_SCOPE, rules.fallback_reply,
            Source.RULE, None, now,
        )
    try:
        reply, source, confidence = _backend_answer(user_text, backend, model)
    except BackendFailure:
        return DialogueTurn(
            session_id, user_text, Verdict.OUT_OF_SCOPE, rules.fallback_reply,
            Source.RULE, None, now, internal_error=True,
        )
    return DialogueTurn(
        session_id, user_text, Verdict.ANSWERED, reply, source, confidence, now
    )


def append_turn_log(turn: DialogueTurn, path: str | Path) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(turn.to_dict(), ensure_ascii=False) + "\n")
