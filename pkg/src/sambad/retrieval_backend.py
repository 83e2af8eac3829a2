"""Model A: transformer-encoder multiclass classifier over question text.

A question is preprocessed, encoded to a fixed-length id sequence, run
through a small encoder stack, mean-pooled over non-pad positions and
classified into one of the training categories; the category's canonical
answer (the first training answer for that category) is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import textkit
from .checkpoint import ModelCheckpoint
from .corpus import DatasetSplit, QAPair
from .errors import (
    DivergedLoss,
    EmptyAfterPreprocessing,
    EmptyEvalSet,
    UnseenCategoryInEval,
)
from .metrics import EvalReport, accuracy, confusion_counts, macro_f1, micro_f1
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import Embedding, EncoderBlock, Linear, Module, pad_attend_mask, positional_encoding
from .nn.optim import AdamState, adam_step, clip_global_norm
from .textkit import PAD_ID, PipelineConfig, Vocabulary
from .training import EpochLogRow, TrainingSpec, minibatches


@dataclass
class EncoderClassifierConfig:
    vocab_size: int
    n_classes: int
    d_model: int = 128
    n_heads: int = 4
    n_layers: int = 2
    d_ff: int = 256
    max_len: int = 250
    dropout_rate: float = 0.1

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("n_heads must divide d_model")
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderClassifierConfig":
        return cls(**d)


class EncoderClassifier(Module):
    def __init__(self, cfg: EncoderClassifierConfig, seed: int):
        rng = np.random.default_rng(seed)
        self.cfg = cfg
        self.embedding = Embedding(rng, cfg.vocab_size, cfg.d_model)
        self.blocks = [
            EncoderBlock(rng, cfg.d_model, cfg.n_heads, cfg.d_ff, cfg.dropout_rate)
            for _ in range(cfg.n_layers)
        ]
        self.head = Linear(rng, cfg.d_model, cfg.n_classes)
        self.pe = positional_encoding(cfg.max_len, cfg.d_model)

    def forward(self, ids: np.ndarray, rng: np.random.Generator | None = None) -> Tensor:
        """ids (batch, L) -> logits (batch, n_classes)."""
        ids = np.asarray(ids, dtype=np.int64)
        length = ids.shape[1]
        mask = pad_attend_mask(ids, PAD_ID)
        x = ad.mul(self.embedding(ids), math.sqrt(self.cfg.d_model))
        x = ad.add(x, Tensor(self.pe[:length]))
        x = ad.dropout(x, self.cfg.dropout_rate, rng)
        for block in self.blocks:
            x = block(x, mask, rng)
        nonpad = (ids != PAD_ID).astype(np.float64)[:, :, None]
        counts = nonpad.sum(axis=1)
        pooled = ad.mul(ad.tensor_sum(ad.mul(x, Tensor(nonpad)), axis=1), 1.0 / counts)
        return self.head(pooled)


def _encode_questions(
    pairs: list[QAPair], vocab: Vocabulary, pipeline: PipelineConfig
) -> np.ndarray:
    rows = []
    for p in pairs:
        tokens = textkit.preprocess(p.question_raw, pipeline)
        rows.append(textkit.encode(tokens, vocab, pipeline, add_bounds=False))
    return np.asarray(rows, dtype=np.int64)


def _eval_pass(model: EncoderClassifier, ids: np.ndarray, labels: np.ndarray,
               batch_size: int) -> tuple[float, float]:
    total_loss, correct = 0.0, 0
    for start in range(0, len(ids), batch_size):
        batch = slice(start, start + batch_size)
        logits = model.forward(ids[batch])
        loss = ad.cross_entropy(logits, labels[batch])
        total_loss += float(loss.data) * len(ids[batch])
        correct += int((logits.data.argmax(axis=1) == labels[batch]).sum())
    return total_loss / len(ids), correct / len(ids)


def train_classifier(
    split: DatasetSplit,
    cfg: EncoderClassifierConfig,
    spec: TrainingSpec,
    pipeline: PipelineConfig,
    dataset_hash: str = "",
    categories: list[str] | None = None,
) -> tuple[ModelCheckpoint, list[EpochLogRow]]:
    train_cats = {p.category_id for p in split.train}
    for part_name, part in (("validation", split.validation), ("test", split.test)):
        extra = {p.category_id for p in part} - train_cats
        if extra:
            raise UnseenCategoryInEval(f"{part_name} has unseen categories {sorted(extra)}")

    vocab = textkit.build_vocabulary(
        (textkit.preprocess(p.question_raw, pipeline) for p in split.train),
        min_frequency=1,
    )
    cfg.vocab_size = len(vocab)

    answer_index: dict[int, str] = {}
    for p in split.train:
        answer_index.setdefault(p.category_id, p.answer)

    train_ids = _encode_questions(split.train, vocab, pipeline)
    train_labels = np.asarray([p.category_id for p in split.train], dtype=np.int64)
    val_ids = _encode_questions(split.validation, vocab, pipeline)
    val_labels = np.asarray([p.category_id for p in split.validation], dtype=np.int64)

    model = EncoderClassifier(cfg, spec.seed)
    params = model.parameters()
    state = AdamState(learning_rate=spec.learning_rate)
    shuffle_rng = np.random.default_rng(spec.seed + 1)
    dropout_rng = np.random.default_rng(spec.seed + 2)

    log: list[EpochLogRow] = []
    best_val_acc = -1.0
    best_weights = model.export_parameters()
    for epoch in range(1, spec.epochs + 1):
        epoch_loss = 0.0
        epoch_correct = 0
        for batch in minibatches(len(train_ids), spec.batch_size, shuffle_rng):
            logits = model.forward(train_ids[batch], dropout_rng)
            loss = ad.cross_entropy(logits, train_labels[batch])
            if not np.isfinite(loss.data):
                raise DivergedLoss(f"NaN/Inf loss at epoch {epoch}")
            for p in params.values():
                p.zero_grad()
            ad.backward(loss)
            clip_global_norm(params, 1.0)
            adam_step(params, state)
            epoch_loss += float(loss.data) * len(batch)
            epoch_correct += int((logits.data.argmax(axis=1) == train_labels[batch]).sum())
        train_loss = epoch_loss / len(train_ids)
        train_acc = epoch_correct / len(train_ids)
        if len(val_ids):
            val_loss, val_acc = _eval_pass(model, val_ids, val_labels, spec.batch_size)
        else:
            val_loss, val_acc = train_loss, train_acc
        log.append(EpochLogRow(epoch, train_loss, train_acc, val_loss, val_acc))
        # best-validation selection, ties to the earlier epoch; without a
        # validation set there is nothing to select on, so keep final weights
        if len(val_ids) == 0 or val_acc > best_val_acc:
            best_val_acc = val_acc
            best_weights = model.export_parameters()

    ckpt = ModelCheckpoint(
        model_kind="retrieval",
        model_config=cfg.to_dict(),
        training_spec=spec.to_dict(),
        pipeline=pipeline,
        vocab=vocab,
        weights=best_weights,
        seed=spec.seed,
        dataset_hash=dataset_hash,
        answer_index=answer_index,
        categories=categories,
        extra={"best_val_acc": best_val_acc, "optimizer": "adam", "grad_clip": 1.0},
    )
    return ckpt, log


def load_model(ckpt: ModelCheckpoint) -> EncoderClassifier:
    cfg = EncoderClassifierConfig.from_dict(ckpt.model_config)
    model = EncoderClassifier(cfg, ckpt.seed)
    model.load_parameters(ckpt.weights)
    return model


def classify(
    question: str, ckpt: ModelCheckpoint, model: EncoderClassifier | None = None
) -> tuple[int, float, str]:
    tokens = textkit.preprocess(question, ckpt.pipeline)
    if not tokens:
        raise EmptyAfterPreprocessing(f"nothing left of {question!r} after preprocessing")
    model = model or load_model(ckpt)
    ids = np.asarray(
        [textkit.encode(tokens, ckpt.vocab, ckpt.pipeline, add_bounds=False)],
        dtype=np.int64,
    )
    logits = model.forward(ids)
    probs = ad.softmax(logits, axis=-1).data[0]
    cat = int(probs.argmax())
    answer = (ckpt.answer_index or {}).get(cat, "")
    return cat, float(probs[cat]), answer


def evaluate_classifier(
    pairs: list[QAPair], ckpt: ModelCheckpoint, model: EncoderClassifier | None = None
) -> EvalReport:
    if not pairs:
        raise EmptyEvalSet("no evaluation pairs")
    model = model or load_model(ckpt)
    ids = _encode_questions(pairs, ckpt.vocab, ckpt.pipeline)
    gold = [p.category_id for p in pairs]
    pred = []
    batch_size = int(ckpt.training_spec.get("batch_size", 32))
    for start in range(0, len(ids), batch_size):
        logits = model.forward(ids[start : start + batch_size])
        pred.extend(int(c) for c in logits.data.argmax(axis=1))
    return EvalReport(
        n_samples=len(pairs),
        accuracy=accuracy(gold, pred),
        micro_f1=micro_f1(gold, pred),
        macro_f1=macro_f1(gold, pred),
        per_class_counts=confusion_counts(gold, pred),
    )
