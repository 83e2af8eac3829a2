"""Model B: encoder-decoder transformer with teacher forcing and greedy
decoding.

Questions and answers share one vocabulary and a tied input embedding
table. The decoder is trained on START+answer against answer+END with PAD
positions excluded from the loss; decoding emits argmax tokens until END
or the length cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import textkit
from .checkpoint import ModelCheckpoint
from .corpus import DatasetSplit, QAPair
from .errors import DivergedLoss, EmptyAfterPreprocessing, EmptyEvalSet
from .metrics import EvalReport, bleu
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import (
    DecoderBlock,
    Embedding,
    EncoderBlock,
    Linear,
    Module,
    causal_mask,
    pad_attend_mask,
    positional_encoding,
)
from .nn.optim import AdamState, adam_step, clip_global_norm
from .textkit import END_ID, PAD_ID, START_ID, PipelineConfig, Vocabulary
from .training import EpochLogRow, TrainingSpec, minibatches


@dataclass
class Seq2SeqConfig:
    vocab_size: int
    d_model: int = 128
    n_heads: int = 4
    n_enc_layers: int = 2
    n_dec_layers: int = 2
    d_ff: int = 256
    max_len: int = 250
    dropout_rate: float = 0.1
    max_decode_len: int = 250

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("n_heads must divide d_model")
        if self.max_decode_len > self.max_len:
            raise ValueError("max_decode_len must be <= max_len")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "Seq2SeqConfig":
        return cls(**d)


class StopReason(str, Enum):
    END_TOKEN = "end_token"
    LENGTH_LIMIT = "length_limit"


@dataclass
class DecodeTrace:
    emitted: list[int]
    step_probs: list[float]
    stop_reason: StopReason

    def to_dict(self) -> dict:
        return {
            "emitted": self.emitted,
            "step_probs": self.step_probs,
            "stop_reason": self.stop_reason.value,
        }


class Seq2Seq(Module):
    def __init__(self, cfg: Seq2SeqConfig, seed: int):
        rng = np.random.default_rng(seed)
        self.cfg = cfg
        self.embedding = Embedding(rng, cfg.vocab_size, cfg.d_model)  # tied src/tgt
        self.enc_blocks = [
            EncoderBlock(rng, cfg.d_model, cfg.n_heads, cfg.d_ff, cfg.dropout_rate)
            for _ in range(cfg.n_enc_layers)
        ]
        self.dec_blocks = [
            DecoderBlock(rng, cfg.d_model, cfg.n_heads, cfg.d_ff, cfg.dropout_rate)
            for _ in range(cfg.n_dec_layers)
        ]
        self.out_proj = Linear(rng, cfg.d_model, cfg.vocab_size)
        self.pe = positional_encoding(cfg.max_len, cfg.d_model)

    def _embed(self, ids: np.ndarray, rng=None) -> Tensor:
        length = ids.shape[1]
        x = ad.mul(self.embedding(ids), math.sqrt(self.cfg.d_model))
        x = ad.add(x, Tensor(self.pe[:length]))
        return ad.dropout(x, self.cfg.dropout_rate, rng)

    def encode(self, src_ids: np.ndarray, rng=None) -> tuple[Tensor, np.ndarray]:
        src_ids = np.asarray(src_ids, dtype=np.int64)
        src_mask = pad_attend_mask(src_ids, PAD_ID)
        x = self._embed(src_ids, rng)
        for block in self.enc_blocks:
            x = block(x, src_mask, rng)
        return x, src_mask

    def decode(
        self, tgt_ids: np.ndarray, memory: Tensor, src_mask: np.ndarray, rng=None
    ) -> Tensor:
        """tgt_ids (batch, L) -> logits (batch, L, vocab)."""
        tgt_ids = np.asarray(tgt_ids, dtype=np.int64)
        cmask = causal_mask(tgt_ids.shape[1])
        x = self._embed(tgt_ids, rng)
        for block in self.dec_blocks:
            x = block(x, memory, cmask, src_mask, rng)
        return self.out_proj(x)

    def forward(self, src_ids: np.ndarray, tgt_ids: np.ndarray, rng=None) -> Tensor:
        memory, src_mask = self.encode(src_ids, rng)
        return self.decode(tgt_ids, memory, src_mask, rng)


def _encode_pair(
    pair: QAPair, vocab: Vocabulary, pipeline: PipelineConfig
) -> tuple[list[int], list[int], list[int]]:
    """Returns (encoder input, decoder input, decoder target)."""
    q = textkit.encode(
        textkit.preprocess(pair.question_raw, pipeline), vocab, pipeline, add_bounds=False
    )
    bounded = textkit.encode(
        textkit.preprocess(pair.answer, pipeline), vocab, pipeline, add_bounds=True
    )
    dec_in = bounded[:-1]  # START + answer, END/PAD shifted out
    dec_target = bounded[1:]  # answer + END, PAD-ignored in the loss
    return q, dec_in, dec_target


def _encode_split(pairs, vocab, pipeline):
    enc, dec_in, dec_tgt = [], [], []
    for p in pairs:
        q, di, dt = _encode_pair(p, vocab, pipeline)
        enc.append(q)
        dec_in.append(di)
        dec_tgt.append(dt)
    return (
        np.asarray(enc, dtype=np.int64),
        np.asarray(dec_in, dtype=np.int64),
        np.asarray(dec_tgt, dtype=np.int64),
    )


def _batch_loss_acc(model, enc, dec_in, dec_tgt, rng=None):
    logits = model.forward(enc, dec_in, rng)
    b, l, v = logits.data.shape
    flat = ad.reshape(logits, (b * l, v))
    targets = dec_tgt.reshape(-1)
    loss = ad.cross_entropy(flat, targets, ignore_id=PAD_ID)
    active = targets != PAD_ID
    correct = int((flat.data.argmax(axis=1)[active] == targets[active]).sum())
    return loss, correct, int(active.sum())


def train_seq2seq(
    split: DatasetSplit,
    cfg: Seq2SeqConfig,
    spec: TrainingSpec,
    pipeline: PipelineConfig,
    dataset_hash: str = "",
) -> tuple[ModelCheckpoint, list[EpochLogRow]]:
    docs = []
    for p in split.train:
        docs.append(textkit.preprocess(p.question_raw, pipeline))
        docs.append(textkit.preprocess(p.answer, pipeline))
    vocab = textkit.build_vocabulary(docs, min_frequency=1)
    cfg.vocab_size = len(vocab)

    enc, dec_in, dec_tgt = _encode_split(split.train, vocab, pipeline)
    has_val = len(split.validation) > 0
    if has_val:
        venc, vdec_in, vdec_tgt = _encode_split(split.validation, vocab, pipeline)

    model = Seq2Seq(cfg, spec.seed)
    params = model.parameters()
    state = AdamState(learning_rate=spec.learning_rate)
    shuffle_rng = np.random.default_rng(spec.seed + 1)
    dropout_rng = np.random.default_rng(spec.seed + 2)

    log: list[EpochLogRow] = []
    best_val_acc = -1.0
    best_weights = model.export_parameters()
    for epoch in range(1, spec.epochs + 1):
        tot_loss = tot_correct = tot_active = 0
        for batch in minibatches(len(enc), spec.batch_size, shuffle_rng):
            loss, correct, active = _batch_loss_acc(
                model, enc[batch], dec_in[batch], dec_tgt[batch], dropout_rng
            )
            if not np.isfinite(loss.data):
                raise DivergedLoss(f"NaN/Inf loss at epoch {epoch}")
            for p in params.values():
                p.zero_grad()
            ad.backward(loss)
            clip_global_norm(params, 1.0)
            adam_step(params, state)
            tot_loss += float(loss.data) * active
            tot_correct += correct
            tot_active += active
        train_loss = tot_loss / tot_active
        train_acc = tot_correct / tot_active
        if has_val:
            vloss, vcorrect, vactive = _batch_loss_acc(model, venc, vdec_in, vdec_tgt)
            val_loss, val_acc = float(vloss.data), vcorrect / vactive
        else:
            val_loss, val_acc = train_loss, train_acc
        log.append(EpochLogRow(epoch, train_loss, train_acc, val_loss, val_acc))
        # best-validation selection, ties to the earlier epoch; without a
        # validation set there is nothing to select on, so keep final weights
        if not has_val or val_acc > best_val_acc:
            best_val_acc = val_acc
            best_weights = model.export_parameters()

    ckpt = ModelCheckpoint(
        model_kind="generative",
        model_config=cfg.to_dict(),
        training_spec=spec.to_dict(),
        pipeline=pipeline,
        vocab=vocab,
        weights=best_weights,
        seed=spec.seed,
        dataset_hash=dataset_hash,
        extra={"best_val_acc": best_val_acc, "optimizer": "adam", "grad_clip": 1.0,
               "decoding": "greedy"},
    )
    return ckpt, log


def load_model(ckpt: ModelCheckpoint) -> Seq2Seq:
    cfg = Seq2SeqConfig.from_dict(ckpt.model_config)
    model = Seq2Seq(cfg, ckpt.seed)
    model.load_parameters(ckpt.weights)
    return model


def generate(
    question: str, ckpt: ModelCheckpoint, model: Seq2Seq | None = None
) -> tuple[str, DecodeTrace]:
    tokens = textkit.preprocess(question, ckpt.pipeline)
    if not tokens:
        raise EmptyAfterPreprocessing(f"nothing left of {question!r} after preprocessing")
    model = model or load_model(ckpt)
    cfg = model.cfg
    src = np.asarray(
        [textkit.encode(tokens, ckpt.vocab, ckpt.pipeline, add_bounds=False)],
        dtype=np.int64,
    )
    memory, src_mask = model.encode(src)
    emitted: list[int] = []
    probs: list[float] = []
    stop = StopReason.LENGTH_LIMIT
    for _ in range(cfg.max_decode_len):
        dec_in = np.asarray([[START_ID] + emitted], dtype=np.int64)
        logits = model.decode(dec_in, memory, src_mask)
        step = ad.softmax(logits, axis=-1).data[0, -1]
        nxt = int(step.argmax())
        probs.append(float(step[nxt]))
        emitted.append(nxt)
        if nxt == END_ID:
            stop = StopReason.END_TOKEN
            break
    answer = textkit.decode(emitted, ckpt.vocab)
    return answer, DecodeTrace(emitted, probs, stop)


def evaluate_seq2seq(
    pairs: list[QAPair],
    ckpt: ModelCheckpoint,
    max_n: int = 2,
    model: Seq2Seq | None = None,
) -> EvalReport:
    if not pairs:
        raise EmptyEvalSet("no evaluation pairs")
    if not (1 <= max_n <= 4):
        raise ValueError("max_n must be in 1..4")
    model = model or load_model(ckpt)
    candidates, references = [], []
    for p in pairs:
        try:
            answer, _ = generate(p.question_raw, ckpt, model)
        except EmptyAfterPreprocessing:
            answer = ""
        candidates.append(answer.split())
        references.append([t.surface for t in textkit.preprocess(p.answer, ckpt.pipeline)])
    enc, dec_in, dec_tgt = _encode_split(pairs, ckpt.vocab, ckpt.pipeline)
    _, correct, active = _batch_loss_acc(model, enc, dec_in, dec_tgt)
    return EvalReport(
        n_samples=len(pairs),
        bleu=bleu(candidates, references, max_n),
        per_token_accuracy=correct / active,
        notes={"decoding": "greedy", "bleu_smoothing": "none", "bleu_level": "corpus"},
    )
