"""Stemmed vs non-stemmed ablation runner over both backends.

Reproduces the experimental design (2 backends x stemming on/off) on
whatever dataset it is pointed at. Each grid cell trains from scratch and
reports test metrics; a failing cell is rendered FAILED without stopping
the others.
"""

from __future__ import annotations

import json
import traceback
from dataclasses import dataclass
from pathlib import Path

from . import corpus as corpus_mod
from . import generative_backend, retrieval_backend
from .corpus import Dataset
from .generative_backend import Seq2SeqConfig
from .retrieval_backend import EncoderClassifierConfig
from .textkit import PipelineConfig
from .training import TrainingSpec

STAND_INS = {
    "optimizer": "adam",
    "loss": "cross-entropy",
    "decoding": "greedy argmax",
    "stemmer": "table-driven longest-suffix-match for Nepali",
    "initialization": "xavier-uniform, numpy PCG64 seeded generator",
}


@dataclass
class AblationCell:
    model_kind: str  # "retrieval" | "generative"
    stemming: bool


def default_grid() -> list[AblationCell]:
    return [
        AblationCell("retrieval", False),
        AblationCell("retrieval", True),
        AblationCell("generative", False),
        AblationCell("generative", True),
    ]


def _pipeline(base: PipelineConfig, stemming: bool) -> PipelineConfig:
    return PipelineConfig(
        max_len=base.max_len,
        apply_stemming=stemming,
        remove_stopwords=base.remove_stopwords,
        strip_latin=base.strip_latin,
        stopword_list=base.stopword_list,
        suffix_table=base.suffix_table,
    )


def run_ablation(
    dataset: Dataset,
    grid: list[AblationCell],
    base_pipeline: PipelineConfig,
    spec: TrainingSpec,
    retrieval_cfg: EncoderClassifierConfig | None = None,
    generative_cfg: Seq2SeqConfig | None = None,
    dataset_hash: str = "",
) -> dict:
    if not grid:
        raise ValueError("grid must have at least one cell")
    seen = set()
    for cell in grid:
        key = (cell.model_kind, cell.stemming)
        if key in seen:
            raise ValueError(f"duplicate grid cell {key}")
        seen.add(key)

    pairs = corpus_mod.deduplicate(dataset.pairs)
    splits = {}
    for stemming in {c.stemming for c in grid}:
        splits[stemming] = corpus_mod.split(pairs, seed=spec.seed)

    rows = []
    for cell in grid:
        pipeline = _pipeline(base_pipeline, cell.stemming)
        split = splits[cell.stemming]
        row: dict = {"model": cell.model_kind, "stemming": cell.stemming}
        try:
            if cell.model_kind == "retrieval":
                cfg = retrieval_cfg or EncoderClassifierConfig(
                    vocab_size=4, n_classes=len(dataset.categories),
                    max_len=base_pipeline.max_len,
                )
                cfg = EncoderClassifierConfig.from_dict(cfg.to_dict())
                cfg.n_classes = len(dataset.categories)
                ckpt, _ = retrieval_backend.train_classifier(
                    split, cfg, spec, pipeline, dataset_hash, dataset.categories
                )
                eval_part = split.test or split.train
                report = retrieval_backend.evaluate_classifier(eval_part, ckpt)
                row.update(
                    status="ok",
                    accuracy=report.accuracy,
                    micro_f1=report.micro_f1,
                    macro_f1=report.macro_f1,
                )
            elif cell.model_kind == "generative":
                cfg = generative_cfg or Seq2SeqConfig(
                    vocab_size=4, max_len=base_pipeline.max_len,
                    max_decode_len=base_pipeline.max_len,
                )
                cfg = Seq2SeqConfig.from_dict(cfg.to_dict())
                ckpt, _ = generative_backend.train_seq2seq(
                    split, cfg, spec, pipeline, dataset_hash
                )
                eval_part = split.test or split.train
                report = generative_backend.evaluate_seq2seq(eval_part, ckpt, max_n=2)
                row.update(
                    status="ok",
                    bleu_1=report.bleu[1],
                    bleu_2=report.bleu[2],
                    per_token_accuracy=report.per_token_accuracy,
                )
            else:
                raise ValueError(f"unknown model kind {cell.model_kind!r}")
        except Exception as e:
            row.update(status="FAILED", error=f"{type(e).__name__}: {e}")
            row["traceback"] = traceback.format_exc(limit=3)
        rows.append(row)

    return {
        "stand_ins": STAND_INS,
        "seed": spec.seed,
        "dataset_hash": dataset_hash,
        "training_spec": spec.to_dict(),
        "rows": rows,
    }


def format_table(result: dict) -> str:
    lines = ["model       stemming  status  metrics"]
    for row in result["rows"]:
        if row["status"] != "ok":
            metrics = row.get("error", "")
        elif row["model"] == "retrieval":
            metrics = (
                f"acc={row['accuracy']:.4f} micro_f1={row['micro_f1']:.4f} "
                f"macro_f1={row['macro_f1']:.4f}"
            )
        else:
            metrics = (
                f"bleu1={row['bleu_1']:.4f} bleu2={row['bleu_2']:.4f} "
                f"tok_acc={row['per_token_accuracy']:.4f}"
            )
        lines.append(
            f"{row['model']:<11} {str(row['stemming']):<9} {row['status']:<7} {metrics}"
        )
    return "\n".join(lines)


def save_result(result: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(result, ensure_ascii=False, indent=2), encoding="utf-8"
    )
