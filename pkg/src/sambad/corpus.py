"""Dataset ingestion, deduplication, deterministic splitting, statistics.

Canonical ingestion format is UTF-8 JSON-lines, one object per line with
``question``, ``answer`` and ``category`` string fields (an optional integer
``id`` is honored when present). Category names are interned to dense
integer ids in first-appearance order.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import textkit
from .errors import DuplicateId, EmptyDataset, ParseError, TooFewPairs
from .textkit import PipelineConfig


@dataclass(frozen=True)
class QAPair:
    id: int
    question_raw: str
    answer: str
    category_id: int


@dataclass
class Dataset:
    """Sequence of QAPairs plus the interned category name table."""

    pairs: list[QAPair]
    categories: list[str]

    def __iter__(self) -> Iterator[QAPair]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]


@dataclass
class DatasetSplit:
    train: list[QAPair]
    validation: list[QAPair]
    test: list[QAPair]
    seed: int


@dataclass
class CorpusStats:
    n_pairs: int
    n_categories: int
    vocab_size_raw: int
    vocab_size_stemmed: int
    max_question_len: int
    max_answer_len: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def load_dataset(path: str | Path) -> Dataset:
    pairs: list[QAPair] = []
    categories: list[str] = []
    cat_ids: dict[str, int] = {}
    seen_ids: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(lineno, f"invalid JSON: {e.msg}") from e
            if not isinstance(rec, dict):
                raise ParseError(lineno, "expected a JSON object")
            try:
                question = rec["question"]
                answer = rec["answer"]
                category = rec["category"]
            except KeyError as e:
                raise ParseError(lineno, f"missing field {e.args[0]!r}") from e
            if not all(isinstance(v, str) for v in (question, answer, category)):
                raise ParseError(lineno, "question/answer/category must be strings")
            pair_id = rec.get("id", len(pairs))
            if not isinstance(pair_id, int) or pair_id < 0:
                raise ParseError(lineno, "id must be a non-negative integer")
            if pair_id in seen_ids:
                raise DuplicateId(f"id {pair_id} appears twice (line {lineno})")
            seen_ids.add(pair_id)
            if category not in cat_ids:
                cat_ids[category] = len(categories)
                categories.append(category)
            pairs.append(QAPair(pair_id, question, answer, cat_ids[category]))
    if not pairs:
        raise EmptyDataset(f"no records in {path}")
    return Dataset(pairs, categories)


def convert_csv(csv_path: str | Path, jsonl_path: str | Path) -> int:
    """CSV (question,answer,category columns) -> canonical JSON-lines."""
    n = 0
    with open(csv_path, encoding="utf-8", newline="") as src, open(
        jsonl_path, "w", encoding="utf-8"
    ) as dst:
        reader = csv.DictReader(src)
        for lineno, row in enumerate(reader, start=2):
            try:
                rec = {
                    "question": row["question"],
                    "answer": row["answer"],
                    "category": row["category"],
                }
            except KeyError as e:
                raise ParseError(lineno, f"missing column {e.args[0]!r}") from e
            dst.write(json.dumps(rec, ensure_ascii=False) + "\n")
            n += 1
    return n


def write_jsonl(pairs: Iterable[QAPair], categories: Sequence[str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            rec = {
                "id": p.id,
                "question": p.question_raw,
                "answer": p.answer,
                "category": categories[p.category_id],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def content_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def deduplicate(pairs: Sequence[QAPair], cfg: PipelineConfig | None = None) -> list[QAPair]:
    """Drop pairs whose normalized question AND answer match an earlier pair."""
    cfg = cfg or PipelineConfig()
    seen: set[tuple[str, str]] = set()
    kept = []
    for p in pairs:
        key = (textkit.normalize(p.question_raw, cfg), textkit.normalize(p.answer, cfg))
        if key in seen:
            continue
        seen.add(key)
        kept.append(p)
    return kept


def split(
    pairs: Sequence[QAPair],
    ratios: tuple[float, float, float] = (0.7, 0.2, 0.1),
    seed: int = 0,
) -> DatasetSplit:
    """Seeded shuffle then contiguous 70/20/10 partition, stratified per
    category when the category has >= 10 members; smaller categories go
    entirely to train.

    Per-category counts for validation and test are rounded with running
    error diffusion across categories, so the overall proportions stay
    within one item of the requested ratios rather than drifting by one
    item per category.
    """
    if len(pairs) < 10:
        raise TooFewPairs(f"need at least 10 pairs, got {len(pairs)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must sum to 1")
    by_cat: dict[int, list[QAPair]] = {}
    for p in pairs:
        by_cat.setdefault(p.category_id, []).append(p)
    rng = np.random.default_rng(seed)
    train: list[QAPair] = []
    val: list[QAPair] = []
    test: list[QAPair] = []
    val_target = val_taken = 0.0
    test_target = test_taken = 0.0
    for cat in sorted(by_cat):
        members = by_cat[cat]
        if len(members) < 10:
            train.extend(members)
            continue
        order = rng.permutation(len(members))
        shuffled = [members[i] for i in order]
        n = len(shuffled)
        val_target += ratios[1] * n
        test_target += ratios[2] * n
        n_val = int(round(val_target - val_taken))
        n_test = int(round(test_target - test_taken))
        val_taken += n_val
        test_taken += n_test
        n_train = n - n_val - n_test
        train.extend(shuffled[:n_train])
        val.extend(shuffled[n_train : n_train + n_val])
        test.extend(shuffled[n_train + n_val :])
    return DatasetSplit(train, val, test, seed)


def stats(pairs: Sequence[QAPair], cfg: PipelineConfig) -> CorpusStats:
    """Token-level stats post-normalization; vocab sizes with and without
    stemming over questions and answers combined, min frequency 1."""
    if not pairs:
        return CorpusStats(0, 0, 0, 0, 0, 0)
    raw_cfg = PipelineConfig(
        max_len=cfg.max_len,
        apply_stemming=False,
        remove_stopwords=cfg.remove_stopwords,
        strip_latin=cfg.strip_latin,
        stopword_list=cfg.stopword_list,
        suffix_table=cfg.suffix_table,
    )
    stem_cfg = PipelineConfig(
        max_len=cfg.max_len,
        apply_stemming=True,
        remove_stopwords=cfg.remove_stopwords,
        strip_latin=cfg.strip_latin,
        stopword_list=cfg.stopword_list,
        suffix_table=cfg.suffix_table,
    )
    docs_raw, docs_stem = [], []
    max_q = max_a = 0
    for p in pairs:
        q_raw = textkit.preprocess(p.question_raw, raw_cfg)
        a_raw = textkit.preprocess(p.answer, raw_cfg)
        docs_raw.extend([q_raw, a_raw])
        docs_stem.extend(
            [textkit.preprocess(p.question_raw, stem_cfg), textkit.preprocess(p.answer, stem_cfg)]
        )
        max_q = max(max_q, len(q_raw))
        max_a = max(max_a, len(a_raw))
    n_tokens = sum(len(d) for d in docs_raw)
    if n_tokens == 0:
        vocab_raw = vocab_stem = 0
    else:
        vocab_raw = len(textkit.build_vocabulary(docs_raw, 1))
        vocab_stem = len(textkit.build_vocabulary(docs_stem, 1))
    return CorpusStats(
        n_pairs=len(pairs),
        n_categories=len({p.category_id for p in pairs}),
        vocab_size_raw=vocab_raw,
        vocab_size_stemmed=vocab_stem,
        max_question_len=max_q,
        max_answer_len=max_a,
    )
