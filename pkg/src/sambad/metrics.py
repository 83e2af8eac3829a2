"""Classification metrics and corpus BLEU, implemented from their definitions.

micro-F1 pools true/false positive/negative counts across classes; for
single-label multiclass data it coincides exactly with accuracy. BLEU is
the corpus-level score of Papineni et al.: clipped modified n-gram
precision, geometric mean over orders, brevity penalty. No smoothing.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .errors import EmptyCandidate, LengthMismatch


def _check_lengths(gold: Sequence[int], pred: Sequence[int]) -> None:
    if len(gold) != len(pred):
        raise LengthMismatch(f"gold has {len(gold)} labels, pred has {len(pred)}")
    if len(gold) == 0:
        raise LengthMismatch("empty label sequences")


def accuracy(gold: Sequence[int], pred: Sequence[int]) -> float:
    _check_lengths(gold, pred)
    return sum(g == p for g, p in zip(gold, pred)) / len(gold)


def confusion_counts(gold: Sequence[int], pred: Sequence[int]) -> dict[int, tuple[int, int, int]]:
    """Per-class (tp, fp, fn) over all classes seen in gold or pred."""
    _check_lengths(gold, pred)
    classes = set(gold) | set(pred)
    counts = {}
    for c in sorted(classes):
        tp = sum(1 for g, p in zip(gold, pred) if g == c and p == c)
        fp = sum(1 for g, p in zip(gold, pred) if g != c and p == c)
        fn = sum(1 for g, p in zip(gold, pred) if g == c and p != c)
        counts[c] = (tp, fp, fn)
    return counts


def micro_f1(gold: Sequence[int], pred: Sequence[int]) -> float:
    counts = confusion_counts(gold, pred)
    tp = sum(c[0] for c in counts.values())
    fp = sum(c[1] for c in counts.values())
    fn = sum(c[2] for c in counts.values())
    # 2PR/(P+R) in exact integer form; collapses to accuracy for
    # single-label data since there sum(fp) = sum(fn) = #errors
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2 * tp / denom


def macro_f1(gold: Sequence[int], pred: Sequence[int]) -> float:
    """Unweighted mean of per-class F1 over classes present in gold."""
    counts = confusion_counts(gold, pred)
    present = sorted(set(gold))
    f1s = []
    for c in present:
        tp, fp, fn = counts[c]
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(0.0 if p + r == 0 else 2 * p * r / (p + r))
    return sum(f1s) / len(f1s)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    candidates: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    max_n: int = 4,
) -> dict[int, float]:
    """Corpus BLEU-1..BLEU-max_n with brevity penalty min(1, e^(1-r/c)).

    One reference per candidate. BLEU-n is 0 whenever any order-k precision
    (k <= n) is 0. An individual empty candidate just contributes nothing;
    an entirely empty candidate corpus is an error.
    """
    if len(candidates) != len(references):
        raise LengthMismatch(
            f"{len(candidates)} candidates vs {len(references)} references"
        )
    if len(candidates) == 0:
        raise LengthMismatch("empty corpus")
    if not (1 <= max_n <= 4):
        raise ValueError("max_n must be in 1..4")
    c_total = sum(len(c) for c in candidates)
    r_total = sum(len(r) for r in references)
    if c_total == 0:
        raise EmptyCandidate("every candidate is empty")
    bp = min(1.0, math.exp(1.0 - r_total / c_total))
    precisions = []
    for n in range(1, max_n + 1):
        matched = total = 0
        for cand, ref in zip(candidates, references):
            cand_ngrams = _ngrams(cand, n)
            ref_ngrams = _ngrams(ref, n)
            total += sum(cand_ngrams.values())
            matched += sum(min(cnt, ref_ngrams[g]) for g, cnt in cand_ngrams.items())
        precisions.append(matched / total if total else 0.0)
    scores = {}
    for n in range(1, max_n + 1):
        ps = precisions[:n]
        if any(p == 0.0 for p in ps):
            scores[n] = 0.0
        else:
            scores[n] = bp * math.exp(sum(math.log(p) for p in ps) / n)
    return scores


@dataclass
class EvalReport:
    """Serializable evaluation summary shared by both backends."""

    n_samples: int
    accuracy: float | None = None
    micro_f1: float | None = None
    macro_f1: float | None = None
    per_class_counts: dict[int, tuple[int, int, int]] | None = None
    bleu: dict[int, float] | None = None
    per_token_accuracy: float | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d: dict = {"n_samples": self.n_samples}
        if self.accuracy is not None:
            d["accuracy"] = self.accuracy
        if self.micro_f1 is not None:
            d["micro_f1"] = self.micro_f1
        if self.macro_f1 is not None:
            d["macro_f1"] = self.macro_f1
        if self.per_class_counts is not None:
            d["per_class_counts"] = {
                str(c): {"tp": t[0], "fp": t[1], "fn": t[2]}
                for c, t in self.per_class_counts.items()
            }
        if self.bleu is not None:
            d["bleu"] = {str(n): s for n, s in self.bleu.items()}
        if self.per_token_accuracy is not None:
            d["per_token_accuracy"] = self.per_token_accuracy
        if self.notes:
            d["notes"] = self.notes
        return d
