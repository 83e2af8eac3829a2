"""Devanagari-aware text normalization, tokenization, stemming and encoding.

Every function here is pure: same input, same output, no hidden state.
The stemmer is a table-driven longest-suffix-match stripper for Nepali
inflectional endings (plural, case and honorific markers) with a minimum
remaining-stem guard, shipped as ``data/nepali_suffixes.tsv``.
"""

from __future__ import annotations

import hashlib
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyCorpus, UnknownId

PAD_ID, UNK_ID, START_ID, END_ID = 0, 1, 2, 3
SPECIAL_TOKENS = ("<pad>", "<unk>", "<s>", "</s>")

SCRIPT_DEVANAGARI = "devanagari"
SCRIPT_LATIN = "latin"
SCRIPT_DIGIT = "digit"
SCRIPT_OTHER = "other"

_DANDA = "।"
_DOUBLE_DANDA = "॥"


def _classify_codepoint(ch: str) -> str:
    cp = ord(ch)
    if 0x0900 <= cp <= 0x097F and not ch.isdigit():
        return SCRIPT_DEVANAGARI
    if ch.isdigit():
        return SCRIPT_DIGIT
    if (0x41 <= cp <= 0x5A) or (0x61 <= cp <= 0x7A) or (0xC0 <= cp <= 0x24F):
        return SCRIPT_LATIN
    return SCRIPT_OTHER


def classify_script(surface: str) -> str:
    """Majority codepoint class of a token; ties go to Devanagari first."""
    counts = Counter(_classify_codepoint(ch) for ch in surface)
    order = (SCRIPT_DEVANAGARI, SCRIPT_LATIN, SCRIPT_DIGIT, SCRIPT_OTHER)
    return max(order, key=lambda s: (counts.get(s, 0), -order.index(s)))


@dataclass(frozen=True)
class Token:
    surface: str
    script_class: str

    @classmethod
    def of(cls, surface: str) -> "Token":
        return cls(surface, classify_script(surface))


def load_suffix_table(path: str | Path) -> list[tuple[str, int]]:
    """Parse a ``<suffix>\\t<min_remaining>`` file; ``#`` lines are comments."""
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        suffix, min_rem = line.split("\t")
        entries.append((suffix, int(min_rem)))
    entries.sort(key=lambda e: (-len(e[0]), e[0]))
    return entries


def load_stopwords(path: str | Path) -> set[str]:
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return words


def default_suffix_table() -> list[tuple[str, int]]:
    with resources.as_file(resources.files("sambad.data") / "nepali_suffixes.tsv") as p:
        return load_suffix_table(p)


@dataclass
class PipelineConfig:
    max_len: int = 250
    apply_stemming: bool = False
    remove_stopwords: bool = False
    strip_latin: bool = True
    stopword_list: frozenset[str] = frozenset()
    suffix_table: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if not self.suffix_table:
            self.suffix_table = tuple(default_suffix_table())
        else:
            self.suffix_table = tuple(
                sorted(self.suffix_table, key=lambda e: (-len(e[0]), e[0]))
            )
        self.stopword_list = frozenset(self.stopword_list)

    def to_dict(self) -> dict:
        return {
            "max_len": self.max_len,
            "apply_stemming": self.apply_stemming,
            "remove_stopwords": self.remove_stopwords,
            "strip_latin": self.strip_latin,
            "stopword_list": sorted(self.stopword_list),
            "suffix_table": [[s, m] for s, m in self.suffix_table],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        return cls(
            max_len=d["max_len"],
            apply_stemming=d["apply_stemming"],
            remove_stopwords=d["remove_stopwords"],
            strip_latin=d["strip_latin"],
            stopword_list=frozenset(d.get("stopword_list", ())),
            suffix_table=tuple((s, m) for s, m in d.get("suffix_table", ())),
        )


def normalize(raw: str, cfg: PipelineConfig) -> str:
    """NFC-normalize, drop punctuation (incl. danda), collapse whitespace."""
    text = unicodedata.normalize("NFC", raw)
    kept = []
    for ch in text:
        if ch in (_DANDA, _DOUBLE_DANDA):
            continue
        if unicodedata.category(ch).startswith("P"):
            continue
        kept.append(ch)
    # removing characters can expose new composable sequences; re-NFC so
    # normalize stays idempotent
    words = unicodedata.normalize("NFC", "".join(kept)).split()
    if cfg.strip_latin:
        words = [w for w in words if classify_script(w) != SCRIPT_LATIN]
    return " ".join(words)


def tokenize(text: str) -> list[Token]:
    return [Token.of(w) for w in text.split()]


def stem(token: Token, cfg: PipelineConfig) -> Token:
    """Strip the longest matching suffix, at most once, Devanagari only."""
    if token.script_class != SCRIPT_DEVANAGARI:
        return token
    for suffix, min_remaining in cfg.suffix_table:
        if token.surface.endswith(suffix):
            remaining = len(token.surface) - len(suffix)
            if remaining >= min_remaining:
                return Token.of(token.surface[:remaining])
            # longest-match semantics: a shorter suffix may still qualify
            continue
    return token


def preprocess(raw: str, cfg: PipelineConfig) -> list[Token]:
    """normalize -> tokenize -> optional stem -> optional stopword removal."""
    tokens = tokenize(normalize(raw, cfg))
    if cfg.apply_stemming:
        tokens = [stem(t, cfg) for t in tokens]
    if cfg.remove_stopwords:
        tokens = [t for t in tokens if t.surface not in cfg.stopword_list]
    return tokens


class Vocabulary:
    """Immutable token<->id bijection with reserved specials at ids 0..3."""

    def __init__(self, corpus_tokens: Sequence[str], min_frequency: int = 1):
        self.min_frequency = min_frequency
        self._id_to_token = list(SPECIAL_TOKENS) + list(corpus_tokens)
        self._token_to_id = {t: i for i, t in enumerate(self._id_to_token)}
        if len(self._token_to_id) != len(self._id_to_token):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def id_for(self, token: str) -> int:
        return self._token_to_id.get(token, UNK_ID)

    def token_for(self, idx: int) -> str:
        if idx < 0 or idx >= len(self._id_to_token):
            raise UnknownId(f"id {idx} outside vocabulary of size {len(self)}")
        return self._id_to_token[idx]

    @property
    def tokens(self) -> list[str]:
        return list(self._id_to_token)

    @property
    def corpus_tokens(self) -> list[str]:
        return self._id_to_token[len(SPECIAL_TOKENS):]

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for t in self._id_to_token:
            h.update(t.encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()


def _surfaces(seq: Iterable) -> list[str]:
    return [t.surface if isinstance(t, Token) else t for t in seq]


def build_vocabulary(corpus: Iterable[Sequence], min_frequency: int = 1) -> Vocabulary:
    """Specials first, then tokens by descending count, ties by codepoint order."""
    counts: Counter = Counter()
    for doc in corpus:
        counts.update(_surfaces(doc))
    if not counts:
        raise EmptyCorpus("corpus contains no tokens")
    kept = sorted(
        (t for t, c in counts.items() if c >= min_frequency),
        key=lambda t: (-counts[t], t),
    )
    return Vocabulary(kept, min_frequency)


def encode(
    tokens: Sequence,
    vocab: Vocabulary,
    cfg: PipelineConfig,
    add_bounds: bool = False,
) -> list[int]:
    """Fixed-length ids: optional START/END wrapping, PAD to cfg.max_len.

    Truncation keeps END as the final non-pad symbol when bounds are added.
    """
    max_len = cfg.max_len
    if add_bounds and max_len < 3:
        raise ValueError("max_len must be >= 3 when add_bounds")
    ids = [vocab.id_for(s) for s in _surfaces(tokens)]
    if add_bounds:
        ids = [START_ID] + ids
        if len(ids) >= max_len:
            ids = ids[: max_len - 1]
        ids = ids + [END_ID]
    elif len(ids) > max_len:
        ids = ids[:max_len]
    return ids + [PAD_ID] * (max_len - len(ids))


def decode(ids: Sequence[int], vocab: Vocabulary) -> str:
    specials = {PAD_ID, UNK_ID, START_ID, END_ID}
    words = [vocab.token_for(i) for i in ids if i not in specials]
    return " ".join(words)
