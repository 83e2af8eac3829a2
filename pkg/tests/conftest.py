import json

import numpy as np
import pytest

from sambad import generative_backend as gb
from sambad import retrieval_backend as rb
from sambad.corpus import DatasetSplit, QAPair
from sambad.generative_backend import Seq2SeqConfig
from sambad.retrieval_backend import EncoderClassifierConfig
from sambad.textkit import PipelineConfig
from sambad.training import TrainingSpec

TOY_CATEGORIES = ["समय", "खाना", "व्यायाम", "जाँच"]

TOY_QUESTIONS = {
    0: ["गर्भावस्था कति समय हुन्छ", "गर्भ कति हप्ता रहन्छ",
        "बच्चा कहिले जन्मिन्छ", "गर्भावस्था अवधि कति हो"],
    1: ["गर्भमा के खाने", "कस्तो खाना राम्रो हुन्छ",
        "के खानु उचित छ", "पोषण कस्तो चाहिन्छ"],
    2: ["व्यायाम गर्न हुन्छ", "कस्तो व्यायाम राम्रो",
        "योग गर्न मिल्छ", "हिँड्न कति हिँड्ने"],
    3: ["जाँच कहिले गराउने", "कति पटक जाँच गर्ने",
        "चिकित्सक कहिले भेट्ने", "परीक्षण कहिले गर्नुपर्छ"],
}

TOY_QA = [
    ("गर्भावस्था कति समय हुन्छ", "गर्भावस्था करिब चालीस हप्ता हुन्छ"),
    ("के खाना राम्रो हुन्छ", "हरियो सागसब्जी र फलफूल राम्रो हुन्छ"),
    ("व्यायाम गर्न मिल्छ", "हल्का व्यायाम गर्न मिल्छ"),
    ("जाँच कहिले गराउने", "हरेक महिना जाँच गराउनुहोस्"),
    ("पानी कति पिउने", "दिनमा आठ गिलास पानी पिउनुहोस्"),
    ("औषधि खान हुन्छ", "चिकित्सकको सल्लाह बिना औषधि नखानुहोस्"),
    ("सुत्ने तरिका कस्तो", "देब्रे कोल्टे सुत्नु राम्रो हुन्छ"),
    ("चिया पिउन हुन्छ", "धेरै चिया पिउनु हुँदैन"),
]


def make_retrieval_toy() -> list[QAPair]:
    pairs = []
    i = 0
    for cat, questions in TOY_QUESTIONS.items():
        for q in questions:
            pairs.append(QAPair(i, q, f"उत्तर {TOY_CATEGORIES[cat]}", cat))
            i += 1
    return pairs


def make_generative_toy() -> list[QAPair]:
    return [QAPair(i, q, a, 0) for i, (q, a) in enumerate(TOY_QA)]


@pytest.fixture(scope="session")
def retrieval_toy_pairs():
    return make_retrieval_toy()


@pytest.fixture(scope="session")
def generative_toy_pairs():
    return make_generative_toy()


def train_toy_retrieval(pairs, seed=0, epochs=200):
    split = DatasetSplit(list(pairs), [], [], seed=seed)
    pipeline = PipelineConfig(max_len=10)
    cfg = EncoderClassifierConfig(
        vocab_size=4, n_classes=4, d_model=32, n_heads=2, n_layers=1,
        d_ff=64, max_len=10, dropout_rate=0.0,
    )
    spec = TrainingSpec(learning_rate=1e-3, batch_size=16, epochs=epochs, seed=seed)
    return rb.train_classifier(split, cfg, spec, pipeline)


def train_toy_generative(pairs, seed=0, epochs=500):
    split = DatasetSplit(list(pairs), [], [], seed=seed)
    pipeline = PipelineConfig(max_len=12)
    cfg = Seq2SeqConfig(
        vocab_size=4, d_model=32, n_heads=2, n_enc_layers=1, n_dec_layers=1,
        d_ff=64, max_len=12, dropout_rate=0.0, max_decode_len=12,
    )
    spec = TrainingSpec(learning_rate=1e-3, batch_size=8, epochs=epochs, seed=seed)
    return gb.train_seq2seq(split, cfg, spec, pipeline)


@pytest.fixture(scope="session")
def retrieval_toy_checkpoint(retrieval_toy_pairs):
    ckpt, log = train_toy_retrieval(retrieval_toy_pairs)
    return ckpt, log


@pytest.fixture(scope="session")
def generative_toy_checkpoint(generative_toy_pairs):
    ckpt, log = train_toy_generative(generative_toy_pairs)
    return ckpt, log


def write_toy_jsonl(path, n_per_cat=25):
    """100-pair single-answer-per-category dataset for split/CLI tests."""
    rng = np.random.default_rng(7)
    fillers = ["कृपया", "अलि", "राम्ररी", "छिटै", "सधैं"]
    with open(path, "w", encoding="utf-8") as fh:
        for cat, questions in TOY_QUESTIONS.items():
            for k in range(n_per_cat):
                base = questions[k % len(questions)]
                filler = fillers[int(rng.integers(len(fillers)))]
                rec = {
                    "question": f"{base} {filler} {k}",
                    "answer": f"उत्तर {TOY_CATEGORIES[cat]}",
                    "category": TOY_CATEGORIES[cat],
                }
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return path
