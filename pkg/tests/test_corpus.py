import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sambad import corpus
from sambad.corpus import QAPair, deduplicate, load_dataset, split, stats
from sambad.errors import DuplicateId, EmptyDataset, ParseError, TooFewPairs
from sambad.textkit import PipelineConfig

from conftest import write_toy_jsonl

CFG = PipelineConfig(max_len=250)


def _write(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestLoadDataset:
    def test_category_interning(self, tmp_path):
        p = _write(
            tmp_path / "d.jsonl",
            [
                json.dumps({"question": "क", "answer": "ख", "category": "एक"}, ensure_ascii=False),
                json.dumps({"question": "ग", "answer": "घ", "category": "दुई"}, ensure_ascii=False),
                json.dumps({"question": "ङ", "answer": "च", "category": "एक"}, ensure_ascii=False),
            ],
        )
        ds = load_dataset(p)
        assert len(ds) == 3
        assert ds.categories == ["एक", "दुई"]
        assert [q.category_id for q in ds] == [0, 1, 0]

    def test_empty_file(self, tmp_path):
        p = _write(tmp_path / "d.jsonl", [""])
        with pytest.raises(EmptyDataset):
            load_dataset(p)

    def test_malformed_line_number(self, tmp_path):
        p = _write(
            tmp_path / "d.jsonl",
            [
                json.dumps({"question": "क", "answer": "ख", "category": "एक"}),
                "{not json",
            ],
        )
        with pytest.raises(ParseError) as e:
            load_dataset(p)
        assert e.value.line == 2

    def test_missing_field(self, tmp_path):
        p = _write(tmp_path / "d.jsonl", [json.dumps({"question": "क", "answer": "ख"})])
        with pytest.raises(ParseError):
            load_dataset(p)

    def test_duplicate_id(self, tmp_path):
        rec = {"id": 5, "question": "क", "answer": "ख", "category": "एक"}
        p = _write(tmp_path / "d.jsonl", [json.dumps(rec), json.dumps(rec)])
        with pytest.raises(DuplicateId):
            load_dataset(p)


class TestConvertCsv:
    def test_roundtrip(self, tmp_path):
        csv_path = tmp_path / "d.csv"
        csv_path.write_text(
            "question,answer,category\nक,ख,एक\nग,घ,दुई\n", encoding="utf-8"
        )
        out = tmp_path / "d.jsonl"
        assert corpus.convert_csv(csv_path, out) == 2
        ds = load_dataset(out)
        assert [p.question_raw for p in ds] == ["क", "ग"]


class TestDeduplicate:
    def test_exact_duplicate_dropped(self):
        pairs = [QAPair(0, "क?", "ख", 0), QAPair(1, "क", "ख", 0), QAPair(2, "ग", "घ", 0)]
        kept = deduplicate(pairs, CFG)
        assert [p.id for p in kept] == [0, 2]

    def test_same_question_different_answer_kept(self):
        pairs = [QAPair(0, "क", "ख", 0), QAPair(1, "क", "ग", 0)]
        assert len(deduplicate(pairs, CFG)) == 2

    def test_idempotent(self):
        pairs = [QAPair(i, f"प्रश्न {i % 3}", "उत्तर", 0) for i in range(9)]
        once = deduplicate(pairs, CFG)
        assert deduplicate(once, CFG) == once


class TestSplit:
    def _pairs(self, n, cat=0, start=0):
        return [QAPair(start + i, f"प्रश्न {start + i}", "उत्तर", cat) for i in range(n)]

    def test_70_20_10(self):
        s = split(self._pairs(100), seed=0)
        assert (len(s.train), len(s.validation), len(s.test)) == (70, 20, 10)

    def test_deterministic(self):
        pairs = self._pairs(100)
        a = split(pairs, seed=3)
        b = split(pairs, seed=3)
        assert [p.id for p in a.train] == [p.id for p in b.train]
        assert [p.id for p in a.test] == [p.id for p in b.test]

    def test_small_category_goes_to_train(self):
        pairs = self._pairs(100, cat=0) + self._pairs(5, cat=1, start=100)
        s = split(pairs, seed=0)
        small = [p for p in s.train if p.category_id == 1]
        assert len(small) == 5
        assert not any(p.category_id == 1 for p in s.validation + s.test)

    def test_too_few(self):
        with pytest.raises(TooFewPairs):
            split(self._pairs(9), seed=0)

    @given(st.integers(min_value=0, max_value=2**31), st.integers(min_value=10, max_value=60))
    @settings(max_examples=30, deadline=None)
    def test_partition_property(self, seed, n):
        pairs = self._pairs(n)
        s = split(pairs, seed=seed)
        ids = sorted(p.id for p in s.train + s.validation + s.test)
        assert ids == [p.id for p in pairs]
        assert len(set(p.id for p in s.train) & set(p.id for p in s.test)) == 0
        assert len(set(p.id for p in s.train) & set(p.id for p in s.validation)) == 0


class TestStats:
    def test_max_question_len(self):
        st_ = stats([QAPair(0, "क ख ग", "उत्तर", 0)], CFG)
        assert st_.max_question_len == 3
        assert st_.n_pairs == 1
        assert st_.n_categories == 1

    def test_stemming_merges_forms(self):
        # केटा / केटाहरू collapse under stemming: one fewer vocab entry
        pairs = [QAPair(0, "केटा आयो", "केटाहरू आए", 0)]
        st_ = stats(pairs, CFG)
        assert st_.vocab_size_stemmed == st_.vocab_size_raw - 1

    def test_empty(self):
        st_ = stats([], CFG)
        assert st_.to_dict() == {
            "n_pairs": 0, "n_categories": 0, "vocab_size_raw": 0,
            "vocab_size_stemmed": 0, "max_question_len": 0, "max_answer_len": 0,
        }

    def test_stemmed_never_bigger(self, tmp_path):
        path = write_toy_jsonl(tmp_path / "toy.jsonl")
        ds = load_dataset(path)
        st_ = stats(ds.pairs, CFG)
        assert st_.vocab_size_stemmed <= st_.vocab_size_raw
