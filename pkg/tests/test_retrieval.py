import numpy as np
import pytest

from sambad import retrieval_backend as rb
from sambad.corpus import DatasetSplit, QAPair
from sambad.errors import (
    EmptyAfterPreprocessing,
    EmptyEvalSet,
    UnseenCategoryInEval,
)
from sambad.retrieval_backend import EncoderClassifierConfig
from sambad.textkit import PipelineConfig
from sambad.training import TrainingSpec

from conftest import train_toy_retrieval


class TestTrainClassifier:
    def test_overfits_toy_corpus(self, retrieval_toy_checkpoint, retrieval_toy_pairs):
        ckpt, log = retrieval_toy_checkpoint
        assert log[-1].train_acc == 1.0
        model = rb.load_model(ckpt)
        for p in retrieval_toy_pairs:
            cat, conf, answer = rb.classify(p.question_raw, ckpt, model)
            assert cat == p.category_id
            assert conf > 0.9
            assert answer == p.answer

    def test_determinism(self, retrieval_toy_pairs):
        _, log_a = train_toy_retrieval(retrieval_toy_pairs, epochs=5)
        _, log_b = train_toy_retrieval(retrieval_toy_pairs, epochs=5)
        assert log_a == log_b

    def test_unseen_category_rejected(self, retrieval_toy_pairs):
        train = [p for p in retrieval_toy_pairs if p.category_id != 3]
        val = [p for p in retrieval_toy_pairs if p.category_id == 3]
        split = DatasetSplit(train, val, [], seed=0)
        cfg = EncoderClassifierConfig(
            vocab_size=4, n_classes=4, d_model=16, n_heads=2, n_layers=1,
            d_ff=32, max_len=10, dropout_rate=0.0,
        )
        spec = TrainingSpec(learning_rate=1e-3, batch_size=8, epochs=1, seed=0)
        with pytest.raises(UnseenCategoryInEval):
            rb.train_classifier(split, cfg, spec, PipelineConfig(max_len=10))

    def test_loss_trend_after_convergence(self, retrieval_toy_checkpoint):
        _, log = retrieval_toy_checkpoint
        # monotone non-increasing after epoch 20 within 5% band
        tail = [r.train_loss for r in log if r.epoch >= 20]
        for prev, cur in zip(tail, tail[1:]):
            assert cur <= prev * 1.05


class TestClassify:
    def test_confidence_in_open_interval(self, retrieval_toy_checkpoint):
        ckpt, _ = retrieval_toy_checkpoint
        cat, conf, _ = rb.classify("गर्भ बारे प्रश्न", ckpt)
        assert 0.0 < conf < 1.0
        assert cat < ckpt.model_config["n_classes"]

    def test_punctuation_invariance(self, retrieval_toy_checkpoint, retrieval_toy_pairs):
        ckpt, _ = retrieval_toy_checkpoint
        model = rb.load_model(ckpt)
        q = retrieval_toy_pairs[0].question_raw
        base, _, _ = rb.classify(q, ckpt, model)
        noisy, _, _ = rb.classify(f"  {q} !!?। ", ckpt, model)
        assert base == noisy

    def test_softmax_head_sums_to_one(self, retrieval_toy_checkpoint):
        from sambad.nn import autodiff as ad
        from sambad import textkit

        ckpt, _ = retrieval_toy_checkpoint
        model = rb.load_model(ckpt)
        tokens = textkit.preprocess("जाँच कहिले", ckpt.pipeline)
        ids = np.asarray(
            [textkit.encode(tokens, ckpt.vocab, ckpt.pipeline)], dtype=np.int64
        )
        probs = ad.softmax(model.forward(ids), -1).data
        assert abs(probs.sum() - 1.0) < 1e-9

    def test_empty_after_preprocessing(self, retrieval_toy_checkpoint):
        ckpt, _ = retrieval_toy_checkpoint
        with pytest.raises(EmptyAfterPreprocessing):
            rb.classify("!!! ???", ckpt)

    def test_deterministic_given_checkpoint(self, retrieval_toy_checkpoint):
        ckpt, _ = retrieval_toy_checkpoint
        a = rb.classify("खाना राम्रो", ckpt)
        b = rb.classify("खाना राम्रो", ckpt)
        assert a == b


class TestEvaluate:
    def test_perfect_predictions(self, retrieval_toy_checkpoint, retrieval_toy_pairs):
        ckpt, _ = retrieval_toy_checkpoint
        report = rb.evaluate_classifier(retrieval_toy_pairs, ckpt)
        assert report.accuracy == 1.0
        assert report.micro_f1 == 1.0

    def test_micro_f1_equals_accuracy(self, retrieval_toy_checkpoint, retrieval_toy_pairs):
        ckpt, _ = retrieval_toy_checkpoint
        report = rb.evaluate_classifier(retrieval_toy_pairs[:7], ckpt)
        assert report.micro_f1 == report.accuracy

    def test_empty_eval_set(self, retrieval_toy_checkpoint):
        ckpt, _ = retrieval_toy_checkpoint
        with pytest.raises(EmptyEvalSet):
            rb.evaluate_classifier([], ckpt)

    def test_random_weights_near_chance(self, retrieval_toy_pairs):
        # untrained model on a balanced 4-class set: accuracy far from 1
        split = DatasetSplit(list(retrieval_toy_pairs), [], [], seed=0)
        cfg = EncoderClassifierConfig(
            vocab_size=4, n_classes=4, d_model=16, n_heads=2, n_layers=1,
            d_ff=32, max_len=10, dropout_rate=0.0,
        )
        spec = TrainingSpec(learning_rate=1e-9, batch_size=16, epochs=1, seed=0)
        ckpt, _ = rb.train_classifier(split, cfg, spec, PipelineConfig(max_len=10))
        accs = []
        for seed in range(8):
            ckpt.weights = rb.EncoderClassifier(cfg, seed).export_parameters()
            report = rb.evaluate_classifier(retrieval_toy_pairs, ckpt)
            accs.append(report.accuracy)
        assert 0.0 <= np.mean(accs) <= 0.6  # chance is 0.25
