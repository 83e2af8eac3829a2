import numpy as np
import pytest

from sambad import generative_backend as gb
from sambad import textkit
from sambad.errors import EmptyAfterPreprocessing, EmptyEvalSet
from sambad.generative_backend import StopReason
from sambad.textkit import END_ID, PAD_ID, START_ID

from conftest import train_toy_generative


class TestTrainSeq2Seq:
    def test_overfits_toy_corpus(self, generative_toy_checkpoint, generative_toy_pairs):
        ckpt, log = generative_toy_checkpoint
        assert log[-1].train_acc >= 0.95
        model = gb.load_model(ckpt)
        exact = 0
        for p in generative_toy_pairs:
            answer, trace = gb.generate(p.question_raw, ckpt, model)
            ref = " ".join(t.surface for t in textkit.preprocess(p.answer, ckpt.pipeline))
            exact += answer == ref
        assert exact >= 6

    def test_teacher_forced_loss_converges(self, generative_toy_checkpoint):
        _, log = generative_toy_checkpoint
        assert log[-1].train_loss < 0.05

    def test_determinism(self, generative_toy_pairs):
        _, log_a = train_toy_generative(generative_toy_pairs, epochs=5)
        _, log_b = train_toy_generative(generative_toy_pairs, epochs=5)
        assert log_a == log_b


class TestGenerate:
    def test_trace_contract(self, generative_toy_checkpoint):
        ckpt, _ = generative_toy_checkpoint
        model = gb.load_model(ckpt)
        _, trace = gb.generate("गर्भावस्था कति समय हुन्छ", ckpt, model)
        assert len(trace.emitted) <= ckpt.model_config["max_decode_len"]
        assert trace.emitted.count(END_ID) <= 1
        if END_ID in trace.emitted:
            assert trace.emitted[-1] == END_ID
            assert trace.stop_reason == StopReason.END_TOKEN
        assert PAD_ID not in trace.emitted[:-1]
        assert START_ID not in trace.emitted
        assert len(trace.step_probs) == len(trace.emitted)

    def test_empty_after_preprocessing(self, generative_toy_checkpoint):
        ckpt, _ = generative_toy_checkpoint
        with pytest.raises(EmptyAfterPreprocessing):
            gb.generate("???", ckpt)

    def test_deterministic(self, generative_toy_checkpoint):
        ckpt, _ = generative_toy_checkpoint
        model = gb.load_model(ckpt)
        a, _ = gb.generate("पानी कति पिउने", ckpt, model)
        b, _ = gb.generate("पानी कति पिउने", ckpt, model)
        assert a == b


class TestCausality:
    def test_future_corruption_leaves_logits_bit_identical(self, generative_toy_checkpoint):
        ckpt, _ = generative_toy_checkpoint
        model = gb.load_model(ckpt)
        vocab_size = ckpt.model_config["vocab_size"]
        rng = np.random.default_rng(0)
        src = np.asarray(
            [textkit.encode(
                textkit.preprocess("जाँच कहिले गराउने", ckpt.pipeline),
                ckpt.vocab, ckpt.pipeline,
            )],
            dtype=np.int64,
        )
        tgt = np.asarray([[START_ID, 5, 6, 7, 8, 9]], dtype=np.int64)
        memory, src_mask = model.encode(src)
        base = model.decode(tgt, memory, src_mask).data
        t = 2
        for _ in range(10):
            corrupted = tgt.copy()
            corrupted[0, t + 1 :] = rng.integers(vocab_size, size=tgt.shape[1] - t - 1)
            out = model.decode(corrupted, memory, src_mask).data
            assert np.array_equal(out[0, : t + 1], base[0, : t + 1])


class TestEvaluate:
    def test_bleu_one_on_overfit_train(self, generative_toy_checkpoint, generative_toy_pairs):
        ckpt, _ = generative_toy_checkpoint
        report = gb.evaluate_seq2seq(generative_toy_pairs, ckpt, max_n=2)
        assert report.bleu[1] >= 0.9
        assert report.bleu[1] >= report.bleu[2] - 1e-12
        assert report.per_token_accuracy >= 0.95

    def test_empty_eval_set(self, generative_toy_checkpoint):
        ckpt, _ = generative_toy_checkpoint
        with pytest.raises(EmptyEvalSet):
            gb.evaluate_seq2seq([], ckpt)
