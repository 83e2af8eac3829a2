#!/usr/bin/env python3
"""Run the stemmed-vs-raw x retrieval-vs-generative grid on a dataset.

Thin wrapper over the library so the experiment is reproducible from one
command; all heavy lifting lives in sambad.ablation.
"""

import argparse

from sambad import ablation, corpus
from sambad.generative_backend import Seq2SeqConfig
from sambad.retrieval_backend import EncoderClassifierConfig
from sambad.textkit import PipelineConfig
from sambad.training import TrainingSpec


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", required=True, help="JSONL question/answer file")
    parser.add_argument("--out", help="where to write the result JSON")
    parser.add_argument("--max-len", type=int, default=250)
    parser.add_argument("--d-model", type=int, default=64)
    parser.add_argument("--n-heads", type=int, default=4)
    parser.add_argument("--n-layers", type=int, default=1)
    parser.add_argument("--d-ff", type=int, default=128)
    parser.add_argument("--dropout", type=float, default=0.1)
    parser.add_argument("--learning-rate", type=float, default=1e-3)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    dataset = corpus.load_dataset(args.dataset)
    dataset_hash = corpus.content_hash(args.dataset)
    pipeline = PipelineConfig(max_len=args.max_len)
    spec = TrainingSpec(
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
    )
    retrieval_cfg = EncoderClassifierConfig(
        vocab_size=4,
        n_classes=max(2, len(dataset.categories)),
        d_model=args.d_model,
        n_heads=args.n_heads,
        n_layers=args.n_layers,
        d_ff=args.d_ff,
        max_len=args.max_len,
        dropout_rate=args.dropout,
    )
    generative_cfg = Seq2SeqConfig(
        vocab_size=4,
        d_model=args.d_model,
        n_heads=args.n_heads,
        n_enc_layers=args.n_layers,
        n_dec_layers=args.n_layers,
        d_ff=args.d_ff,
        max_len=args.max_len,
        dropout_rate=args.dropout,
        max_decode_len=args.max_len,
    )
    result = ablation.run_ablation(
        dataset,
        ablation.default_grid(),
        pipeline,
        spec,
        retrieval_cfg,
        generative_cfg,
        dataset_hash,
    )
    if args.out:
        ablation.save_result(result, args.out)
    print(ablation.format_table(result))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
