"""Command-line entry points: prepare, train, evaluate, ablate, chat,
serve, convert.

Every subcommand accepts ``--config <path>`` (a JSON object whose keys are
the long option names with dashes replaced by underscores) with explicit
flags taking precedence, plus ``--seed``. Exit codes: 0 success, 1 usage
error, 2 data error, 3 training/runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ablation, corpus, dialogue, generative_backend, retrieval_backend, textkit
from .checkpoint import ModelCheckpoint
from .corpus import DatasetSplit
from .errors import (
    DuplicateId,
    EmptyCorpus,
    EmptyDataset,
    ParseError,
    SambadError,
    TooFewPairs,
)
from .generative_backend import Seq2SeqConfig
from .retrieval_backend import EncoderClassifierConfig
from .textkit import PipelineConfig
from .training import TrainingSpec, write_epoch_log

DATA_ERRORS = (ParseError, DuplicateId, EmptyDataset, TooFewPairs, EmptyCorpus)


def _pipeline_from_args(args) -> PipelineConfig:
    stopwords = (
        frozenset(textkit.load_stopwords(args.stopword_file))
        if getattr(args, "stopword_file", None)
        else frozenset()
    )
    suffixes = (
        tuple(textkit.load_suffix_table(args.suffix_file))
        if getattr(args, "suffix_file", None)
        else ()
    )
    return PipelineConfig(
        max_len=args.max_len,
        apply_stemming=args.stem,
        remove_stopwords=bool(stopwords),
        strip_latin=not args.keep_latin,
        stopword_list=stopwords,
        suffix_table=suffixes,
    )


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-len", type=int, default=250)
    p.add_argument("--stem", action="store_true", help="apply suffix stemming")
    p.add_argument("--keep-latin", action="store_true")
    p.add_argument("--stopword-file")
    p.add_argument("--suffix-file")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d-model", type=int, default=128)
    p.add_argument("--n-heads", type=int, default=4)
    p.add_argument("--n-layers", type=int, default=2)
    p.add_argument("--d-ff", type=int, default=256)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--learning-rate", type=float, default=3e-5)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--epochs", type=int, default=20)


def cmd_convert(args) -> int:
    n = corpus.convert_csv(args.csv, args.out)
    print(f"wrote {n} records to {args.out}")
    return 0


def cmd_prepare(args) -> int:
    pipeline = _pipeline_from_args(args)
    dataset = corpus.load_dataset(args.dataset)
    dataset_hash = corpus.content_hash(args.dataset)
    pairs = corpus.deduplicate(dataset.pairs, pipeline)
    split = corpus.split(pairs, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus.write_jsonl(split.train, dataset.categories, out / "train.jsonl")
    corpus.write_jsonl(split.validation, dataset.categories, out / "val.jsonl")
    corpus.write_jsonl(split.test, dataset.categories, out / "test.jsonl")
    st = corpus.stats(pairs, pipeline)
    manifest = {
        "stats": st.to_dict(),
        "pipeline": pipeline.to_dict(),
        "seed": args.seed,
        "dataset_hash": dataset_hash,
        "categories": dataset.categories,
        "counts": {
            "train": len(split.train),
            "val": len(split.validation),
            "test": len(split.test),
        },
    }
    (out / "stats.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True),
        encoding="utf-8",
    )
    print(json.dumps(manifest["counts"]))
    return 0


def _load_prepared(data_dir: Path) -> tuple[DatasetSplit, PipelineConfig, dict]:
    manifest = json.loads((data_dir / "stats.json").read_text(encoding="utf-8"))
    pipeline = PipelineConfig.from_dict(manifest["pipeline"])
    cat_index = {name: i for i, name in enumerate(manifest["categories"])}

    def read_part(name):
        path = data_dir / f"{name}.jsonl"
        try:
            ds = corpus.load_dataset(path)
        except EmptyDataset:
            return []
        # re-map category ids to the manifest's global table
        return [
            corpus.QAPair(p.id, p.question_raw, p.answer, cat_index[ds.categories[p.category_id]])
            for p in ds.pairs
        ]

    split = DatasetSplit(
        read_part("train"), read_part("val"), read_part("test"), manifest["seed"]
    )
    return split, pipeline, manifest


def cmd_train(args) -> int:
    data_dir = Path(args.data_dir)
    split, pipeline, manifest = _load_prepared(data_dir)
    spec = TrainingSpec(
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.model == "retrieval":
        cfg = EncoderClassifierConfig(
            vocab_size=4,
            n_classes=len(manifest["categories"]),
            d_model=args.d_model,
            n_heads=args.n_heads,
            n_layers=args.n_layers,
            d_ff=args.d_ff,
            max_len=pipeline.max_len,
            dropout_rate=args.dropout,
        )
        ckpt, log = retrieval_backend.train_classifier(
            split, cfg, spec, pipeline, manifest["dataset_hash"], manifest["categories"]
        )
    else:
        cfg = Seq2SeqConfig(
            vocab_size=4,
            d_model=args.d_model,
            n_heads=args.n_heads,
            n_enc_layers=args.n_layers,
            n_dec_layers=args.n_layers,
            d_ff=args.d_ff,
            max_len=pipeline.max_len,
            dropout_rate=args.dropout,
            max_decode_len=pipeline.max_len,
        )
        ckpt, log = generative_backend.train_seq2seq(
            split, cfg, spec, pipeline, manifest["dataset_hash"]
        )
    ckpt.save(out)
    write_epoch_log(log, out.with_suffix(".epochs.csv"))
    last = log[-1]
    print(
        f"final epoch {last.epoch}: train_loss={last.train_loss:.4f} "
        f"train_acc={last.train_acc:.4f} val_acc={last.val_acc:.4f}"
    )
    return 0


def cmd_evaluate(args) -> int:
    ckpt = ModelCheckpoint.load(args.checkpoint)
    data_dir = Path(args.data)
    if data_dir.is_dir():
        split, _, _ = _load_prepared(data_dir)
        pairs = split.test
    else:
        ds = corpus.load_dataset(data_dir)
        pairs = ds.pairs
    if ckpt.model_kind == "retrieval":
        report = retrieval_backend.evaluate_classifier(pairs, ckpt)
    else:
        report = generative_backend.evaluate_seq2seq(pairs, ckpt, max_n=args.max_n)
    payload = json.dumps(report.to_dict(), ensure_ascii=False, indent=2)
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    print(payload)
    return 0


def cmd_ablate(args) -> int:
    dataset = corpus.load_dataset(args.dataset)
    dataset_hash = corpus.content_hash(args.dataset)
    pipeline = _pipeline_from_args(args)
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
        max_len=pipeline.max_len,
        dropout_rate=args.dropout,
    )
    generative_cfg = Seq2SeqConfig(
        vocab_size=4,
        d_model=args.d_model,
        n_heads=args.n_heads,
        n_enc_layers=args.n_layers,
        n_dec_layers=args.n_layers,
        d_ff=args.d_ff,
        max_len=pipeline.max_len,
        dropout_rate=args.dropout,
        max_decode_len=pipeline.max_len,
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


def _scope_vocab_for(ckpt: ModelCheckpoint, train_data: str | None):
    if train_data:
        ds = corpus.load_dataset(train_data)
        return dialogue.build_scope_vocab(ds.pairs, ckpt.pipeline)
    return ckpt.vocab


def cmd_chat(args) -> int:
    ckpt = ModelCheckpoint.load(args.checkpoint)
    scope = _scope_vocab_for(ckpt, args.train_data)
    if args.rules:
        rules = dialogue.load_rules(args.rules, scope)
    else:
        rules = dialogue.RuleSet(scope_vocab=scope)
    print("sambad chat — /quit to exit")
    for line in sys.stdin:
        text = line.rstrip("\n")
        if text.strip() == "/quit":
            break
        if not text.strip():
            continue
        turn = dialogue.handle(text, rules, ckpt, session_id="cli")
        conf = f" ({turn.confidence:.3f})" if turn.confidence is not None else ""
        print(f"[{turn.source.value}{conf}] {turn.reply}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    checkpoints = {}
    for path in args.checkpoint:
        ckpt = ModelCheckpoint.load(path)
        checkpoints[ckpt.model_kind] = ckpt
    primary = checkpoints.get("retrieval") or next(iter(checkpoints.values()))
    scope = _scope_vocab_for(primary, args.train_data)
    if args.rules:
        rules = dialogue.load_rules(args.rules, scope)
    else:
        rules = dialogue.RuleSet(scope_vocab=scope)
    app = create_app(checkpoints, rules, args.turn_log, args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sambad")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file of option defaults")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("convert", help="CSV -> canonical JSON-lines")
    common(p)
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("prepare", help="dedup, split and report stats")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    _add_pipeline_args(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train a backend on prepared splits")
    common(p)
    p.add_argument("--data-dir", required=True)
    p.add_argument("--model", choices=["retrieval", "generative"], required=True)
    p.add_argument("--out", required=True, help="checkpoint path (*.smbk)")
    _add_model_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="prepared dir or a .jsonl file")
    p.add_argument("--out")
    p.add_argument("--max-n", type=int, default=2)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="2x2 stemming-by-backend grid")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out")
    _add_pipeline_args(p)
    _add_model_args(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("chat", help="interactive terminal chat")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--rules")
    p.add_argument("--train-data", help="JSONL used to build the scope vocabulary")
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("serve", help="HTTP chat API")
    common(p)
    p.add_argument("--checkpoint", action="append", required=True)
    p.add_argument("--rules")
    p.add_argument("--train-data")
    p.add_argument("--turn-log")
    p.add_argument("--ui-dir")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def _apply_config_file(argv: list[str], parser: argparse.ArgumentParser) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
        explicit = set()
        for item in argv:
            if item.startswith("--"):
                explicit.add(item[2:].split("=")[0].replace("-", "_"))
        for key, value in overrides.items():
            key = key.replace("-", "_")
            if key not in explicit and hasattr(args, key):
                setattr(args, key, value)
    return args


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config_file(argv, parser)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        return args.func(args)
    except DATA_ERRORS as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except (SambadError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
