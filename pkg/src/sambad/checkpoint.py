"""Versioned binary checkpoint container (``.smbk`` files).

Layout, all integers little-endian:

    magic   4 bytes  b"SMB1"
    version u32      currently 1
    hlen    u64      byte length of the UTF-8 JSON header
    header  hlen bytes
    count   u32      number of tensor blocks
    blocks  count x [ nlen u16 | name utf-8 | ndim u8 | dims u32* |
                      dtype u8 (0 = float64) | payload little-endian ]

The JSON header carries model kind, model/pipeline/training configs, the
vocabulary token list and its hash, the category answer index (retrieval),
the training seed and the dataset content hash, so any result is
reconstructible from the file alone.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SambadError
from .textkit import PipelineConfig, Vocabulary

MAGIC = b"SMB1"
VERSION = 1
_DTYPE_F64 = 0


class BadCheckpoint(SambadError):
    pass


@dataclass
class ModelCheckpoint:
    model_kind: str  # "retrieval" | "generative"
    model_config: dict
    training_spec: dict
    pipeline: PipelineConfig
    vocab: Vocabulary
    weights: dict[str, np.ndarray]
    seed: int
    dataset_hash: str = ""
    answer_index: dict[int, str] | None = None
    categories: list[str] | None = None
    extra: dict = field(default_factory=dict)

    def save(self, path: str | Path) -> None:
        header = {
            "model_kind": self.model_kind,
            "model_config": self.model_config,
            "training_spec": self.training_spec,
            "pipeline": self.pipeline.to_dict(),
            "vocab_tokens": self.vocab.corpus_tokens,
            "vocab_min_frequency": self.vocab.min_frequency,
            "vocab_hash": self.vocab.content_hash(),
            "seed": self.seed,
            "dataset_hash": self.dataset_hash,
            "answer_index": (
                {str(k): v for k, v in self.answer_index.items()}
                if self.answer_index is not None
                else None
            ),
            "categories": self.categories,
            "extra": self.extra,
        }
        hbytes = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", VERSION))
            fh.write(struct.pack("<Q", len(hbytes)))
            fh.write(hbytes)
            fh.write(struct.pack("<I", len(self.weights)))
            for name in sorted(self.weights):
                arr = np.ascontiguousarray(self.weights[name], dtype="<f8")
                nbytes = name.encode("utf-8")
                fh.write(struct.pack("<H", len(nbytes)))
                fh.write(nbytes)
                fh.write(struct.pack("<B", arr.ndim))
                for dim in arr.shape:
                    fh.write(struct.pack("<I", dim))
                fh.write(struct.pack("<B", _DTYPE_F64))
                fh.write(arr.tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "ModelCheckpoint":
        raw = Path(path).read_bytes()
        if raw[:4] != MAGIC:
            raise BadCheckpoint(f"{path}: bad magic {raw[:4]!r}")
        (version,) = struct.unpack_from("<I", raw, 4)
        if version != VERSION:
            raise BadCheckpoint(f"{path}: unsupported version {version}")
        (hlen,) = struct.unpack_from("<Q", raw, 8)
        off = 16
        header = json.loads(raw[off : off + hlen].decode("utf-8"))
        off += hlen
        (count,) = struct.unpack_from("<I", raw, off)
        off += 4
        weights: dict[str, np.ndarray] = {}
        for _ in range(count):
            (nlen,) = struct.unpack_from("<H", raw, off)
            off += 2
            name = raw[off : off + nlen].decode("utf-8")
            off += nlen
            ndim = raw[off]
            off += 1
            dims = struct.unpack_from(f"<{ndim}I", raw, off)
            off += 4 * ndim
            dtype = raw[off]
            off += 1
            if dtype != _DTYPE_F64:
                raise BadCheckpoint(f"{path}: unknown dtype code {dtype}")
            size = int(np.prod(dims)) if dims else 1
            arr = np.frombuffer(raw, dtype="<f8", count=size, offset=off).reshape(dims)
            off += 8 * size
            weights[name] = arr.astype(np.float64)
        vocab = Vocabulary(header["vocab_tokens"], header["vocab_min_frequency"])
        if vocab.content_hash() != header["vocab_hash"]:
            raise BadCheckpoint(f"{path}: vocabulary hash mismatch")
        answer_index = header.get("answer_index")
        if answer_index is not None:
            answer_index = {int(k): v for k, v in answer_index.items()}
        return cls(
            model_kind=header["model_kind"],
            model_config=header["model_config"],
            training_spec=header["training_spec"],
            pipeline=PipelineConfig.from_dict(header["pipeline"]),
            vocab=vocab,
            weights=weights,
            seed=header["seed"],
            dataset_hash=header.get("dataset_hash", ""),
            answer_index=answer_index,
            categories=header.get("categories"),
            extra=header.get("extra", {}),
        )
