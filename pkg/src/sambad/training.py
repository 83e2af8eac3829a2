"""Shared training configuration and loop utilities for both backends."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np


@dataclass
class TrainingSpec:
    learning_rate: float = 3e-5
    batch_size: int = 32
    epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size <= 0 or self.epochs <= 0:
            raise ValueError("learning_rate, batch_size and epochs must be positive")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingSpec":
        return cls(**d)


@dataclass
class EpochLogRow:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


def write_epoch_log(rows: list[EpochLogRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "train_acc", "val_loss", "val_acc"])
        for r in rows:
            writer.writerow([r.epoch, f"{r.train_loss:.8f}", f"{r.train_acc:.8f}",
                             f"{r.val_loss:.8f}", f"{r.val_acc:.8f}"])


def minibatches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Seeded shuffle, then contiguous index batches."""
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]
