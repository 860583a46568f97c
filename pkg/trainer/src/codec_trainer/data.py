"""Trainer inputs: the vocabulary and corpus files exported by the
simulator CLI (`semlink export --vocab ... --corpus ...`).

The vocabulary hash is verified before any training; chunking mirrors the
simulator's segmentation (whitespace words, fixed length, right-padded).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

PAD_INDEX = 0
TERMINATORS = {".", "!", "?"}


class VocabularyMismatch(ValueError):
    """The vocabulary file does not match its recorded hash."""


@dataclass(frozen=True)
class Vocabulary:
    words: tuple
    sha256: str

    @property
    def size(self) -> int:
        return len(self.words)

    def index(self) -> dict:
        return {w: i for i, w in enumerate(self.words)}


def load_vocabulary(path) -> Vocabulary:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    words = tuple(payload["words"])
    digest = hashlib.sha256(
        json.dumps(list(words), ensure_ascii=False).encode("utf-8")).hexdigest()
    if digest != payload.get("sha256"):
        raise VocabularyMismatch(
            f"vocabulary hash mismatch: file says {payload.get('sha256')!r}, "
            f"contents give {digest!r}")
    return Vocabulary(words=words, sha256=digest)


def chunk_line(line: str, index: dict, length: int) -> list:
    """Fixed-length index chunks for one corpus line; unknown words map to
    index 1, matching the simulator's reserved token."""
    tokens = [t for t in line.split() if t not in TERMINATORS]
    if not tokens:
        return []
    ids = [index.get(t, 1) for t in tokens]
    chunks = []
    for start in range(0, len(ids), length):
        piece = ids[start:start + length]
        piece = piece + [PAD_INDEX] * (length - len(piece))
        chunks.append(piece)
    return chunks


def load_corpus_chunks(path, vocabulary: Vocabulary, length: int) -> np.ndarray:
    index = vocabulary.index()
    chunks = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            chunks.extend(chunk_line(line, index, length))
    if not chunks:
        raise ValueError(f"corpus {path} produced no chunks")
    return np.asarray(chunks, dtype=np.int64)


def random_chunks(vocabulary: Vocabulary, length: int, count: int,
                  seed: int) -> np.ndarray:
    """Uniform word sequences; teaching arbitrary-content reconstruction
    keeps the codec from memorizing corpus phrasing."""
    rng = np.random.default_rng(seed)
    body = rng.integers(2, vocabulary.size, size=(count, length))
    # Random right-padding so padded sentences are in-distribution too.
    lengths = rng.integers(length // 3, length + 1, size=count)
    mask = np.arange(length)[None, :] >= lengths[:, None]
    body[mask] = PAD_INDEX
    return body.astype(np.int64)


def split_heldout(chunks: np.ndarray, fraction: float, seed: int):
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(chunks))
    cut = max(1, int(len(chunks) * fraction))
    return chunks[order[cut:]], chunks[order[:cut]]
