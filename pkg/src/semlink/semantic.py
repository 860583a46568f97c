"""Semantic transmission path: fixed-length sentence chunks through a
word-error channel calibrated against (bit budget, effective SNR) tables.

The neural sentence codec is abstracted as an i.i.d. word-substitution
channel: every non-pad word is independently replaced with a uniformly
random different vocabulary word with the calibrated word error rate.
Calibration tables are CSV files and form the contract with the external
codec trainer.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, effective_snr_db
from .textnorm import join_sentences, split_sentences

logger = logging.getLogger(__name__)

PAD_TOKEN = "<pad>"
OOV_TOKEN = "<unk>"


class MissingCalibrationError(KeyError):
    """Raised when a bit budget has no calibration rows."""


@dataclass(frozen=True)
class SemanticCodecConfig:
    """Chunking and bit-budget parameters of the sentence codec."""

    vocabulary: tuple
    words_per_chunk: int = 30
    n_bits: int = 1000
    n_prime_bits: int = 2000

    def __post_init__(self):
        if self.words_per_chunk < 1:
            raise ValueError("words_per_chunk must be >= 1")
        if self.n_prime_bits <= self.n_bits:
            raise ValueError("key-item budget must exceed the normal budget")
        if not self.vocabulary or self.vocabulary[0] != PAD_TOKEN:
            raise ValueError("vocabulary must start with the pad token")
        object.__setattr__(self, "vocabulary", tuple(self.vocabulary))

    @property
    def word_index(self) -> dict:
        if not hasattr(self, "_word_index"):
            object.__setattr__(self, "_word_index",
                               {w: i for i, w in enumerate(self.vocabulary)})
        return self._word_index

    def vocab_hash(self) -> str:
        payload = json.dumps(list(self.vocabulary), ensure_ascii=False).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()


def build_config(vocabulary_words, words_per_chunk: int = 30,
                 n_bits: int = 1000, n_prime_bits: int = 2000) -> SemanticCodecConfig:
    """Assemble a config with pad/oov tokens prepended and markers included."""
    words = [PAD_TOKEN, OOV_TOKEN]
    words += [f"[K{j}]" for j in range(1, 100)]
    seen = set(words)
    for w in vocabulary_words:
        if w not in seen:
            seen.add(w)
            words.append(w)
    return SemanticCodecConfig(vocabulary=tuple(words),
                               words_per_chunk=words_per_chunk,
                               n_bits=n_bits, n_prime_bits=n_prime_bits)


@dataclass(frozen=True)
class SentenceChunk:
    """Exactly L word indices, right-padded; tracks its source sentence."""

    tokens: tuple
    pad_count: int
    sentence_id: int = 0
    terminator: str = "."

    def __post_init__(self):
        if self.pad_count >= len(self.tokens):
            raise ValueError("all-pad chunks are forbidden")


def segment(text: str, config: SemanticCodecConfig) -> list:
    """Split text into fixed-length chunks of vocabulary indices.

    Sentences longer than L words are divided into consecutive L-word
    chunks; the final short chunk is padded.  Out-of-vocabulary words map
    to the reserved OOV token and are logged.
    """
    chunks = []
    if not text.strip():
        return chunks
    L = config.words_per_chunk
    index = config.word_index
    oov_idx = index[OOV_TOKEN]
    for sid, (tokens, terminator) in enumerate(split_sentences(text)):
        ids = []
        for tok in tokens:
            ti = index.get(tok)
            if ti is None:
                logger.info("out-of-vocabulary word %r mapped to %s", tok, OOV_TOKEN)
                ti = oov_idx
            ids.append(ti)
        for start in range(0, len(ids), L):
            piece = ids[start:start + L]
            pad_count = L - len(piece)
            piece = piece + [0] * pad_count
            chunks.append(SentenceChunk(tokens=tuple(piece), pad_count=pad_count,
                                        sentence_id=sid, terminator=terminator))
    return chunks


def desegment(chunks, config: SemanticCodecConfig) -> str:
    """Inverse of segment: drop pads, rejoin words, restore terminators."""
    if not chunks:
        return ""
    vocab = config.vocabulary
    sentences = {}
    order = []
    for chunk in chunks:
        words = [vocab[t] for t in chunk.tokens[:len(chunk.tokens) - chunk.pad_count]]
        if chunk.sentence_id not in sentences:
            sentences[chunk.sentence_id] = ([], chunk.terminator)
            order.append(chunk.sentence_id)
        sentences[chunk.sentence_id][0].extend(words)
    return join_sentences([sentences[sid] for sid in order])


@dataclass(frozen=True)
class CalibrationTable:
    """Word error rate as a function of (bit budget, effective SNR in dB)."""

    rows: tuple  # of (n_bits, esnr_db, wer), sorted
    provenance: str = "paper-anchored"

    def __post_init__(self):
        by_n = {}
        for n, e, w in self.rows:
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"wer {w} out of [0, 1]")
            by_n.setdefault(int(n), []).append((float(e), float(w)))
        repaired = []
        for n, pts in sorted(by_n.items()):
            if len(pts) < 2:
                raise ValueError(f"need at least two esnr points for n_bits={n}")
            pts.sort()
            wers = _isotonic_decreasing([w for _, w in pts])
            if any(abs(a - b[1]) > 1e-12 for a, b in zip(wers, pts)):
                logger.warning(
                    "calibration rows for n_bits=%d were not monotone in esnr; "
                    "applied isotonic repair", n)
            repaired.extend((n, e, w) for (e, _), w in zip(pts, wers))
        object.__setattr__(self, "rows", tuple(repaired))
        object.__setattr__(self, "_grid",
                           {n: ([e for _, e, _ in rows], [w for _, _, w in rows])
                            for n, rows in _group_by_n(repaired).items()})

    def budgets(self) -> list:
        return sorted(self._grid)

    def lookup(self, n_bits: int, esnr_db: float) -> float:
        """Linear interpolation in esnr_db, clamped outside the grid."""
        grid = self._grid.get(int(n_bits))
        if grid is None:
            raise MissingCalibrationError(
                f"no calibration rows for n_bits={n_bits}")
        es, ws = grid
        return float(np.interp(esnr_db, es, ws))


def _group_by_n(rows) -> dict:
    out = {}
    for n, e, w in rows:
        out.setdefault(n, []).append((n, e, w))
    return out


def _isotonic_decreasing(values) -> list:
    """Pool-adjacent-violators for a non-increasing sequence."""
    blocks = [[v, 1] for v in values]
    i = 0
    while i < len(blocks) - 1:
        if blocks[i][0] < blocks[i + 1][0] - 1e-15:
            total = blocks[i][0] * blocks[i][1] + blocks[i + 1][0] * blocks[i + 1][1]
            count = blocks[i][1] + blocks[i + 1][1]
            blocks[i] = [total / count, count]
            del blocks[i + 1]
            if i > 0:
                i -= 1
        else:
            i += 1
    out = []
    for value, count in blocks:
        out.extend([value] * count)
    return out


def wer_lookup(table: CalibrationTable, n_bits: int, esnr_db: float) -> float:
    return table.lookup(n_bits, esnr_db)


def load_calibration(path_or_buffer) -> CalibrationTable:
    """Parse the calibration CSV contract.

    Format: UTF-8 CSV with header ``n_bits,esnr_db,wer``, rows sorted by
    (n_bits, esnr_db), and optional ``#`` comment lines; a comment starting
    ``# provenance:`` tags the table origin.
    """
    if hasattr(path_or_buffer, "read"):
        raw = path_or_buffer.read()
    else:
        with open(path_or_buffer, "r", encoding="utf-8") as fh:
            raw = fh.read()
    provenance = "unknown"
    data_lines = []
    for line in raw.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.lower().startswith("provenance:"):
                provenance = body.split(":", 1)[1].strip()
            continue
        data_lines.append(stripped)
    reader = csv.DictReader(io.StringIO("\n".join(data_lines)))
    if reader.fieldnames != ["n_bits", "esnr_db", "wer"]:
        raise ValueError("calibration CSV header must be n_bits,esnr_db,wer")
    rows = []
    for record in reader:
        rows.append((int(record["n_bits"]), float(record["esnr_db"]),
                     float(record["wer"])))
    return CalibrationTable(rows=tuple(rows), provenance=provenance)


def save_calibration(table: CalibrationTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# provenance: {table.provenance}\n")
        fh.write("n_bits,esnr_db,wer\n")
        for n, e, w in sorted(table.rows):
            fh.write(f"{n},{e:g},{w:g}\n")


def default_calibration() -> CalibrationTable:
    from importlib.resources import files
    return load_calibration(io.StringIO(
        files("semlink.data").joinpath("calibration_paper.csv").read_text("utf-8")))


def ablation_calibration() -> CalibrationTable:
    from importlib.resources import files
    return load_calibration(io.StringIO(
        files("semlink.data").joinpath("calibration_ablation.csv").read_text("utf-8")))


class SemanticChannel:
    """Word-substitution channel driven by a calibration table."""

    def __init__(self, config: SemanticCodecConfig, table: CalibrationTable):
        self.config = config
        self.table = table

    def _resolve_esnr_db(self, realization_or_esnr, beta: float = 1.0) -> float:
        if isinstance(realization_or_esnr, ChannelRealization):
            return effective_snr_db(realization_or_esnr.snr_linear, beta)
        return float(realization_or_esnr)

    def bits_on_air(self, text: str, n_bits: int | None = None) -> int:
        n = self.config.n_bits if n_bits is None else int(n_bits)
        return n * len(segment(text, self.config))

    def send(self, text: str, n_bits: int, realization_or_esnr, seed: int,
             beta: float = 1.0) -> tuple[str, int]:
        """Segment, corrupt non-pad words at the calibrated rate, reassemble.

        Returns (received_text, bits_on_air); bits depend only on the text
        and budget, never on the channel.
        """
        esnr_db = self._resolve_esnr_db(realization_or_esnr, beta)
        wer = self.table.lookup(n_bits, esnr_db)
        chunks = segment(text, self.config)
        rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
        vocab_size = len(self.config.vocabulary)
        received = []
        for chunk in chunks:
            tokens = np.array(chunk.tokens)
            n_real = len(tokens) - chunk.pad_count
            flips = rng.random(n_real) < wer
            if flips.any():
                tokens = tokens.copy()
                for pos in np.flatnonzero(flips):
                    # Uniform over the vocabulary excluding pad and the original.
                    draw = rng.integers(1, vocab_size - 1)
                    if draw >= tokens[pos]:
                        draw += 1
                    tokens[pos] = draw
            received.append(SentenceChunk(tokens=tuple(int(t) for t in tokens),
                                          pad_count=chunk.pad_count,
                                          sentence_id=chunk.sentence_id,
                                          terminator=chunk.terminator))
        bits = n_bits * len(chunks)
        return desegment(received, self.config), int(bits)


def send_semantic(text: str, config: SemanticCodecConfig, table: CalibrationTable,
                  n_bits: int, realization_or_esnr, seed: int,
                  beta: float = 1.0) -> tuple[str, int]:
    return SemanticChannel(config, table).send(text, n_bits, realization_or_esnr,
                                               seed, beta)
