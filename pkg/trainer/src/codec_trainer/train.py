"""Training loop for the sentence codec.

Cross-entropy over all positions.  Phase one trains with soft
(unquantized) bits so the bottleneck organizes quickly; phase two switches
to straight-through quantization with bit flips at the 4-QAM error rate of
an effective SNR drawn uniformly per sample from the target range (a slice
of each batch stays clean so the noiseless path never regresses).  Seeded
end to end; the loss curve is returned and stored with checkpoints.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch

from .data import Vocabulary
from .model import CodecSpec, SentenceCodec, ber_for_esnr_db

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    n_bits: int = 1000
    words_per_chunk: int = 30
    soft_steps: int = 400
    hard_steps: int = 1600
    batch_size: int = 32
    lr: float = 1e-3
    lr_warmup_steps: int = 200
    esnr_range_db: tuple = (4.0, 16.0)
    clean_fraction: float = 0.25
    corpus_fraction: float = 0.3
    seed: int = 0


def word_error_rate(model: SentenceCodec, chunks: np.ndarray, esnr_db: float,
                    seed: int = 0, batch_size: int = 256) -> float:
    """Fraction of non-pad words decoded wrongly after bit flips at the
    4-QAM rate for the given effective SNR."""
    generator = torch.Generator().manual_seed(seed)
    ber = float(ber_for_esnr_db(esnr_db))
    errors = total = 0
    model.eval()
    with torch.no_grad():
        for start in range(0, len(chunks), batch_size):
            tokens = torch.from_numpy(chunks[start:start + batch_size])
            bits = model.encode(tokens)
            if ber > 0:
                flips = (torch.rand(bits.shape, generator=generator)
                         < ber).to(bits.dtype)
                bits = bits + flips - 2.0 * bits * flips
            decoded = model.decode(bits)
            mask = tokens != 0
            errors += int(((decoded != tokens) & mask).sum())
            total += int(mask.sum())
    return errors / max(total, 1)


def train(chunks: np.ndarray, vocabulary: Vocabulary,
          config: TrainConfig) -> tuple[SentenceCodec, list]:
    """Train one codec on the given chunk pool; returns (model, loss log)."""
    if config.words_per_chunk != chunks.shape[1]:
        raise ValueError("chunk length does not match the configuration")
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    spec = CodecSpec(vocab_size=vocabulary.size, vocab_sha256=vocabulary.sha256,
                     words_per_chunk=config.words_per_chunk,
                     n_bits=config.n_bits)
    model = SentenceCodec(spec)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.lr)
    total_steps = config.soft_steps + config.hard_steps

    def lr_lambda(step):
        warm = min(1.0, (step + 1) / config.lr_warmup_steps)
        cool = 0.5 * (1.0 + np.cos(np.pi * step / max(total_steps, 1)))
        return warm * max(cool, 0.05)

    schedule = torch.optim.lr_scheduler.LambdaLR(optimizer, lr_lambda)
    loss_fn = torch.nn.CrossEntropyLoss()
    losses = []
    model.train()
    L = config.words_per_chunk
    for step in range(total_steps):
        # Corpus rows teach the task distribution; the rest of every batch
        # is freshly sampled word sequences, so only the general copy code
        # (never memorization) drives the loss down.
        n_corpus = int(round(config.corpus_fraction * config.batch_size))
        idx = rng.integers(0, len(chunks), size=n_corpus)
        fresh = rng.integers(2, vocabulary.size,
                             size=(config.batch_size - n_corpus, L))
        pad_from = rng.integers(L // 3, L + 1,
                                size=config.batch_size - n_corpus)
        fresh[np.arange(L)[None, :] >= pad_from[:, None]] = 0
        batch = np.concatenate([chunks[idx], fresh.astype(np.int64)])
        tokens = torch.from_numpy(batch)
        hard = step >= config.soft_steps
        ber = None
        if hard:
            # Per-sample channel draw; a slice of the batch stays clean.
            esnr = rng.uniform(*config.esnr_range_db,
                               size=(config.batch_size, 1))
            ber_col = ber_for_esnr_db(torch.from_numpy(esnr)).to(torch.float32)
            clean = int(config.clean_fraction * config.batch_size)
            ber_col[:clean] = 0.0
            ber = ber_col
        logits = model(tokens, ber=ber, hard=hard)
        loss = loss_fn(logits.flatten(0, 1), tokens.flatten())
        optimizer.zero_grad()
        loss.backward()
        # Clipping keeps the trajectory stable against the run-to-run float
        # noise of multithreaded CPU reductions.
        torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
        optimizer.step()
        schedule.step()
        losses.append(loss.item())
        if step % 200 == 0 or step == total_steps - 1:
            logger.info("step %d/%d (%s) loss %.4f", step, total_steps,
                        "hard" if hard else "soft", losses[-1])
    model.eval()
    return model, losses
