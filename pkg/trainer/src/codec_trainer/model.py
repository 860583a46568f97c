"""Sentence codec: transformer encoder/decoder around a 1-bit bottleneck.

The encoder embeds a fixed-length word-index chunk, runs three attention
blocks at hidden size 128, and projects the flattened, normalized sequence
down to n logits squashed into [0, 1]; one-bit quantization with a
straight-through gradient surrogate yields the transmitted bits.  The
decoder mirrors the encoder and picks each word by argmax over the
dictionary (output weights tied to the embedding).

Initialization matters on a small training budget: the bottleneck linears
start near zero so the sigmoid stays in its responsive band, and the
positional code is sinusoidal so the copy structure is available from the
first step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn


@dataclass(frozen=True)
class CodecSpec:
    vocab_size: int
    vocab_sha256: str
    words_per_chunk: int = 30
    hidden: int = 128
    blocks: int = 3
    n_bits: int = 1000


class StraightThroughQuantizer(torch.autograd.Function):
    """Hard 1-bit quantization forward, identity gradient backward."""

    @staticmethod
    def forward(ctx, soft):
        return (soft > 0.5).to(soft.dtype)

    @staticmethod
    def backward(ctx, grad_output):
        return grad_output


def quantize_ste(soft: torch.Tensor) -> torch.Tensor:
    return soft + (StraightThroughQuantizer.apply(soft) - soft).detach()


def flip_bits(bits: torch.Tensor, ber: torch.Tensor) -> torch.Tensor:
    """Binary symmetric channel on {0,1} tensors; ber broadcasts per row."""
    flips = (torch.rand_like(bits) < ber).to(bits.dtype)
    return bits + flips - 2.0 * bits * flips


def ber_for_esnr_db(esnr_db):
    """Gray-coded 4-QAM bit error probability at the given effective SNR."""
    snr = 10.0 ** (torch.as_tensor(esnr_db, dtype=torch.float64) / 10.0)
    return torch.special.erfc(torch.sqrt(snr) / math.sqrt(2.0)) / 2.0


def _blocks(hidden: int, count: int) -> nn.TransformerEncoder:
    layer = nn.TransformerEncoderLayer(
        d_model=hidden, nhead=4, dim_feedforward=2 * hidden,
        dropout=0.0, batch_first=True, norm_first=True)
    return nn.TransformerEncoder(layer, num_layers=count,
                                 enable_nested_tensor=False)


def _sinusoidal(length: int, hidden: int) -> torch.Tensor:
    position = torch.arange(length).unsqueeze(1)
    rate = torch.exp(torch.arange(0, hidden, 2) * (-math.log(10000.0) / hidden))
    table = torch.zeros(length, hidden)
    table[:, 0::2] = torch.sin(position * rate)
    table[:, 1::2] = torch.cos(position * rate)
    return table


class SentenceCodec(nn.Module):
    def __init__(self, spec: CodecSpec):
        super().__init__()
        self.spec = spec
        L, H = spec.words_per_chunk, spec.hidden
        self.embedding = nn.Embedding(spec.vocab_size, H)
        self.register_buffer("positions", _sinusoidal(L, H))
        self.encoder_blocks = _blocks(H, spec.blocks)
        self.pre_bits_norm = nn.LayerNorm(H)
        self.to_bits = nn.Linear(L * H, spec.n_bits)
        self.from_bits = nn.Linear(spec.n_bits, L * H)
        self.decoder_blocks = _blocks(H, spec.blocks)
        self.out_norm = nn.LayerNorm(H)
        nn.init.normal_(self.to_bits.weight, std=0.02)
        nn.init.zeros_(self.to_bits.bias)
        nn.init.normal_(self.from_bits.weight, std=0.02)
        nn.init.zeros_(self.from_bits.bias)

    def encode_soft(self, tokens: torch.Tensor) -> torch.Tensor:
        x = self.embedding(tokens) + self.positions
        x = self.pre_bits_norm(self.encoder_blocks(x))
        return torch.sigmoid(self.to_bits(x.flatten(1)))

    def encode(self, tokens: torch.Tensor) -> torch.Tensor:
        return quantize_ste(self.encode_soft(tokens))

    def decode_logits(self, bits: torch.Tensor) -> torch.Tensor:
        L, H = self.spec.words_per_chunk, self.spec.hidden
        x = self.from_bits(bits).view(-1, L, H)
        x = self.out_norm(self.decoder_blocks(x))
        return x @ self.embedding.weight.T

    def decode(self, bits: torch.Tensor) -> torch.Tensor:
        return self.decode_logits(bits).argmax(dim=-1)

    def forward(self, tokens: torch.Tensor, ber: torch.Tensor | None = None,
                hard: bool = True) -> torch.Tensor:
        soft = self.encode_soft(tokens)
        bits = quantize_ste(soft) if hard else soft
        if ber is not None:
            bits = flip_bits(bits, ber)
        return self.decode_logits(bits)


def save_checkpoint(model: SentenceCodec, path, extra=None) -> None:
    payload = {"spec": model.spec.__dict__, "state": model.state_dict()}
    if extra:
        payload["extra"] = extra
    torch.save(payload, path)


def load_checkpoint(path) -> SentenceCodec:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    model = SentenceCodec(CodecSpec(**payload["spec"]))
    model.load_state_dict(payload["state"])
    model.eval()
    return model
