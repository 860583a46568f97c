"""Conventional transmission path: Huffman source coding plus rate-1/2
LDPC channel coding over the simulated link.

Decoding is best-effort end to end, so a noisy channel produces the kind
of character-level corruption a real bit pipeline would, instead of
raising errors.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelRealization, McsProfile, bit_flip_probs, transmit_bits
from .huffman import HuffmanCodebook, huffman_decode, huffman_encode
from .ldpc import LdpcCode, bsc_llrs, default_code


class ClassicPipeline:
    """Bundles a shared codebook and LDPC code into one send operation."""

    def __init__(self, codebook: HuffmanCodebook, code: LdpcCode | None = None):
        self.codebook = codebook
        self.code = code if code is not None else default_code()

    def bits_on_air(self, text: str) -> int:
        """Channel bits for a text: source bits / code rate, whole blocks."""
        source_bits = huffman_encode(text, self.codebook).size
        blocks = -(-source_bits // self.code.k)
        return blocks * self.code.n

    def send(self, text: str, realization: ChannelRealization,
             mcs: McsProfile, seed: int) -> tuple[str, int]:
        """Transmit text over all subcarriers; returns (received_text, bits)."""
        source = huffman_encode(text, self.codebook)
        blocks = -(-source.size // self.code.k)
        padded = np.zeros(blocks * self.code.k, dtype=np.uint8)
        padded[:source.size] = source
        codewords = self.code.encode(padded.reshape(blocks, self.code.k))

        on_air = codewords.reshape(-1)
        indices = np.arange(realization.num_subcarriers)
        received = transmit_bits(on_air, realization, indices, mcs, seed)
        flip_p = bit_flip_probs(realization, indices, on_air.size)

        llrs = bsc_llrs(received, flip_p).reshape(blocks, self.code.n)
        decoded, _ = self.code.decode(llrs)
        message_bits = self.code.extract_message(decoded).reshape(-1)
        text_out = huffman_decode(message_bits, self.codebook)
        return text_out, int(on_air.size)


def send_classic(text: str, realization: ChannelRealization, mcs: McsProfile,
                 seed: int, codebook: HuffmanCodebook,
                 code: LdpcCode | None = None) -> tuple[str, int]:
    return ClassicPipeline(codebook, code).send(text, realization, mcs, seed)
