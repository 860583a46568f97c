"""Importance-aware framing: split a message into key items, marked
sentences and remainder, send each part over its own subchannel group with
its own bit budget, and reassemble on the far side.

Part 1 (key items with position markers) rides the widest budget on the
best subcarriers; parts 2 and 3 share the normal budget on the remaining
groups.  Empty parts transmit a one-chunk sentinel so the receiver can
tell absence from loss, and those bits are counted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .agents import (AgentKnowledge, compress, extract, reconstruct,
                     serialize_key_items)
from .channel import (ChannelRealization, group_esnr_db, partition_subchannels)
from .semantic import SemanticChannel, segment
from .textnorm import is_marker, join_sentences, split_sentences

logger = logging.getLogger(__name__)

EMPTY_SENTINEL = "part empty ."


@dataclass(frozen=True)
class PartitionedMessage:
    part1: str
    part2: str
    part3: str
    part1_empty: bool
    part2_empty: bool
    part3_empty: bool
    part2_order: tuple
    part3_order: tuple
    budgets: tuple  # (n_prime, n, n)

    def __post_init__(self):
        n_prime, n2, n3 = self.budgets
        if n_prime <= max(n2, n3):
            raise ValueError("key-item budget must exceed the normal budgets")


@dataclass(frozen=True)
class ReceivedParts:
    part1: str
    part2: str
    part3: str
    part1_empty: bool
    part2_empty: bool
    part3_empty: bool
    part2_order: tuple
    part3_order: tuple
    esnr_db: tuple
    bits: tuple

    @property
    def total_bits(self) -> int:
        return int(sum(self.bits))


def _align_order(original_sentences, compressed_text) -> tuple:
    """Map surviving compressed sentences back to original sentence ids.

    Compression preserves order and only drops or thins sentences, so a
    greedy token-subset walk recovers the id of each survivor.
    """
    survivors = split_sentences(compressed_text)
    ids = []
    search_from = 0
    for tokens, _ in survivors:
        # Compression may chain several originals; grow a window of
        # consecutive originals until it covers the survivor's tokens.
        token_set = set(tokens) - {";"}
        assigned = None
        for start in range(search_from, len(original_sentences)):
            window = set()
            for end in range(start, len(original_sentences)):
                window |= set(original_sentences[end][0])
                if token_set <= window:
                    assigned = original_sentences[start][2]
                    search_from = end + 1
                    break
            if assigned is not None:
                break
        if assigned is None:
            assigned = original_sentences[-1][2] if original_sentences else 0
        ids.append(assigned)
    return tuple(ids)


def partition(message: str, knowledge: AgentKnowledge,
              compression_target: float, n_bits: int = 1000,
              n_prime_bits: int = 2000) -> PartitionedMessage:
    """Extract key items, then compress the marked and remainder sentences."""
    if not message.strip():
        raise ValueError("cannot partition an empty message")
    items, marked_text = extract(message, knowledge)

    sentences = split_sentences(marked_text)
    marked, remainder = [], []
    for sid, (tokens, term) in enumerate(sentences):
        if any(is_marker(t) for t in tokens):
            marked.append((tokens, term, sid))
        else:
            remainder.append((tokens, term, sid))

    part1 = serialize_key_items(items)
    part1_empty = not part1

    if marked:
        marked_joined = join_sentences([(t, term) for t, term, _ in marked])
        part2 = compress(marked_joined, knowledge, compression_target,
                         abbreviate=False)
        part2_order = _align_order(marked, part2)
        part2_empty = False
    else:
        part2, part2_order, part2_empty = "", (), True

    if remainder:
        # The remainder carries what the extractor judged unimportant: when
        # key content exists its compression trims sentences without any
        # recognized key item.  A message with no key items at all is its
        # own remainder and compresses normally.
        remainder_joined = join_sentences([(t, term) for t, term, _ in remainder])
        aggressive = bool(items.items)
        part3 = compress(remainder_joined, knowledge, compression_target,
                         drop_unprotected=aggressive, allow_empty=aggressive)
        part3_order = _align_order(remainder, part3)
        part3_empty = not part3.strip()
    else:
        part3, part3_order, part3_empty = "", (), True

    return PartitionedMessage(part1=part1, part2=part2, part3=part3,
                              part1_empty=part1_empty, part2_empty=part2_empty,
                              part3_empty=part3_empty,
                              part2_order=part2_order, part3_order=part3_order,
                              budgets=(n_prime_bits, n_bits, n_bits))


def transmit_partitioned(pm: PartitionedMessage, realization: ChannelRealization,
                         channel: SemanticChannel, seed: int,
                         beta: float = 1.0) -> ReceivedParts:
    """Send the three parts over quality-sorted subchannel groups.

    Subcarriers are grouped in proportion to the parts' bit lengths; the
    best group carries part 1.  Per-part effective SNR drives the word
    channel at that part's budget.
    """
    texts = [pm.part1 if not pm.part1_empty else EMPTY_SENTINEL,
             pm.part2 if not pm.part2_empty else EMPTY_SENTINEL,
             pm.part3 if not pm.part3_empty else EMPTY_SENTINEL]
    budgets = pm.budgets
    chunk_counts = [len(segment(t, channel.config)) for t in texts]
    lengths = [b * c for b, c in zip(budgets, chunk_counts)]
    plan = partition_subchannels(realization, lengths)

    received, esnrs, bits = [], [], []
    seeds = np.random.SeedSequence(int(seed)).spawn(3)
    for part_idx in range(3):
        esnr = group_esnr_db(realization, plan, part_idx + 1, beta)
        part_seed = seeds[part_idx].generate_state(1)[0]
        text_out, b = channel.send(texts[part_idx], budgets[part_idx], esnr,
                                   int(part_seed))
        received.append(text_out)
        esnrs.append(esnr)
        bits.append(b)

    return ReceivedParts(
        part1="" if pm.part1_empty else received[0],
        part2="" if pm.part2_empty else received[1],
        part3="" if pm.part3_empty else received[2],
        part1_empty=pm.part1_empty, part2_empty=pm.part2_empty,
        part3_empty=pm.part3_empty,
        part2_order=pm.part2_order, part3_order=pm.part3_order,
        esnr_db=tuple(esnrs), bits=tuple(bits))


def reassemble(received: ReceivedParts, knowledge: AgentKnowledge) -> str:
    """Reconstruct the message from received parts; always returns text."""
    if received.part1_empty and received.part2_empty and received.part3_empty:
        return ""
    return reconstruct(received.part1, received.part2, received.part3,
                       part2_order=received.part2_order or None,
                       part3_order=received.part3_order or None)


def frame_trace(pm: PartitionedMessage, received: ReceivedParts) -> dict:
    """Audit record of one framed transmission for the session log."""
    return {
        "budgets": list(pm.budgets),
        "sent": [pm.part1, pm.part2, pm.part3],
        "received": [received.part1, received.part2, received.part3],
        "empty": [pm.part1_empty, pm.part2_empty, pm.part3_empty],
        "esnr_db": [round(e, 4) for e in received.esnr_db],
        "bits": list(received.bits),
    }
