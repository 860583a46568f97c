"""Shared vocabulary and codec resources.

The word list covers everything the scenario generators and agent templates
can emit (content words enumerated from the generator pools, template and
boilerplate words, structural punctuation and position markers), so mock
sessions never hit the out-of-vocabulary token.  The same corpus also
trains the shared Huffman codebook; its transmission cost is excluded from
bandwidth accounting by design.
"""

from __future__ import annotations

import json
from functools import lru_cache

from . import agents, scenarios
from .huffman import HuffmanCodebook, huffman_build
from .semantic import SemanticCodecConfig, build_config

TEMPLATE_WORDS = """
task tidy the living room and report items you can see relocate each item
please confirm following relocations verify reverify final placement of
every position rereport these placements perform a full inspection sweep
warehouse together with any findings repeat list sensor reading readings
detail on your moved execution perception verification report verified
remains at i could not parse last instruction it intended spot for
confirmed finding warning detected near slight dust buildup observed
moisture patch knowledge update watch example part empty finished recovered
; : . ! ?
""".split()


def _filler_words() -> list:
    words = []
    for sentence in agents.ROBOT_FILLER + agents.BS_FILLER:
        words.extend(sentence.rstrip(" .").split())
    return words


def vocabulary_words() -> list:
    """All content words, sorted and de-duplicated."""
    seen = []
    have = set()
    for word in (scenarios.corpus_words() + TEMPLATE_WORDS + _filler_words()
                 + agents.CLARIFY_UNPARSED.split()):
        if word not in have:
            have.add(word)
            seen.append(word)
    return sorted(seen)


@lru_cache(maxsize=8)
def default_codec_config(words_per_chunk: int = 30, n_bits: int = 1000,
                         n_prime_bits: int = 2000) -> SemanticCodecConfig:
    return build_config(vocabulary_words(), words_per_chunk=words_per_chunk,
                        n_bits=n_bits, n_prime_bits=n_prime_bits)


def corpus_text(seeds=(1, 2, 3)) -> str:
    """Deterministic training text: rendered scenario material plus the
    full word inventory, one sentence per line."""
    lines = []
    for seed in seeds:
        state1, _ = scenarios.gen_case1(seed)
        for reading in state1.readings:
            lines.append(reading.render() + " .")
        for anomaly in state1.anomalies:
            lines.append(anomaly.render() + " .")
        state2, _ = scenarios.gen_case2(seed)
        for item in state2.items:
            lines.append("moved " + item.render_target() + " .")
            lines.append("i see " + item.render_origin() + " .")
    lines.extend(agents.ROBOT_FILLER)
    lines.extend(agents.BS_FILLER)
    words = vocabulary_words()
    for start in range(0, len(words), 24):
        lines.append(" ".join(words[start:start + 24]) + " .")
    return "\n".join(lines)


@lru_cache(maxsize=1)
def default_codebook() -> HuffmanCodebook:
    return huffman_build(corpus_text())


def export_vocabulary(path) -> None:
    """Vocabulary JSON consumed by the external codec trainer."""
    config = default_codec_config()
    payload = {
        "version": 1,
        "pad_token": config.vocabulary[0],
        "oov_token": config.vocabulary[1],
        "words": list(config.vocabulary),
        "sha256": config.vocab_hash(),
        "words_per_chunk": config.words_per_chunk,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=1)


def export_corpus(path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(corpus_text())
        fh.write("\n")
