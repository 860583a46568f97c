"""Shared text conventions: whitespace tokenization, sentence splitting and
the normalization applied before goal matching."""

from __future__ import annotations

import re

SENTENCE_TERMINATORS = {".", "!", "?"}
MARKER_RE = re.compile(r"^\[[Kk]\d{1,2}\]$")
NUMBER_RE = re.compile(r"^\d+(\.\d+)?$")


def tokenize(text: str) -> list:
    return text.split()


def is_marker(token: str) -> bool:
    return bool(MARKER_RE.match(token))


def is_number(token: str) -> bool:
    return bool(NUMBER_RE.match(token))


def normalize(text: str) -> str:
    """Lowercase and collapse whitespace; used on both sides of matching."""
    return " ".join(text.lower().split())


def split_sentences(text: str) -> list:
    """Split tokenized text into (tokens, terminator) sentences.

    A terminator is a standalone '.', '!' or '?' token, a token-final
    terminator character, or a newline.  Empty sentences are skipped.
    """
    sentences = []
    current = []
    for line in text.split("\n"):
        for raw in line.split():
            if raw in SENTENCE_TERMINATORS:
                if current:
                    sentences.append((current, raw))
                    current = []
                continue
            if raw[-1] in SENTENCE_TERMINATORS and len(raw) > 1:
                current.append(raw[:-1])
                sentences.append((current, raw[-1]))
                current = []
            else:
                current.append(raw)
        if current:
            sentences.append((current, "."))
            current = []
    return sentences


def join_sentences(sentences) -> str:
    parts = []
    for tokens, terminator in sentences:
        parts.append(" ".join(tokens) + " " + terminator)
    return " ".join(parts)
