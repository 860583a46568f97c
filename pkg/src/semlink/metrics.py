"""Task metrics over session transcripts: success rate, unigram diversity,
bandwidth and round counts, plus per-cell aggregation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scenarios import GoalChecklist
from .session import SessionTranscript
from .textnorm import normalize


class UndefinedMetricError(ValueError):
    """Raised when a metric has no defined value for the given input."""


def success_rate(final_bs_transcript_text: str, checklist: GoalChecklist) -> float:
    """Percent of goal weight whose matcher occurs in the normalized text."""
    hay = normalize(final_bs_transcript_text)
    total = sum(g.weight for g in checklist.goals)
    satisfied = sum(g.weight for g in checklist.goals
                    if normalize(g.matcher) in hay)
    return 100.0 * satisfied / total


def distinct_1(texts) -> float:
    """Unique-unigram to total-unigram ratio over lowercased sent texts."""
    tokens = []
    for text in texts:
        tokens.extend(text.lower().split())
    if not tokens:
        raise UndefinedMetricError("distinct-1 is undefined for zero tokens")
    return len(set(tokens)) / len(tokens)


@dataclass(frozen=True)
class RunResult:
    method: str
    scenario: str
    snr_db: float
    seed: int
    sr_percent: float
    distinct1: float
    downlink_bits: int
    uplink_bits: int
    rounds: int
    completed_by_bs: bool

    def __post_init__(self):
        if not 0.0 <= self.sr_percent <= 100.0:
            raise ValueError("sr out of range")
        if not 0.0 <= self.distinct1 <= 1.0:
            raise ValueError("distinct1 out of range")
        if self.downlink_bits < 0 or self.uplink_bits < 0:
            raise ValueError("bit counters must be non-negative")


def result_from_transcript(transcript: SessionTranscript,
                           checklist: GoalChecklist, seed: int) -> RunResult:
    cfg = transcript.config
    return RunResult(
        method=cfg.method, scenario=cfg.scenario, snr_db=cfg.mean_snr_db,
        seed=seed,
        sr_percent=success_rate(transcript.final_report(), checklist),
        distinct1=distinct_1(transcript.sent_texts()),
        downlink_bits=transcript.downlink_bits(),
        uplink_bits=transcript.uplink_bits(),
        rounds=transcript.num_rounds,
        completed_by_bs=transcript.completed_by_bs)


@dataclass(frozen=True)
class SummaryRow:
    method: str
    snr_db: float
    count: int
    sr_mean: float
    sr_std: float
    distinct1_mean: float
    downlink_bits_mean: float
    uplink_bits_mean: float
    rounds_mean: float
    completed_frac: float


def aggregate(results) -> list:
    """Per-(method, snr) means and population standard deviations."""
    if not results:
        raise ValueError("no results to aggregate")
    cells: dict = {}
    for r in results:
        cells.setdefault((r.method, r.snr_db), []).append(r)
    rows = []
    for (method, snr), group in sorted(cells.items()):
        sr = np.array([g.sr_percent for g in group], dtype=float)
        rows.append(SummaryRow(
            method=method, snr_db=snr, count=len(group),
            sr_mean=float(sr.mean()), sr_std=float(sr.std()),
            distinct1_mean=float(np.mean([g.distinct1 for g in group])),
            downlink_bits_mean=float(np.mean([g.downlink_bits for g in group])),
            uplink_bits_mean=float(np.mean([g.uplink_bits for g in group])),
            rounds_mean=float(np.mean([g.rounds for g in group])),
            completed_frac=float(np.mean([g.completed_by_bs for g in group]))))
    return rows


RESULTS_HEADER = ("method,snr_db,seed,sr,distinct1,downlink_bits,uplink_bits,"
                  "rounds,completed")


def results_csv_lines(results) -> list:
    """Per-run CSV rows in the documented column order, deterministic."""
    lines = [RESULTS_HEADER]
    for r in sorted(results, key=lambda x: (x.method, x.snr_db, x.seed)):
        lines.append(
            f"{r.method},{r.snr_db:g},{r.seed},{r.sr_percent:.6g},"
            f"{r.distinct1:.6g},{r.downlink_bits},{r.uplink_bits},"
            f"{r.rounds},{'yes' if r.completed_by_bs else 'no'}")
    return lines


SUMMARY_HEADER = ("method,snr_db,count,sr_mean,sr_std,distinct1_mean,"
                  "downlink_bits_mean,uplink_bits_mean,rounds_mean,completed_frac")


def summary_csv_lines(rows) -> list:
    lines = [SUMMARY_HEADER]
    for s in rows:
        lines.append(
            f"{s.method},{s.snr_db:g},{s.count},{s.sr_mean:.6g},{s.sr_std:.6g},"
            f"{s.distinct1_mean:.6g},{s.downlink_bits_mean:.6g},"
            f"{s.uplink_bits_mean:.6g},{s.rounds_mean:.6g},{s.completed_frac:.6g}")
    return lines
