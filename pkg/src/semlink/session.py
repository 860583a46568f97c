"""Multi-round protocol driver.

One session runs the query/response loop between the base-station planner
and the robot under one of five method variants, with per-round channel
draws, bandwidth accounting, a hard round cap, and the knowledge-base
lifecycle for the variant that uses it.  Identical configuration (all
seeds fixed) yields byte-identical transcripts.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field, asdict

import numpy as np

from . import agents
from .agents import (AgentKnowledge, TaskComplete, TaskRequest, compress,
                     evaluate_task, make_knowledge, parse_kb_terms,
                     robot_respond, serialize_kb)
from .channel import McsProfile, sample_channel
from .classic import ClassicPipeline
from .importance import (frame_trace, partition, reassemble,
                         transmit_partitioned)
from .scenarios import EnvHandle, env_facts, gen_case1, gen_case2
from .semantic import CalibrationTable, SemanticChannel, default_calibration
from .vocabulary import default_codebook, default_codec_config

logger = logging.getLogger(__name__)

METHODS = ("Direct", "LC", "LC+SC", "LC+SC(Im)", "LC+SC(Im+KB)")
TRANSCRIPT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Seeds:
    channel: int = 1
    noise: int = 1
    scenario: int = 1

    def __post_init__(self):
        for name in ("channel", "noise", "scenario"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} seed must be non-negative")


@dataclass(frozen=True)
class SessionConfig:
    method: str
    scenario: str
    mean_snr_db: float
    seeds: Seeds = field(default_factory=Seeds)
    max_rounds: int = 5
    compression_target: float = 0.4
    verbosity: float = 2.0
    num_subcarriers: int = 64
    n_taps: int = 8
    tap_decay: float = 0.5
    beta: float = 1.0
    words_per_chunk: int = 30
    n_bits: int = 1000
    n_prime_bits: int = 2000
    user_id: str = "user-1"
    llm_backend: str = "mock"
    llm_base_url: str = ""
    llm_model: str = ""

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.scenario not in ("case1", "case2"):
            raise ValueError("scenario must be case1 or case2")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not 0.0 < self.compression_target <= 1.0:
            raise ValueError("compression_target must be in (0, 1]")
        if self.verbosity < 1.0:
            raise ValueError("verbosity must be >= 1.0")
        if self.llm_backend not in ("mock", "http"):
            raise ValueError("llm_backend must be mock or http")
        if self.llm_backend == "http" and not self.llm_base_url:
            raise ValueError("http backend requires llm_base_url")

    @property
    def task_id(self) -> str:
        return f"{self.scenario}-{self.seeds.scenario}"


@dataclass
class RoundRecord:
    round_index: int
    query: str
    query_sent: str
    query_received: str
    response: str
    response_sent: str
    response_received: str
    downlink_bits: int
    uplink_bits: int
    downlink_trace: dict = field(default_factory=dict)
    uplink_trace: dict = field(default_factory=dict)


@dataclass
class SessionTranscript:
    config: SessionConfig
    rounds: list = field(default_factory=list)
    outcome: str = "RoundCapHit"
    kb_preload_bits: int = 0
    kb_terms_injected: tuple = ()

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    @property
    def completed_by_bs(self) -> bool:
        return self.outcome == "CompletedByBS"

    def final_report(self) -> str:
        """BS-side received transcript: every uplink receipt in order."""
        return " ".join(r.response_received for r in self.rounds)

    def sent_texts(self) -> list:
        """Texts that entered the channel, both directions."""
        out = []
        for r in self.rounds:
            out.append(r.query_sent)
            out.append(r.response_sent)
        return out

    def to_records(self) -> list:
        """JSON-lines payload: one record per round plus a summary record."""
        records = []
        for r in self.rounds:
            payload = asdict(r)
            payload["schema"] = TRANSCRIPT_SCHEMA_VERSION
            payload["kind"] = "round"
            records.append(payload)
        records.append({
            "schema": TRANSCRIPT_SCHEMA_VERSION,
            "kind": "summary",
            "method": self.config.method,
            "scenario": self.config.scenario,
            "mean_snr_db": self.config.mean_snr_db,
            "seeds": asdict(self.config.seeds),
            "outcome": self.outcome,
            "rounds": self.num_rounds,
            "downlink_bits": self.downlink_bits(),
            "uplink_bits": self.uplink_bits(),
            "kb_preload_bits": self.kb_preload_bits,
            "kb_terms_injected": list(self.kb_terms_injected),
        })
        return records

    def downlink_bits(self) -> int:
        return self.kb_preload_bits + sum(r.downlink_bits for r in self.rounds)

    def uplink_bits(self) -> int:
        return sum(r.uplink_bits for r in self.rounds)


class KnowledgeStore:
    """Append-only per-(user, task) knowledge entries with JSON persistence."""

    def __init__(self, path=None):
        self.path = path
        self._data: dict = {}
        if path is not None and os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                self._data = json.load(fh)

    @staticmethod
    def _key(user_id: str, task_id: str) -> str:
        return f"{user_id}::{task_id}"

    def lookup(self, user_id: str, task_id: str) -> list:
        return list(self._data.get(self._key(user_id, task_id), []))

    def append(self, user_id: str, task_id: str, entries) -> int:
        """Add entries not already present; returns the number added."""
        key = self._key(user_id, task_id)
        existing = self._data.setdefault(key, [])
        added = 0
        for entry in entries:
            if entry not in existing:
                existing.append(entry)
                added += 1
        if added and self.path is not None:
            self.save()
        return added

    def save(self) -> None:
        if self.path is None:
            return
        directory = os.path.dirname(os.path.abspath(self.path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(self._data, fh, indent=1, sort_keys=True)
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def _derive_seed(base: int, *path) -> int:
    ss = np.random.SeedSequence((int(base),) + tuple(int(p) & 0xFFFFFFFF for p in path))
    return int(ss.generate_state(1)[0])


class _Transmitter:
    """Method-specific downlink/uplink processing for one session."""

    def __init__(self, config: SessionConfig, knowledge: AgentKnowledge,
                 calibration: CalibrationTable, live_agents=None):
        self.config = config
        self.knowledge = knowledge
        self.live_agents = live_agents
        self.mcs = McsProfile(beta=config.beta)
        self.classic = ClassicPipeline(default_codebook())
        codec = default_codec_config(config.words_per_chunk, config.n_bits,
                                     config.n_prime_bits)
        self.semantic = SemanticChannel(codec, calibration)

    def _compress(self, text: str) -> str:
        if self.live_agents is not None:
            return self.live_agents.compress(text, self.config.compression_target)
        return compress(text, self.knowledge, self.config.compression_target)

    def _realization(self, round_index: int, direction: int):
        seed = _derive_seed(self.config.seeds.channel, round_index, direction)
        return sample_channel(seed, self.config.num_subcarriers,
                              self.config.mean_snr_db, self.config.n_taps,
                              self.config.tap_decay)

    def send(self, text: str, round_index: int, direction: int):
        """Returns (sent_text, received_text, bits, trace)."""
        cfg = self.config
        method = cfg.method
        realization = self._realization(round_index, direction)
        noise_seed = _derive_seed(cfg.seeds.noise, round_index, direction)

        if method == "Direct":
            received, bits = self.classic.send(text, realization, self.mcs,
                                               noise_seed)
            return text, received, bits, {}

        compressed = self._compress(text)
        if method == "LC":
            received, bits = self.classic.send(compressed, realization,
                                               self.mcs, noise_seed)
            return compressed, received, bits, {}
        if method == "LC+SC":
            received, bits = self.semantic.send(compressed, cfg.n_bits,
                                                realization, noise_seed,
                                                beta=cfg.beta)
            return compressed, received, bits, {}

        # Importance-aware variants: partition the raw message; parts 2 and 3
        # carry the compression, part 1 keeps the key items verbatim.
        pm = partition(text, self.knowledge, cfg.compression_target,
                       n_bits=cfg.n_bits, n_prime_bits=cfg.n_prime_bits)
        received_parts = transmit_partitioned(pm, realization, self.semantic,
                                              noise_seed, beta=cfg.beta)
        received = reassemble(received_parts, self.knowledge)
        sent_text = " ".join(p for p in (pm.part1, pm.part2, pm.part3) if p)
        return sent_text, received, received_parts.total_bits, frame_trace(
            pm, received_parts)


def run_session(config: SessionConfig, kb_store: KnowledgeStore | None = None,
                calibration: CalibrationTable | None = None) -> SessionTranscript:
    """Execute one task session and return its transcript.

    The loop alternates planner queries and robot responses through the
    method's transmission path until the planner signals completion or the
    round cap is hit.  The knowledge-base variant charges its preload to
    downlink bits and injects received class terms into the robot extractor.
    """
    if config.method == "LC+SC(Im+KB)" and kb_store is None:
        raise ValueError("LC+SC(Im+KB) requires a knowledge store")
    if calibration is None:
        calibration = default_calibration()
    live_agents = None
    if config.llm_backend == "http":
        from .llm_http import HttpChatClient, LlmAgents
        live_agents = LlmAgents(HttpChatClient(base_url=config.llm_base_url,
                                               model=config.llm_model))

    if config.scenario == "case1":
        state, checklist = gen_case1(config.seeds.scenario)
    else:
        state, checklist = gen_case2(config.seeds.scenario)
    env = EnvHandle(state)
    knowledge = make_knowledge(env)
    request = TaskRequest(user_text=f"run the {config.scenario} task",
                          task_id=config.task_id)
    transmitter = _Transmitter(config, knowledge, calibration,
                               live_agents=live_agents)
    transcript = SessionTranscript(config=config)

    if config.method == "LC+SC(Im+KB)":
        entries = kb_store.lookup(config.user_id, config.task_id)
        if entries:
            kb_text = serialize_kb(entries)
            realization = transmitter._realization(0, 0)
            kb_seed = _derive_seed(config.seeds.noise, 0, 0)
            received_kb, kb_bits = transmitter.semantic.send(
                kb_text, config.n_bits, realization, kb_seed,
                beta=config.beta)
            terms = parse_kb_terms(received_kb)
            knowledge.extractor_knowledge.extra_terms.update(terms)
            knowledge.task_knowledge.extend(entries)
            transcript.kb_preload_bits = kb_bits
            transcript.kb_terms_injected = tuple(sorted(terms))

    history = []
    for round_index in range(1, config.max_rounds + 1):
        if live_agents is not None:
            planned = live_agents.plan(history, request.user_text)
            action = (TaskComplete() if planned.strip().splitlines()
                      and planned.strip().splitlines()[0] == "DONE"
                      else planned)
        else:
            action = agents.bs_plan(history, knowledge, request,
                                    verbosity=config.verbosity)
        if isinstance(action, TaskComplete):
            transcript.outcome = "CompletedByBS"
            break
        query = action
        q_sent, q_received, down_bits, down_trace = transmitter.send(
            query, round_index, direction=0)
        if live_agents is not None:
            facts = "\n".join(env_facts(env))
            response = live_agents.respond(q_received, facts)
        else:
            response = robot_respond(q_received, env, verbosity=config.verbosity)
        a_sent, a_received, up_bits, up_trace = transmitter.send(
            response, round_index, direction=1)
        history.append((query, a_received))
        transcript.rounds.append(RoundRecord(
            round_index=round_index, query=query, query_sent=q_sent,
            query_received=q_received, response=response,
            response_sent=a_sent, response_received=a_received,
            downlink_bits=down_bits, uplink_bits=up_bits,
            downlink_trace=down_trace, uplink_trace=up_trace))
    else:
        transcript.outcome = "RoundCapHit"

    return transcript


def kb_update(transcript: SessionTranscript, feedback,
              kb_store: KnowledgeStore) -> int:
    """Store the evaluator's diff for this (user, task); idempotent."""
    entries = evaluate_task(transcript.final_report(), feedback)
    return kb_store.append(transcript.config.user_id, transcript.config.task_id,
                           entries)


def bandwidth_report(transcript: SessionTranscript) -> tuple[int, int, int]:
    """(downlink_bits, uplink_bits, rounds); preload counted downlink."""
    return (transcript.downlink_bits(), transcript.uplink_bits(),
            transcript.num_rounds)


def checklist_for(config: SessionConfig):
    if config.scenario == "case1":
        return gen_case1(config.seeds.scenario)[1]
    return gen_case2(config.seeds.scenario)[1]
