"""Deterministic mock agents for both endpoints.

The base-station side plans task steps and checks expectations against
received responses; the robot side renders template reports from its
environment handle.  A rule-based compressor, key-item extractor,
reconstructor and task evaluator complete the set.  Every function is pure
in its inputs, so sessions are byte-reproducible.

An HTTP chat-completion backend with the same call shapes lives in
``llm_http`` for demo use against a real model endpoint.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .scenarios import (ALL_ANOMALY_TERMS, BASE_ANOMALY_TERMS, EnvHandle,
                        HouseholdState, WarehouseState, env_query)
from .textnorm import (is_marker, is_number, join_sentences, normalize,
                       split_sentences)

logger = logging.getLogger(__name__)

UNIT_TOKENS = frozenset({"c", "lux", "db", "m"})
IDENTIFIER_RE = re.compile(r"^[a-z]+(-\d+)+$")
PROTECTED_PUNCT = frozenset({"(", ")", ",", ";", ":"})
# Imperative intent survives compression so a shortened instruction still
# routes to the right behaviour on the robot side.
INTENT_TOKENS = frozenset({
    "inspection", "sweep", "verify", "reverify", "rereport", "relocate",
    "confirm", "detail", "see", "repeat",
})
STOP_WORDS = frozenset({
    "the", "a", "an", "is", "are", "at", "to", "of", "and", "then", "near",
    "by", "under", "with", "for", "on", "in", "its", "it", "this", "that",
    "please", "now", "currently", "also",
})

ROBOT_FILLER = (
    "all subsystems are operating within nominal parameters .",
    "battery charge remains at a comfortable level for continued operation .",
    "ambient conditions in the vicinity appear stable and unremarkable .",
    "no unexpected obstacles were encountered while traversing the area .",
    "wheel odometry and heading estimates remain consistent with the map .",
    "onboard diagnostics report that every module passed its self check .",
    "the traversal proceeded smoothly along the planned patrol route .",
    "communication link quality has been steady throughout this task .",
    "no further human assistance appears necessary at this stage .",
    "localization confidence is high and drift correction was not needed .",
    "the gripper mechanism responded normally during recent manipulation .",
    "internal temperature of the compute unit stays inside the safe band .",
    "awaiting any additional instructions you may wish to provide .",
    "motion planning completed without replanning or deadline overruns .",
    "the cameras were recalibrated automatically before this report .",
    "overall progress matches the schedule estimated when the task began .",
)

BS_FILLER = (
    "proceed carefully and follow standard safety protocols while working .",
    "take your time and prioritize accuracy over speed during this step .",
    "remember that a complete report helps avoid repeated instructions .",
    "keep your sensors active and stay aware of the surroundings .",
    "this step follows from the overall task plan provided by the user .",
    "report anything unusual even if it seems minor or unrelated .",
    "maintain a steady pace and conserve battery where possible .",
    "your previous updates have been logged for later review .",
)

FILLER_INVENTORY = frozenset(normalize(s.rstrip(" .")) for s in ROBOT_FILLER + BS_FILLER)

CLARIFY_UNPARSED = "i could not parse the last instruction ; please repeat it"

# Boilerplate density is proportional to factual content; verbosity scales
# it, which in turn controls the compression ratio a message can reach.
ROBOT_CASE1_FILLER_RATE = 0.55
ROBOT_CASE2_FILLER_RATE = 1.3
BS_QUERY_FILLER_RATE = 0.5
_AVG_FILLER_CHARS = 64


class TaskComplete:
    """Out-of-band planner signal; never rendered into transmitted text."""

    def __repr__(self):
        return "TaskComplete()"


@dataclass
class ExtractorKnowledge:
    """Key-item class list: base classes plus knowledge-base additions."""

    base_terms: frozenset = frozenset(BASE_ANOMALY_TERMS)
    extra_terms: set = field(default_factory=set)

    def terms(self) -> set:
        return set(self.base_terms) | self.extra_terms


@dataclass
class AgentKnowledge:
    """Everything both endpoints know, bundled per session."""

    bs_knowledge: dict
    robot_knowledge: EnvHandle
    extractor_knowledge: ExtractorKnowledge
    compressor_prompt: str = ("rewrite the message so it is as short as possible "
                              "while keeping every factual detail intact")
    task_knowledge: list = field(default_factory=list)


@dataclass(frozen=True)
class KeyItem:
    marker: str
    text: str
    position: int


@dataclass(frozen=True)
class KeyItemSet:
    items: tuple

    def marker_map(self) -> dict:
        return {it.marker: it.text for it in self.items}


@dataclass(frozen=True)
class TaskRequest:
    user_text: str
    task_id: str
    user_feedback_hook: object = None

    def __post_init__(self):
        if not self.user_text:
            raise ValueError("user_text must be nonempty")


def make_knowledge(env: EnvHandle) -> AgentKnowledge:
    """Build the per-session knowledge pair for a scenario environment."""
    from .scenarios import ITEM_NAMES
    state = env.state
    if isinstance(state, HouseholdState):
        bs = {"scenario": "case2",
              "targets": {it.name: it.target for it in state.items}}
    else:
        bs = {"scenario": "case1",
              "sensor_ids": [r.sensor_id for r in state.readings]}
    # Household object classes count as item identifiers for extraction.
    base = frozenset(BASE_ANOMALY_TERMS) | frozenset(ITEM_NAMES)
    return AgentKnowledge(bs_knowledge=bs, robot_knowledge=env,
                          extractor_knowledge=ExtractorKnowledge(base_terms=base))


def is_protected_token(token: str, knowledge: AgentKnowledge | None = None) -> bool:
    """Tokens the compressor may never drop: markers, digits, units,
    identifiers, structural punctuation and recognized class terms."""
    if is_marker(token) or is_number(token):
        return True
    if token in UNIT_TOKENS or token in PROTECTED_PUNCT or token in INTENT_TOKENS:
        return True
    if IDENTIFIER_RE.match(token):
        return True
    if knowledge is not None and token in knowledge.extractor_knowledge.terms():
        return True
    return False


# ---------------------------------------------------------------------------
# Compression


def _sentence_len(tokens) -> int:
    return len(" ".join(tokens)) + 2


def compress(text: str, knowledge: AgentKnowledge, target_ratio: float,
             history=None, drop_unprotected: bool = False,
             allow_empty: bool = False, abbreviate: bool = True) -> str:
    """Deterministic stand-in for prompt-driven message shortening.

    Stages run until the length ratio reaches the target or only protected
    content remains: known boilerplate sentences go first, then stop words
    outside fact-bearing sentences, then whole sentences without protected
    tokens, then fact sentences are abbreviated to their protected tokens
    (last sentences first).  Markers and digit tokens are never dropped.

    ``drop_unprotected`` forces the unprotected-sentence stage regardless of
    the ratio; the importance framing uses it on the remainder part, where
    content without any recognized key item is trimmed outright.
    """
    if not text.strip():
        raise ValueError("cannot compress empty text")
    if target_ratio > 1.0 or target_ratio <= 0.0:
        raise ValueError("target_ratio must be in (0, 1]")
    if target_ratio >= 1.0 and not drop_unprotected:
        return text

    sentences = split_sentences(text)
    orig_len = max(len(text), 1)
    kept = []
    for tokens, term in sentences:
        is_filler = normalize(" ".join(tokens)) in FILLER_INVENTORY
        kept.append({"tokens": list(tokens), "term": term, "filler": is_filler,
                     "dropped": False})

    def ratio() -> float:
        live = [(s["tokens"], s["term"]) for s in kept if not s["dropped"]]
        if not live:
            return 0.0
        return len(join_sentences(live)) / orig_len

    # Boilerplate is removed outright whenever any shortening is requested.
    for s in kept:
        if s["filler"]:
            s["dropped"] = True

    protected_flags = {
        id(s): [is_protected_token(t, knowledge) for t in s["tokens"]]
        for s in kept}

    if drop_unprotected:
        for s in kept:
            if not s["dropped"] and not any(protected_flags[id(s)]):
                s["dropped"] = True

    if ratio() > target_ratio:
        # Stop words anywhere outside the protected token spans.
        for s in kept:
            if s["dropped"]:
                continue
            flags = protected_flags[id(s)]
            slim = [t for t, keep in zip(s["tokens"], flags)
                    if keep or t not in STOP_WORDS]
            if slim:
                s["tokens"] = slim
                protected_flags[id(s)] = [is_protected_token(t, knowledge)
                                          for t in slim]

    if ratio() > target_ratio:
        # Whole sentences without any protected token.
        for s in kept:
            if s["dropped"] or any(protected_flags[id(s)]):
                continue
            s["dropped"] = True

    if abbreviate and ratio() > target_ratio:
        # Abbreviate fact sentences to their protected tokens, last first.
        for s in reversed(kept):
            if s["dropped"]:
                continue
            flags = protected_flags[id(s)]
            if all(flags):
                continue
            s["tokens"] = [t for t, keep in zip(s["tokens"], flags) if keep]
            if ratio() <= target_ratio:
                break

    live = [(s["tokens"], s["term"]) for s in kept if not s["dropped"] and s["tokens"]]
    if not live:
        if allow_empty:
            return ""
        # The protected core is never compressed away entirely.
        live = [sentences[0]]
    return join_sentences(_pack_sentences(live))


_PACK_LIMIT = 30


def _pack_sentences(sentences) -> list:
    """Chain consecutive short sentences so downstream fixed-length chunks
    stay full instead of mostly padding."""
    packed = []
    current_tokens, current_term = [], "."
    for tokens, term in sentences:
        candidate = len(current_tokens) + len(tokens) + (1 if current_tokens else 0)
        if current_tokens and candidate <= _PACK_LIMIT:
            current_tokens = current_tokens + [";"] + list(tokens)
            current_term = term
        else:
            if current_tokens:
                packed.append((current_tokens, current_term))
            current_tokens, current_term = list(tokens), term
    if current_tokens:
        packed.append((current_tokens, current_term))
    return packed


# ---------------------------------------------------------------------------
# Extraction and reconstruction


def extract(text: str, knowledge: AgentKnowledge) -> tuple[KeyItemSet, str]:
    """Mark class-matching tokens and return (items, marked_text).

    Key items are numerals, units, identifiers and recognized class terms;
    each becomes a position marker in the marked text.  Replacing markers
    back reproduces the source text exactly.
    """
    terms = knowledge.extractor_knowledge.terms()
    out_tokens = []
    items = []
    position = 0
    for token in text.split():
        is_item = (not is_marker(token)
                   and (is_number(token) or token in UNIT_TOKENS
                        or IDENTIFIER_RE.match(token) is not None
                        or token in terms))
        if is_item and len(items) < 99:
            marker = f"[K{len(items) + 1}]"
            items.append(KeyItem(marker=marker, text=token, position=position))
            out_tokens.append(marker)
        else:
            if is_item:
                logger.info("marker budget exhausted; %r left inline", token)
            out_tokens.append(token)
        position += len(token) + 1
    return KeyItemSet(items=tuple(items)), " ".join(out_tokens)


def serialize_key_items(items: KeyItemSet) -> str:
    """Interleave markers and values: one word flip damages one item only."""
    parts = []
    for it in items.items:
        parts.append(it.marker)
        parts.append(it.text)
    return " ".join(parts)


def parse_key_items(part1_text: str) -> dict:
    """Invert the serialization; value = tokens between marker occurrences.

    Sentence terminators introduced by the chunked transport are not part
    of any item value.
    """
    mapping: dict = {}
    current = None
    for token in part1_text.split():
        if is_marker(token):
            current = "[K" + token.strip("[]")[1:] + "]"
            mapping[current] = []
        elif current is not None and token not in {".", "!", "?"}:
            mapping[current].append(token)
    return {marker: " ".join(words) for marker, words in mapping.items() if words}


def _marker_index(token: str) -> int:
    return int(token.strip("[]")[1:])


def _repair_slots_global(sentences, expected_markers) -> list:
    """Reassign corrupted marker slots using global marker ordering.

    The word channel substitutes in place, so token positions are stable and
    genuine markers appear in increasing order across the marked sentences.
    Within each gap between surviving markers, missing markers are
    re-assigned in order when the candidate count matches exactly: demoted
    impostor-marker positions are tried first, then any non-punctuation
    token in the gap.
    """
    expected = [_marker_index(m) for m in expected_markers]
    missing_set = set(expected)
    coords = []  # flat stream of (sid, pos)
    anchors = []  # (stream_index, marker_id)
    for sid, (tokens, _) in enumerate(sentences):
        for pos, tok in enumerate(tokens):
            coords.append((sid, pos))
            if is_marker(tok):
                j = _marker_index(tok)
                if j in missing_set:
                    anchors.append((len(coords) - 1, j))
                    missing_set.discard(j)
    if not missing_set:
        return sentences

    out = [(list(tokens), term) for tokens, term in sentences]

    def token_at(stream_index):
        sid, pos = coords[stream_index]
        return out[sid][0][pos]

    def assign(stream_index, marker_id):
        sid, pos = coords[stream_index]
        out[sid][0][pos] = f"[K{marker_id}]"
        logger.info("repaired corrupted marker slot [K%d]", marker_id)

    bounds = [(-1, 0)] + anchors + [(len(coords), max(expected) + 1)]
    for (p_lo, j_lo), (p_hi, j_hi) in zip(bounds, bounds[1:]):
        gap_missing = sorted(j for j in missing_set if j_lo < j < j_hi)
        if not gap_missing:
            continue
        demoted = [p for p in range(p_lo + 1, p_hi)
                   if token_at(p) == _CORRUPT_SLOT]
        if len(demoted) == len(gap_missing):
            candidates = demoted
        else:
            candidates = [p for p in range(p_lo + 1, p_hi)
                          if token_at(p) not in PROTECTED_PUNCT
                          and not is_marker(token_at(p))]
        if len(candidates) == len(gap_missing):
            for p, j in zip(candidates, gap_missing):
                assign(p, j)
    return [(tokens, term) for tokens, term in out]


_CORRUPT_SLOT = "\x00corrupted"


def _demote_out_of_order_markers(sentences) -> list:
    """Drop impostor markers created by word substitution.

    Genuine markers appear in strictly increasing order across the marked
    sentences, so any marker outside the longest increasing subsequence is
    a corrupted slot, not a marker; it becomes an ordinary junk token that
    the position-based repair can reassign.
    """
    stream = []
    for sid, (tokens, _) in enumerate(sentences):
        for pos, tok in enumerate(tokens):
            if is_marker(tok):
                stream.append((sid, pos, _marker_index(tok)))
    if not stream:
        return list(sentences)
    # Longest strictly increasing subsequence over the marker indices.
    n = len(stream)
    best_len = [1] * n
    parent = [-1] * n
    for i in range(n):
        for j in range(i):
            if stream[j][2] < stream[i][2] and best_len[j] + 1 > best_len[i]:
                best_len[i] = best_len[j] + 1
                parent[i] = j
    end = max(range(n), key=lambda i: best_len[i])
    keep = set()
    while end != -1:
        keep.add(end)
        end = parent[end]
    out = [(list(tokens), term) for tokens, term in sentences]
    for idx, (sid, pos, marker_id) in enumerate(stream):
        if idx not in keep:
            logger.info("demoting out-of-order marker [K%d]", marker_id)
            out[sid][0][pos] = _CORRUPT_SLOT
    return [(tokens, term) for tokens, term in out]


def reconstruct(part1_text: str, part2_text: str, part3_text: str,
                part2_order=None, part3_order=None) -> str:
    """Merge the three received parts back into one message.

    Key items from part 1 are substituted into their marker slots in part 2
    (after order-based slot repair); unresolved markers stay literal and are
    logged.  Sentence order metadata interleaves parts 2 and 3 when present,
    otherwise part 3 is appended.
    """
    mapping = parse_key_items(part1_text)
    part2_sentences = split_sentences(part2_text) if part2_text.strip() else []
    part3_sentences = split_sentences(part3_text) if part3_text.strip() else []

    if mapping:
        part2_sentences = _demote_out_of_order_markers(part2_sentences)
        part2_sentences = _repair_slots_global(part2_sentences, list(mapping))

    consumed = set()
    resolved_sentences = []
    for tokens, term in part2_sentences:
        tokens = list(tokens)
        out = []
        for tok in tokens:
            if is_marker(tok):
                key = f"[K{_marker_index(tok)}]"
                if key in mapping:
                    out.extend(mapping[key].split())
                    consumed.add(key)
                else:
                    logger.info("unresolved marker %s left literal", key)
                    out.append(key)
            elif tok == _CORRUPT_SLOT:
                out.append("?")
            else:
                out.append(tok)
        resolved_sentences.append((out, term))

    if part2_order is not None and part3_order is not None:
        tagged = list(zip(part2_order, resolved_sentences))
        tagged += list(zip(part3_order, part3_sentences))
        tagged.sort(key=lambda pair: pair[0])
        merged = [sentence for _, sentence in tagged]
    else:
        merged = resolved_sentences + part3_sentences

    # Alignment is best effort: key items whose slots were lost still reach
    # the receiver, appended in their original order.
    stray = [key for key in mapping if key not in consumed]
    if stray and part2_text.strip():
        recovered = []
        for key in stray:
            recovered.extend(mapping[key].split())
        logger.info("appending %d unplaced key items", len(stray))
        merged.append((["recovered", ":"] + recovered, "."))
    if not merged:
        return ""
    return join_sentences(merged)


# ---------------------------------------------------------------------------
# Robot agent


_FILLER_WINDOW = 5


def _filler_block(pool, count: int) -> list:
    # Boilerplate cycles a small window, so it repeats the way real status
    # chatter does; compression deletes exactly these repeats.
    out = []
    for i in range(count):
        sentence = pool[i % min(len(pool), _FILLER_WINDOW)]
        tokens = sentence.rstrip(" .").split()
        out.append((tokens, "."))
    return out


def _filler_for(pool, content_sentences, rate: float, verbosity: float) -> list:
    """Boilerplate sized relative to the factual content of a message."""
    content_chars = len(join_sentences(content_sentences))
    count = max(1, round(content_chars * rate * verbosity / _AVG_FILLER_CHARS))
    return _filler_block(pool, count)


_CELL_RE = re.compile(r"^cell-(\d+)-(\d+)$")


def _coord_pattern(tokens, start):
    """Parse a cell token right after an item name; returns (x, y) or None."""
    if start >= len(tokens):
        return None
    match = _CELL_RE.match(tokens[start])
    if match:
        return int(match.group(1)), int(match.group(2))
    return None


def robot_respond(received_query: str, env_handle: EnvHandle,
                  verbosity: float = 1.0) -> str:
    """Template-rendered report of exactly the facts the query asks for.

    Garbled or unknown requests produce a clarification sentence instead of
    invented facts; verbosity scales the amount of boilerplate attached.
    """
    if verbosity < 1.0:
        raise ValueError("verbosity must be >= 1.0")
    if env_handle.scenario == "case1":
        return _respond_case1(received_query, env_handle, verbosity)
    return _respond_case2(received_query, env_handle, verbosity)


def _respond_case1(query: str, env: EnvHandle, verbosity: float) -> str:
    q = normalize(query)
    q_tokens = q.split()
    state = env.state
    sentences = []

    queried_terms = {t for t in q_tokens if t in ALL_ANOMALY_TERMS}
    known_ids = {r.sensor_id for r in state.readings}
    wants_sweep = "inspection" in q_tokens or "sweep" in q_tokens
    wants_verify = ("reverify" in q_tokens or "rereport" in q_tokens
                    or "verify" in q_tokens
                    # Fallback: a follow-up naming findings or sensors is a
                    # verification request even if its verbs were garbled.
                    or bool(queried_terms)
                    or any(t in known_ids for t in q_tokens))
    if not wants_sweep and not wants_verify:
        return join_sentences([(CLARIFY_UNPARSED.split(), ".")])

    prefix = "verified" if wants_verify and not wants_sweep else "sweep"
    reading_entries = []
    for fragment in env_query(state, "readings"):
        reading_entries.extend(fragment.split() + [";"])
    sentences.append(([prefix, "report", ":"] + reading_entries[:-1], "."))

    # A sweep reports everything observed; a verification pass re-states
    # the robot's own findings as confirmations.
    for anomaly in state.anomalies:
        body = anomaly.render()
        if wants_verify and not wants_sweep:
            body = f"confirmed finding of {body}"
        sentences.append((body.split(), "."))

    sentences.extend(_filler_for(ROBOT_FILLER, sentences,
                                 ROBOT_CASE1_FILLER_RATE, verbosity))
    sentences.append((["report", "finished"], "."))
    return join_sentences(sentences)


def _respond_case2(query: str, env: EnvHandle, verbosity: float) -> str:
    q = normalize(query)
    q_tokens = q.split()
    state = env.state
    known = {it.name for it in state.items}
    sentences = []

    wants_perception = "see" in q_tokens or "perception" in q_tokens
    wants_verify = "verify" in q_tokens or "reverify" in q_tokens
    move_requests = []
    clarifications = []
    for pos, tok in enumerate(q_tokens):
        if tok in known:
            coords = _coord_pattern(q_tokens, pos + 1)
            if coords is not None:
                move_requests.append((tok, coords))
            elif not wants_verify:
                clarifications.append(tok)

    if not (wants_perception or wants_verify or move_requests or clarifications):
        return join_sentences([(CLARIFY_UNPARSED.split(), ".")])

    if wants_perception:
        entries = []
        for fragment in env_query(state, "items"):
            entries.extend(fragment.split() + [";"])
        sentences.append((["perception", "report", ":"] + entries[:-1], "."))

    if move_requests:
        entries = []
        seen = set()
        for name, coords in move_requests:
            if name in seen:
                continue
            seen.add(name)
            env.apply_move(name, coords)
            entries.extend(["moved", name, f"cell-{coords[0]}-{coords[1]}", ";"])
        sentences.append((["execution", "report", ":"] + entries[:-1], "."))

    if clarifications:
        for name in dict.fromkeys(clarifications):
            sentences.append((f"please confirm the intended spot for the {name}".split(), "."))

    if wants_verify:
        entries = []
        for it in state.items:
            pos = env.current_position(it.name)
            cell = f"cell-{pos[0]}-{pos[1]}"
            if pos == it.target:
                entries.extend(["verified", it.name, cell, ";"])
            else:
                entries.extend([it.name, "remains", "at", cell, ";"])
        sentences.append((["verification", "report", ":"] + entries[:-1], "."))

    sentences.extend(_filler_for(ROBOT_FILLER, sentences,
                                 ROBOT_CASE2_FILLER_RATE, verbosity))
    sentences.append((["report", "finished"], "."))
    return join_sentences(sentences)


# ---------------------------------------------------------------------------
# Base-station planner


def _case1_step_queries(knowledge: AgentKnowledge, step: int, retry: bool,
                        seen_terms, verbosity: float) -> str:
    sentences = []
    if step == 0:
        if retry:
            sentences.append(("please repeat the full inspection sweep and list "
                              "every sensor reading".split(), "."))
        else:
            sentences.append(("perform a full inspection sweep of the warehouse "
                              "and report every sensor reading together with any "
                              "findings".split(), "."))
    else:
        found_terms = [t for t in ALL_ANOMALY_TERMS if t in seen_terms]
        lead = "please reverify your findings" if retry else "verify your findings"
        tokens = lead.split() + ["and", "rereport", "all", "sensor", "readings"]
        if found_terms:
            tokens += ["with", "detail", "on", ":"]
            for term in found_terms:
                tokens += [term, ";"]
            tokens = tokens[:-1]
        sentences.append((tokens, "."))
    sentences.extend(_filler_for(BS_FILLER, sentences, BS_QUERY_FILLER_RATE,
                                 verbosity))
    return join_sentences(sentences)


def _case1_step_met(knowledge: AgentKnowledge, step: int, received: str) -> bool:
    ids = knowledge.bs_knowledge["sensor_ids"]
    tokens = set(normalize(received).split())
    present = sum(1 for sid in ids if sid in tokens)
    return present >= max(1, int(0.75 * len(ids)))


def _case2_step_queries(knowledge: AgentKnowledge, step: int, retry: bool,
                        last_received: str, verbosity: float, unmet) -> str:
    targets = knowledge.bs_knowledge["targets"]
    sentences = []
    if step == 0:
        names = unmet if retry else list(targets)
        if retry:
            lead = ["please", "confirm", "the", "following", "relocations", ":"]
        else:
            sentences.append(("task : tidy the living room and report the items "
                              "you can see".split(), "."))
            lead = ["relocate", "each", "item", ":"]
        entries = []
        for name in names:
            tx, ty = targets[name]
            entries.extend([name, f"cell-{tx}-{ty}", ";"])
        sentences.append((lead + entries[:-1], "."))
    else:
        if retry:
            lead = ["please", "reverify", "these", "placements", ":"]
            entries = []
            for name in unmet:
                tx, ty = targets[name]
                entries.extend([name, f"cell-{tx}-{ty}", ";"])
            sentences.append((lead + entries[:-1], "."))
        else:
            sentences.append(("verify the final placement of every item and "
                              "rereport each position".split(), "."))
    sentences.extend(_filler_for(BS_FILLER, sentences, BS_QUERY_FILLER_RATE,
                                 verbosity))
    return join_sentences(sentences)


def _case2_slack(knowledge: AgentKnowledge) -> int:
    """Confirmations the BS will not chase: it judges completion from what
    it received and cannot distinguish a tiny residue from success."""
    return len(knowledge.bs_knowledge["targets"]) // 10


def _case2_unmet(knowledge: AgentKnowledge, received_texts,
                 verified_only: bool = False) -> list:
    """Targets not yet confirmed anywhere in the received responses.

    The relocation step accepts any mention of an item at its target; the
    verification step requires the explicit verified form.
    """
    targets = knowledge.bs_knowledge["targets"]
    hay = normalize(" ".join(received_texts))
    unmet = []
    for name, (tx, ty) in targets.items():
        pattern = f"{name} cell-{tx}-{ty}"
        if verified_only:
            pattern = "verified " + pattern
        if pattern not in hay:
            unmet.append(name)
    return unmet


def bs_plan(history, knowledge: AgentKnowledge, request: TaskRequest,
            verbosity: float = 1.0):
    """Emit the next scripted step, a confirmation re-query, or TaskComplete.

    The plan position is re-derived from the transcript each call: a step
    advances when its expectations are met in the received response, gets at
    most one consecutive re-query otherwise, and unmet steps are revisited
    once the plan is exhausted (the round cap bounds the session).  Emitted
    queries never contain a termination phrase.
    """
    scenario = knowledge.bs_knowledge["scenario"]
    n_steps = 2
    step = 0
    retried = False
    met_flags = [False] * n_steps

    def next_unmet(after: int):
        for s in list(range(after + 1, n_steps)) + list(range(0, after + 1)):
            if not met_flags[s]:
                return s
        return None

    complete = False
    received_so_far = []
    for _, received in history:
        received_so_far.append(received)
        if scenario == "case1":
            met = _case1_step_met(knowledge, step, received)
        else:
            unmet_now = _case2_unmet(knowledge, received_so_far,
                                     verified_only=(step == 1))
            met = len(unmet_now) <= _case2_slack(knowledge)
        if met:
            met_flags[step] = True
        elif not retried:
            retried = True
            continue
        # Either the step was met or its single consecutive re-query is
        # spent: move on to the next unmet step (wrapping), if any.
        retried = False
        nxt = next_unmet(step)
        if nxt is None:
            complete = True
            break
        step = nxt
    if complete or all(met_flags):
        return TaskComplete()

    last_received = history[-1][1] if history else ""
    if scenario == "case1":
        seen_terms = set()
        for _, received in history:
            seen_terms.update(t for t in ALL_ANOMALY_TERMS
                              if t in set(normalize(received).split()))
        return _case1_step_queries(knowledge, step, retried, seen_terms, verbosity)
    if received_so_far:
        unmet = _case2_unmet(knowledge, received_so_far,
                             verified_only=(step == 1))
        if not unmet:
            unmet = list(knowledge.bs_knowledge["targets"])
    else:
        unmet = list(knowledge.bs_knowledge["targets"])
    return _case2_step_queries(knowledge, step, retried, last_received,
                               verbosity, unmet)


# ---------------------------------------------------------------------------
# Task evaluation (knowledge-base source)


def evaluate_task(final_received_text: str, user_feedback) -> list:
    """Diff the user's ground-truth goals against the received transcript.

    Each missing goal yields one knowledge entry (class term plus a
    representative example).  Without user feedback there is nothing to
    evaluate and the result is empty.
    """
    if user_feedback is None:
        return []
    hay = normalize(final_received_text)
    entries = []
    seen_classes = set()
    for goal in user_feedback.goals:
        if normalize(goal.matcher) in hay:
            continue
        # One entry per missing key-item class, not one per missing fact.
        term = (goal.goal_id.split("-", 1)[1] if goal.kind == "anomaly"
                else goal.kind)
        if term in seen_classes:
            continue
        seen_classes.add(term)
        entries.append({"term": term, "kind": goal.kind,
                        "example": goal.example})
    return entries


def serialize_kb(entries) -> str:
    """Render knowledge entries as transmissible text."""
    sentences = []
    for entry in entries:
        tokens = ["watch", "for", entry["term"], ";", "example", ":"]
        tokens += entry["example"].split()
        sentences.append((tokens, "."))
    if not sentences:
        return ""
    packed = _pack_sentences([(["knowledge", "update", ":"], ".")] + sentences)
    return join_sentences(packed)


KNOWN_CLASS_TERMS = frozenset(ALL_ANOMALY_TERMS) | {"reading", "placement"}


def parse_kb_terms(received_kb_text: str) -> set:
    """Recover class terms from a (possibly corrupted) knowledge preload.

    Both the explicit "watch for X" frame and bare known class words count;
    a corrupted class token is genuinely lost.
    """
    tokens = normalize(received_kb_text).split()
    terms = set()
    for i, tok in enumerate(tokens):
        if tok in KNOWN_CLASS_TERMS:
            terms.add(tok)
        elif i >= 2 and tokens[i - 2] == "watch" and tokens[i - 1] == "for":
            terms.add(tok)
    return terms
