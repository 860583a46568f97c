"""Seeded scenario generators and environment handles.

Two task worlds are provided: a warehouse inspection scene with long,
detail-heavy reports, and a household cleaning scene with short status
messages.  Each generator also emits the ground-truth goal checklist the
success-rate metric scores against.

All rendered text is pre-tokenized (single spaces around punctuation) so
whitespace tokenization, vocabulary membership and literal goal matching
stay mutually consistent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .textnorm import normalize

# Anomaly classes: the first four are in the robot extractor's base class
# list; dust and moisture are deliberately not, so they are only protected
# after a knowledge-base update.
BASE_ANOMALY_TERMS = ("oil-stain", "burned-out-light", "blocked-aisle",
                      "abnormal-temperature")
KB_ANOMALY_TERMS = ("dust", "moisture")
ALL_ANOMALY_TERMS = BASE_ANOMALY_TERMS + KB_ANOMALY_TERMS

ANOMALY_SPOTS = ("east aisle", "west aisle", "north wall", "south wall",
                 "loading bay", "charging dock", "middle shelf", "entry gate")

SENSOR_TYPES = ("thermal", "camera", "lidar", "audio")
_SENSOR_PREFIX = {"thermal": "t", "camera": "cam", "lidar": "lid", "audio": "aud"}
_SENSOR_UNIT = {"thermal": "c", "camera": "lux", "lidar": "m", "audio": "db"}

WAREHOUSE_X, WAREHOUSE_Y = 12, 15
ROOM_X, ROOM_Y = 10, 10
NUM_RACKS = 8

ITEM_NAMES = ("lamp", "book", "cushion", "vase", "mug", "plate", "remote",
              "bowl", "candle", "plant", "towel", "basket", "bottle", "clock",
              "frame", "pillow", "blanket", "charger", "speaker", "notebook",
              "scarf", "tray", "kettle", "mirror")


def _value_grid(sensor_type: str) -> list:
    if sensor_type == "thermal":
        return [f"{v / 10:.1f}" for v in range(150, 451)]
    if sensor_type == "camera":
        return [str(v) for v in range(100, 1000, 5)]
    if sensor_type == "lidar":
        return [f"{v / 10:.1f}" for v in range(5, 100)]
    return [str(v) for v in range(30, 91)]


@dataclass(frozen=True)
class SensorReading:
    sensor_id: str
    sensor_type: str
    value: str
    unit: str
    rack: str
    location: tuple

    def render(self) -> str:
        return f"{self.sensor_id} {self.value} {self.unit} at {self.rack}"


@dataclass(frozen=True)
class Anomaly:
    term: str
    spot: str
    location: tuple

    @property
    def needs_kb(self) -> bool:
        return self.term in KB_ANOMALY_TERMS

    def render(self) -> str:
        if self.term == "dust":
            return f"slight dust buildup observed near the {self.spot}"
        if self.term == "moisture":
            return f"a moisture patch observed near the {self.spot}"
        return f"warning : {self.term} detected near the {self.spot}"

    def matcher(self) -> str:
        if self.term == "dust":
            return "dust buildup"
        if self.term == "moisture":
            return "moisture patch"
        return f"{self.term} detected"


@dataclass(frozen=True)
class WarehouseState:
    seed: int
    readings: tuple
    anomalies: tuple


def cell_token(coords) -> str:
    """Grid positions render as one identifier token, e.g. ``cell-4-7``."""
    return f"cell-{coords[0]}-{coords[1]}"


@dataclass(frozen=True)
class HouseholdItem:
    name: str
    origin: tuple
    target: tuple

    def render_target(self) -> str:
        return f"{self.name} {cell_token(self.target)}"

    def render_origin(self) -> str:
        return f"{self.name} {cell_token(self.origin)}"


@dataclass(frozen=True)
class HouseholdState:
    seed: int
    items: tuple


@dataclass(frozen=True)
class Goal:
    goal_id: str
    matcher: str
    kind: str
    weight: float = 1.0
    example: str = ""


@dataclass(frozen=True)
class GoalChecklist:
    goals: tuple

    def __post_init__(self):
        if not self.goals:
            raise ValueError("checklist must be nonempty")
        ids = [g.goal_id for g in self.goals]
        if len(set(ids)) != len(ids):
            raise ValueError("goal ids must be unique")
        if any(g.weight <= 0 for g in self.goals):
            raise ValueError("goal weights must be positive")


def _rng(tag: int, seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((tag, int(seed) & 0xFFFFFFFF)))


def gen_case1(seed: int) -> tuple[WarehouseState, GoalChecklist]:
    """Warehouse inspection scene: 18-22 sensor readings, 2-6 anomalies.

    At least one anomaly comes from the knowledge-base-gated classes and at
    least one from the base classes, so the update loop always has work.
    """
    rng = _rng(0xC1, seed)
    n_read = int(rng.integers(18, 23))
    counts = [n_read // 4] * 4
    for i in range(n_read % 4):
        counts[i] += 1

    cells = [(x, y) for x in range(WAREHOUSE_X) for y in range(WAREHOUSE_Y)]
    cell_order = rng.permutation(len(cells))
    cell_iter = iter(cell_order)

    readings = []
    for sensor_type, count in zip(SENSOR_TYPES, counts):
        values = _value_grid(sensor_type)
        picks = rng.choice(len(values), size=count, replace=False)
        for i in range(count):
            sid = f"{_SENSOR_PREFIX[sensor_type]}-{i + 1:02d}"
            rack = f"rack-{int(rng.integers(1, NUM_RACKS + 1))}"
            loc = cells[next(cell_iter)]
            readings.append(SensorReading(sensor_id=sid, sensor_type=sensor_type,
                                          value=values[int(picks[i])],
                                          unit=_SENSOR_UNIT[sensor_type],
                                          rack=rack, location=loc))

    # Exactly one knowledge-gated anomaly per scene keeps the update loop
    # deterministic; the rest come from the base classes.
    n_anom = int(rng.integers(2, 6))
    kb_term = KB_ANOMALY_TERMS[int(rng.integers(0, len(KB_ANOMALY_TERMS)))]
    base_idx = rng.choice(len(BASE_ANOMALY_TERMS), size=n_anom - 1, replace=False)
    terms = [kb_term] + [BASE_ANOMALY_TERMS[int(i)] for i in sorted(base_idx)]
    spot_idx = rng.choice(len(ANOMALY_SPOTS), size=n_anom, replace=False)
    anomalies = tuple(
        Anomaly(term=t, spot=ANOMALY_SPOTS[int(s)], location=cells[next(cell_iter)])
        for t, s in zip(terms, spot_idx))

    state = WarehouseState(seed=int(seed), readings=tuple(readings),
                           anomalies=anomalies)
    goals = [Goal(goal_id=f"reading-{r.sensor_id}", kind="reading",
                  matcher=f"{r.sensor_id} {r.value} {r.unit}",
                  example=r.render())
             for r in readings]
    goals += [Goal(goal_id=f"anomaly-{a.term}", kind="anomaly",
                   matcher=a.matcher(), example=a.render())
              for a in anomalies]
    return state, GoalChecklist(goals=tuple(goals))


def gen_case2(seed: int) -> tuple[HouseholdState, GoalChecklist]:
    """Household cleaning scene: 18-22 items with distinct origins/targets."""
    rng = _rng(0xC2, seed)
    n_items = int(rng.integers(18, 23))
    name_idx = rng.choice(len(ITEM_NAMES), size=n_items, replace=False)
    cells = [(x, y) for x in range(ROOM_X) for y in range(ROOM_Y)]
    cell_idx = rng.choice(len(cells), size=2 * n_items, replace=False)
    items = []
    for i in range(n_items):
        items.append(HouseholdItem(name=ITEM_NAMES[int(name_idx[i])],
                                   origin=cells[int(cell_idx[2 * i])],
                                   target=cells[int(cell_idx[2 * i + 1])]))
    state = HouseholdState(seed=int(seed), items=tuple(items))
    goals = tuple(Goal(goal_id=f"placed-{it.name}", kind="placement",
                       matcher=it.render_target(), example=it.render_target())
                  for it in items)
    return state, GoalChecklist(goals=goals)


class EnvHandle:
    """Robot-side environment access.

    Wraps an immutable scenario state plus the session-scoped actuation
    ledger (items the robot has relocated so far).
    """

    def __init__(self, state):
        self.state = state
        self.moves: dict = {}

    @property
    def scenario(self) -> str:
        return "case1" if isinstance(self.state, WarehouseState) else "case2"

    def apply_move(self, name: str, target: tuple) -> None:
        if self.scenario != "case2":
            raise ValueError("moves only exist in the household scenario")
        if name in {it.name for it in self.state.items}:
            self.moves[name] = tuple(target)

    def current_position(self, name: str):
        if name in self.moves:
            return self.moves[name]
        for it in self.state.items:
            if it.name == name:
                return it.origin
        return None


def env_query(state, request: str) -> list:
    """Return stored facts matching a request class; never invents values.

    Request classes: ``readings``, ``readings:<type>``, ``anomalies``,
    ``items``.  Unknown classes yield a single "no reading" fragment.
    """
    if isinstance(state, WarehouseState):
        if request == "readings":
            return [r.render() for r in state.readings]
        if request.startswith("readings:"):
            sensor_type = request.split(":", 1)[1]
            out = [r.render() for r in state.readings if r.sensor_type == sensor_type]
            return out if out else [f"no reading for {sensor_type}"]
        if request == "anomalies":
            return [a.render() for a in state.anomalies]
    else:
        if request == "items":
            return [it.render_origin() for it in state.items]
    return [f"no reading for {request}"]


def env_facts(env: EnvHandle) -> list:
    """Every current fact of an environment, for a live responder prompt."""
    state = env.state
    if isinstance(state, WarehouseState):
        return ([r.render() for r in state.readings]
                + [a.render() for a in state.anomalies])
    facts = []
    for item in state.items:
        pos = env.current_position(item.name)
        facts.append(f"{item.name} currently at cell-{pos[0]}-{pos[1]}")
    return facts


def scenario_to_json(state, checklist: GoalChecklist) -> str:
    """JSON export of a scenario plus its checklist, for external inspection."""
    if isinstance(state, WarehouseState):
        body = {
            "scenario": "case1",
            "seed": state.seed,
            "area": [WAREHOUSE_X, WAREHOUSE_Y],
            "readings": [{"id": r.sensor_id, "type": r.sensor_type,
                          "value": r.value, "unit": r.unit, "rack": r.rack,
                          "location": list(r.location)} for r in state.readings],
            "anomalies": [{"term": a.term, "spot": a.spot,
                           "location": list(a.location)} for a in state.anomalies],
        }
    else:
        body = {
            "scenario": "case2",
            "seed": state.seed,
            "room": [ROOM_X, ROOM_Y],
            "items": [{"name": it.name, "origin": list(it.origin),
                       "target": list(it.target)} for it in state.items],
        }
    body["checklist"] = [{"id": g.goal_id, "matcher": normalize(g.matcher),
                          "kind": g.kind, "weight": g.weight}
                         for g in checklist.goals]
    return json.dumps(body, indent=2, sort_keys=True)


def corpus_words() -> list:
    """Every content word the generators and agent templates can emit."""
    words = set()
    for sensor_type in SENSOR_TYPES:
        words.update(_value_grid(sensor_type))
        words.add(_SENSOR_UNIT[sensor_type])
        for i in range(1, 9):
            words.add(f"{_SENSOR_PREFIX[sensor_type]}-{i:02d}")
    words.update(f"rack-{i}" for i in range(1, NUM_RACKS + 1))
    words.update(str(v) for v in range(0, max(WAREHOUSE_X, WAREHOUSE_Y, ROOM_X, ROOM_Y)))
    words.update(cell_token((x, y)) for x in range(ROOM_X) for y in range(ROOM_Y))
    words.update(ITEM_NAMES)
    words.update(ALL_ANOMALY_TERMS)
    for spot in ANOMALY_SPOTS:
        words.update(spot.split())
    return sorted(words)
