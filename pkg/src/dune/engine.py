"""Demon state machine: incremental confidence tracking over a feature stream.

A knowledge base declares *demons*, one per candidate interpretation of the
data seen so far. Each demon scores incoming features through weighted
leaves and through count-based OR-groups whose cumulative bonus schedules
award extra confidence as more alternatives from the same group arrive.
The engine feeds one feature per step to every demon still in play, clamps
confidence to [-100, 100], and evaluates lifecycle transitions against the
demon's thresholds (death, reject, accept) in that precedence order.

All demons update within a step against the same pre-step environment
snapshot, so the result of a step does not depend on the order in which
demons are visited.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping

FEATURE_PATTERN = re.compile(r"\A[a-z_][a-z0-9_]*\Z")

CONF_MIN = -100
CONF_MAX = 100

# Identity behavior: the applied delta is exactly raw + or_bonus.
STANDARD_BEHAVIOR = "standard-data-demon"


class EngineConfigError(Exception):
    """The engine cannot be built or reconfigured as requested."""

    def __init__(self, message: str, diagnostics: Iterable = ()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class InvalidFeatureError(ValueError):
    """Feature string does not match the identifier grammar."""


class DemonStatus(str, Enum):
    ALIVE = "ALIVE"
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"
    DEAD = "DEAD"


class Reachability(str, Enum):
    ACCEPTED = "ACCEPTED"
    POSSIBLE = "POSSIBLE"
    IMPOSSIBLE = "IMPOSSIBLE"


def clamp_confidence(value: int) -> int:
    return max(CONF_MIN, min(CONF_MAX, value))


@dataclass(frozen=True)
class ThresholdSet:
    """Lifecycle thresholds. Sane sets satisfy death <= reject < accept."""

    death: int = 0
    reject: int = 0
    accept: int = 90


@dataclass(frozen=True)
class BonusSchedule:
    """Cumulative OR bonus B(1..n), nondecreasing, each value in [0, 100].

    B(0) is defined as 0. A schedule shorter than the group it serves is
    padded with its last value.
    """

    cumulative: tuple[int, ...]

    def at(self, k: int) -> int:
        if k <= 0 or not self.cumulative:
            return 0
        if k > len(self.cumulative):
            return self.cumulative[-1]
        return self.cumulative[k - 1]


@dataclass(frozen=True)
class CriterionGroup:
    """A named group of alternative features sharing one bonus schedule.

    schedule=None means no bonus clause was given: every count maps to 0.
    """

    name: str
    members: tuple[str, ...]
    schedule: BonusSchedule | None = None
    source_pos: tuple[int, int] | None = field(default=None, compare=False)

    def bonus_at(self, k: int) -> int:
        if self.schedule is None:
            return 0
        return self.schedule.at(min(k, len(self.members)))

    def full_bonus(self) -> int:
        return self.bonus_at(len(self.members))


@dataclass
class DemonDef:
    """Static definition of one demon as declared in the knowledge base."""

    name: str
    leaves: dict[str, int] = field(default_factory=dict)
    groups: list[CriterionGroup] = field(default_factory=list)
    thresholds: ThresholdSet = field(default_factory=ThresholdSet)
    behavior: str = STANDARD_BEHAVIOR
    output_text: str | None = None
    source_pos: tuple[int, int] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.output_text is None:
            self.output_text = self.name

    def relevant_features(self) -> set[str]:
        out = set(self.leaves)
        for group in self.groups:
            out.update(group.members)
        return out


@dataclass
class KnowledgeBase:
    demons: list[DemonDef] = field(default_factory=list)

    def vocabulary(self) -> set[str]:
        out: set[str] = set()
        for demon in self.demons:
            out |= demon.relevant_features()
        return out

    def demon(self, name: str) -> DemonDef | None:
        for demon in self.demons:
            if demon.name == name:
                return demon
        return None


@dataclass
class GroupState:
    """Runtime counters for one group: prev_or_bonus caches B(satisfied_count)."""

    satisfied_count: int = 0
    prev_or_bonus: int = 0


@dataclass
class DemonState:
    status: DemonStatus = DemonStatus.ALIVE
    confidence: int = 0
    # Confidence held immediately before the most recent change; it does not
    # move on steps where confidence stays put.
    old_confidence: int = 0
    rcvd_features: list[str] = field(default_factory=list)
    fnum: int = 0
    group_states: list[GroupState] = field(default_factory=list)
    accepted_latched: bool = False
    last_react: int = 0
    last_or_bonus: int = 0


@dataclass(frozen=True)
class Reaction:
    """Raw, uninhibited response of one demon to one feature."""

    raw: int
    or_bonus: int
    group_deltas: Mapping[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class Environment:
    """Pre-step snapshot shared by every demon updating in that step."""

    alive_count: int
    confidences: tuple[tuple[str, int], ...]


Behavior = Callable[[Reaction, Environment], int]


def standard_data_demon(reaction: Reaction, env: Environment) -> int:
    return reaction.raw + reaction.or_bonus


@dataclass(frozen=True)
class TraceRow:
    demon: str
    state: str
    conf: int
    old: int
    death: int
    accp: int
    rejct: int
    fnum: int
    react: int
    or_bns: int

    def to_json(self) -> dict:
        return {
            "demon": self.demon,
            "state": self.state,
            "conf": self.conf,
            "old": self.old,
            "death": self.death,
            "accp": self.accp,
            "rejct": self.rejct,
            "fnum": self.fnum,
            "react": self.react,
            "or_bns": self.or_bns,
        }


EVENT_ACCEPT = "ACCEPT"
EVENT_DEATH = "DEATH"
EVENT_REJECT = "REJECT"
EVENT_UNKNOWN_FEATURE = "UNKNOWN_FEATURE"


@dataclass(frozen=True)
class Event:
    type: str
    demon: str | None = None
    output_text: str | None = None
    feature: str | None = None

    @classmethod
    def accept(cls, demon: str, output_text: str) -> "Event":
        return cls(EVENT_ACCEPT, demon=demon, output_text=output_text)

    @classmethod
    def death(cls, demon: str) -> "Event":
        return cls(EVENT_DEATH, demon=demon)

    @classmethod
    def reject(cls, demon: str) -> "Event":
        return cls(EVENT_REJECT, demon=demon)

    @classmethod
    def unknown_feature(cls, feature: str) -> "Event":
        return cls(EVENT_UNKNOWN_FEATURE, feature=feature)

    def to_json(self) -> dict:
        out: dict = {"type": self.type}
        if self.demon is not None:
            out["demon"] = self.demon
        if self.output_text is not None:
            out["output_text"] = self.output_text
        if self.feature is not None:
            out["feature"] = self.feature
        return out


@dataclass(frozen=True)
class StepReport:
    fnum: int
    feature: str
    rows: tuple[TraceRow, ...]
    events: tuple[Event, ...]

    def to_json(self) -> dict:
        return {
            "fnum": self.fnum,
            "feature": self.feature,
            "rows": [row.to_json() for row in self.rows],
            "events": [event.to_json() for event in self.events],
        }


@dataclass(frozen=True)
class QuestionSuggestion:
    demon: str
    feature: str
    potential: int


@dataclass
class EngineState:
    kb: KnowledgeBase
    demon_states: dict[str, DemonState]
    behaviors: dict[str, Behavior]
    step: int = 0
    vocab: frozenset[str] = frozenset()

    def state_of(self, name: str) -> DemonState:
        return self.demon_states[name]

    def modifier_pipeline(self, reaction: Reaction, env: Environment, behavior: str) -> int:
        try:
            fn = self.behaviors[behavior]
        except KeyError:
            raise EngineConfigError(f"behavior not registered: {behavior!r}") from None
        return int(fn(reaction, env))


def init_engine(kb: KnowledgeBase, behaviors: Mapping[str, Behavior] | None = None) -> EngineState:
    """Build a fresh engine for kb.

    behaviors supplies custom behavior implementations keyed by id; ids the
    knowledge base references must all resolve here or in the built-in set,
    otherwise initialization is refused with diagnostics.
    """
    registry: dict[str, Behavior] = {STANDARD_BEHAVIOR: standard_data_demon}
    if behaviors:
        for behavior_id, fn in behaviors.items():
            if behavior_id in registry:
                raise EngineConfigError(f"behavior id already registered: {behavior_id!r}")
            registry[behavior_id] = fn

    from .kb import Severity, validate_kb

    diagnostics = validate_kb(kb, known_behaviors=frozenset(registry))
    errors = [d for d in diagnostics if d.severity is Severity.ERROR]
    if errors:
        detail = "; ".join(d.message for d in errors)
        raise EngineConfigError(f"knowledge base rejected: {detail}", errors)

    states = {
        demon.name: DemonState(group_states=[GroupState() for _ in demon.groups])
        for demon in kb.demons
    }
    return EngineState(kb=kb, demon_states=states, behaviors=registry, vocab=frozenset(kb.vocabulary()))


def register_behavior(engine: EngineState, behavior_id: str, fn: Behavior) -> None:
    """Add a custom behavior to a live engine. Existing ids, the built-in
    included, cannot be replaced."""
    if not behavior_id or not isinstance(behavior_id, str):
        raise EngineConfigError("behavior id must be a non-empty string")
    if behavior_id in engine.behaviors:
        raise EngineConfigError(f"behavior id already registered: {behavior_id!r}")
    engine.behaviors[behavior_id] = fn


def environment_snapshot(engine: EngineState) -> Environment:
    """Pre-step view: the demons still running and their confidences."""
    running = [
        (demon.name, engine.demon_states[demon.name].confidence)
        for demon in engine.kb.demons
        if engine.demon_states[demon.name].status is not DemonStatus.DEAD
    ]
    return Environment(alive_count=len(running), confidences=tuple(running))


def raw_reaction(defn: DemonDef, state: DemonState, feature: str) -> Reaction:
    """Pure response of one demon to one feature given its pre-step state.

    A feature already received yields the zero reaction. Otherwise raw is the
    leaf weight (0 when absent) and each group containing the feature
    contributes B(k+1) - B(k) to or_bonus.
    """
    if state.status is DemonStatus.DEAD:
        raise ValueError(f"dead demon cannot react: {defn.name}")
    if feature in state.rcvd_features:
        return Reaction(0, 0, {})
    raw = defn.leaves.get(feature, 0)
    deltas: dict[str, int] = {}
    for group, gstate in zip(defn.groups, state.group_states):
        if feature in group.members:
            deltas[group.name] = group.bonus_at(gstate.satisfied_count + 1) - gstate.prev_or_bonus
    return Reaction(raw, sum(deltas.values()), deltas)


def _trace_row(defn: DemonDef, state: DemonState, engine_step: int) -> TraceRow:
    # Dead demons render the -1 sentinel everywhere; internally the real
    # confidence is retained. react/or_bns belong to the demon only if it
    # processed the most recent step (dead demons stop processing).
    processed_last = state.fnum == engine_step
    thresholds = defn.thresholds
    return TraceRow(
        demon=defn.name,
        state=state.status.value,
        conf=-1 if state.status is DemonStatus.DEAD else state.confidence,
        old=state.old_confidence,
        death=thresholds.death,
        accp=thresholds.accept,
        rejct=thresholds.reject,
        fnum=state.fnum,
        react=state.last_react if processed_last else 0,
        or_bns=state.last_or_bonus if processed_last else 0,
    )


def apply_step(engine: EngineState, feature: str) -> StepReport:
    """Feed one feature to every non-dead demon and report the outcome.

    The feature must match the identifier grammar; anything else is rejected
    before the step counter moves. Every surviving demon reacts against the
    same pre-step snapshot, then its lifecycle is evaluated once with
    precedence death > accept > reject. ACCEPT fires at most once per demon;
    DEAD is terminal and freezes the demon's state.
    """
    if not isinstance(feature, str) or not FEATURE_PATTERN.match(feature):
        raise InvalidFeatureError(f"not a feature identifier: {feature!r}")

    env = environment_snapshot(engine)
    engine.step += 1

    events: list[Event] = []
    if feature not in engine.vocab:
        events.append(Event.unknown_feature(feature))

    for defn in engine.kb.demons:
        state = engine.demon_states[defn.name]
        if state.status is DemonStatus.DEAD:
            continue

        reaction = raw_reaction(defn, state, feature)
        delta = engine.modifier_pipeline(reaction, env, defn.behavior)

        new_conf = clamp_confidence(state.confidence + delta)
        if new_conf != state.confidence:
            state.old_confidence = state.confidence
            state.confidence = new_conf

        if feature not in state.rcvd_features:
            state.rcvd_features.append(feature)
            for group, gstate in zip(defn.groups, state.group_states):
                if feature in group.members:
                    gstate.satisfied_count += 1
                    gstate.prev_or_bonus = group.bonus_at(gstate.satisfied_count)

        state.fnum = engine.step
        state.last_react = reaction.raw
        state.last_or_bonus = reaction.or_bonus

        thresholds = defn.thresholds
        if state.confidence < thresholds.death:
            state.status = DemonStatus.DEAD
            events.append(Event.death(defn.name))
        elif state.accepted_latched or state.confidence >= thresholds.accept:
            if not state.accepted_latched:
                state.accepted_latched = True
                events.append(Event.accept(defn.name, defn.output_text or defn.name))
            state.status = DemonStatus.ACCEPTED
        elif state.confidence < thresholds.reject:
            if state.status is not DemonStatus.REJECTED:
                events.append(Event.reject(defn.name))
            state.status = DemonStatus.REJECTED
        else:
            state.status = DemonStatus.ALIVE

    rows = tuple(
        _trace_row(defn, engine.demon_states[defn.name], engine.step) for defn in engine.kb.demons
    )
    return StepReport(fnum=engine.step, feature=feature, rows=rows, events=tuple(events))


def snapshot(engine: EngineState) -> list[TraceRow]:
    """Current rows in declaration order; equals the rows of the last report."""
    return [_trace_row(defn, engine.demon_states[defn.name], engine.step) for defn in engine.kb.demons]


def potential_remaining(defn: DemonDef, state: DemonState) -> int:
    """Upper bound on further confidence gain: unreceived positive leaves plus
    the unconsumed remainder of every bonus schedule. Dead demons have none."""
    if state.status is DemonStatus.DEAD:
        return 0
    total = sum(
        max(0, weight) for feature, weight in defn.leaves.items() if feature not in state.rcvd_features
    )
    for group, gstate in zip(defn.groups, state.group_states):
        total += group.full_bonus() - group.bonus_at(gstate.satisfied_count)
    return total


def reachability(defn: DemonDef, state: DemonState) -> Reachability:
    if state.accepted_latched:
        return Reachability.ACCEPTED
    if state.status is DemonStatus.DEAD:
        return Reachability.IMPOSSIBLE
    if state.confidence + potential_remaining(defn, state) < defn.thresholds.accept:
        return Reachability.IMPOSSIBLE
    return Reachability.POSSIBLE


def _marginal_potential(defn: DemonDef, state: DemonState, feature: str) -> int:
    pot = max(0, defn.leaves.get(feature, 0))
    for group, gstate in zip(defn.groups, state.group_states):
        if feature in group.members:
            pot += group.bonus_at(gstate.satisfied_count + 1) - group.bonus_at(gstate.satisfied_count)
    return pot


def best_question(engine: EngineState) -> QuestionSuggestion | None:
    """Pick the next feature worth asking about.

    Demons not dead and not yet accepted are scanned by descending confidence
    (name ascending on ties); the first one holding an unreceived feature
    with positive marginal potential sponsors the question, and the feature
    with the highest potential wins (name ascending on ties).
    """
    candidates = [
        defn
        for defn in engine.kb.demons
        if engine.demon_states[defn.name].status is not DemonStatus.DEAD
        and not engine.demon_states[defn.name].accepted_latched
    ]
    candidates.sort(key=lambda d: (-engine.demon_states[d.name].confidence, d.name))

    for defn in candidates:
        state = engine.demon_states[defn.name]
        best_feature: str | None = None
        best_pot = 0
        for feature in sorted(defn.relevant_features()):
            if feature in state.rcvd_features:
                continue
            pot = _marginal_potential(defn, state, feature)
            if pot > best_pot:
                best_feature, best_pot = feature, pot
        if best_feature is not None:
            return QuestionSuggestion(demon=defn.name, feature=best_feature, potential=best_pot)
    return None
