"""Shared value types for the debate engine.

Motions, stances, stages, claims, arguments, action tuples, statements and
whole-debate state. Everything here is provider-free and deterministic;
natural-language work lives in the modules that consume these types.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .flow import CandidateAction, DebateFlowTree


class DebateError(Exception):
    """Base class for all engine errors."""


class Stance(Enum):
    """Assigned side: supporting (Pro) or opposing (Con) the motion."""

    PRO = "pro"
    CON = "con"

    @property
    def opposite(self) -> Stance:
        return Stance.CON if self is Stance.PRO else Stance.PRO


class Stage(Enum):
    """One of the three speech slots each side gets in an Oxford debate."""

    OPENING = "opening"
    REBUTTAL = "rebuttal"
    CLOSING = "closing"

    @property
    def default_time_limit(self) -> float:
        """Default speaking limit in seconds (4 min / 4 min / 2 min)."""
        return _STAGE_LIMITS[self]


_STAGE_LIMITS = {Stage.OPENING: 240.0, Stage.REBUTTAL: 240.0, Stage.CLOSING: 120.0}


class ActionKind(Enum):
    """The four debate moves a statement can be decomposed into."""

    PROPOSE = "propose"
    REINFORCE = "reinforce"
    ATTACK = "attack"
    REBUT = "rebut"


class NodeStatus(Enum):
    """Lifecycle of a claim in a debate flow tree.

    SOLVED is never assigned by the update rules; it exists only for the
    explicit external transition (see FlowNode.mark_solved).
    """

    PROPOSED = "proposed"
    ATTACKED = "attacked"
    SOLVED = "solved"


class Importance(Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


#: The fixed six-statement Oxford schedule.
OXFORD_SCHEDULE: tuple[tuple[Stance, Stage], ...] = (
    (Stance.PRO, Stage.OPENING),
    (Stance.CON, Stage.OPENING),
    (Stance.PRO, Stage.REBUTTAL),
    (Stance.CON, Stage.REBUTTAL),
    (Stance.PRO, Stage.CLOSING),
    (Stance.CON, Stage.CLOSING),
)


def count_words(text: str) -> int:
    """Whitespace-token count; punctuation stays attached to its token."""
    return len(text.split())


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Motion:
    """The proposition both sides debate."""

    text: str
    id: str = ""

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("motion text must be nonempty")
        if not self.id:
            object.__setattr__(self, "id", text_digest(self.text)[:12])


@dataclass(frozen=True)
class Claim:
    """A proposition about the motion to be proved through argumentation."""

    text: str
    embedding: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("claim text must be nonempty")
        if self.embedding is not None:
            object.__setattr__(self, "embedding", tuple(float(v) for v in self.embedding))


@dataclass(frozen=True)
class Argument:
    """A claim plus the reasoning or evidence offered in its support."""

    claim: Claim
    support_text: str = ""
    evidence_refs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "evidence_refs", tuple(self.evidence_refs))


@dataclass(frozen=True)
class ActionTuple:
    """One extracted debate move: (action, claim, argument, target).

    Propose carries no target; Reinforce/Attack/Rebut must name one.
    """

    kind: ActionKind
    claim: Claim
    argument: str
    target: Optional[Claim] = None

    def __post_init__(self) -> None:
        if self.kind is ActionKind.PROPOSE:
            if self.target is not None:
                raise ValueError("propose tuples carry no target")
        elif self.target is None:
            raise ValueError(f"{self.kind.value} tuples require a target")


@dataclass(frozen=True)
class Statement:
    """The whole passage one side delivers in one stage."""

    side: Stance
    stage: Stage
    text: str
    plan: Optional[str] = None
    estimated_duration: Optional[float] = None
    word_count: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "word_count", count_words(self.text))


@dataclass(frozen=True)
class Battlefield:
    """A contested cluster of claims both sides are fighting over."""

    description: str
    importance: Importance
    rationale: str
    actions: tuple["CandidateAction", ...]

    def __post_init__(self) -> None:
        if not self.actions:
            raise ValueError("battlefield requires at least one action")
        object.__setattr__(self, "actions", tuple(self.actions))


@dataclass
class DebateState:
    """Live state of one debate session.

    Single-owner mutable state: one session mutates it sequentially;
    snapshots for rendering go through the serializer.
    """

    motion: Motion
    sides: dict[Stance, str]
    flow_trees: dict[Stance, "DebateFlowTree"]
    stage_schedule: tuple[tuple[Stance, Stage], ...] = OXFORD_SCHEDULE
    transcript: list[Statement] = field(default_factory=list)
    definitions: dict[Stance, str] = field(default_factory=dict)
    rng_seed: int = 0

    @classmethod
    def new(cls, motion: Motion, pro: str = "pro-debater", con: str = "con-debater",
            rng_seed: int = 0) -> DebateState:
        from .flow import DebateFlowTree

        return cls(
            motion=motion,
            sides={Stance.PRO: pro, Stance.CON: con},
            flow_trees={s: DebateFlowTree(owner=s) for s in (Stance.PRO, Stance.CON)},
            rng_seed=rng_seed,
        )

    def own_tree(self, side: Stance) -> "DebateFlowTree":
        return self.flow_trees[side]

    def opponent_tree(self, side: Stance) -> "DebateFlowTree":
        return self.flow_trees[side.opposite]

    @property
    def cursor(self) -> int:
        """Index of the next schedule slot to play."""
        return len(self.transcript)

    def next_slot(self) -> Optional[tuple[Stance, Stage]]:
        if self.cursor >= len(self.stage_schedule):
            return None
        return self.stage_schedule[self.cursor]

    def append_statement(self, statement: Statement) -> None:
        slot = self.next_slot()
        if slot is None:
            raise DebateError("schedule exhausted; transcript is complete")
        if (statement.side, statement.stage) != slot:
            raise DebateError(
                f"out of order: expected {slot[0].value} {slot[1].value}, "
                f"got {statement.side.value} {statement.stage.value}"
            )
        self.transcript.append(statement)
