"""Competitive-debate planning engine.

Plans debate actions over two tree structures (pre-debate rehearsal trees
and live debate flow trees), controls speech time against stage limits,
and revises drafts with simulated-audience feedback. All model, embedding
and duration dependencies sit behind pluggable provider interfaces.
"""

from .model import (
    ActionKind,
    ActionTuple,
    Argument,
    Battlefield,
    Claim,
    DebateError,
    DebateState,
    Importance,
    Motion,
    NodeStatus,
    OXFORD_SCHEDULE,
    Stage,
    Stance,
    Statement,
)

__version__ = "0.1.0"

__all__ = [
    "ActionKind",
    "ActionTuple",
    "Argument",
    "Battlefield",
    "Claim",
    "DebateError",
    "DebateState",
    "Importance",
    "Motion",
    "NodeStatus",
    "OXFORD_SCHEDULE",
    "Stage",
    "Stance",
    "Statement",
    "__version__",
]
