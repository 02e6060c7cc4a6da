"""Attack/support impact scoring between pairs of arguments.

The engine needs two scoring functions: how hard an argument hits its
parent (attack) and how well it backs its grandparent (support), both on a
0..2 scale. Scores come from a 3-class impact judgment turned into a
weighted expectation; the scorer itself is pluggable, with a prompt-based
provider implementation and two deterministic offline stubs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Protocol

from .model import DebateError
from .prompts import render_template
from .providers import ChatProvider, ChatRequest, chat_exchange

log = logging.getLogger(__name__)

PROB_SUM_TOLERANCE = 1e-9


class ScoringError(DebateError):
    def __init__(self, message: str, query: Optional["ImpactQuery"] = None) -> None:
        super().__init__(message)
        self.query = query


class ImpactClass(Enum):
    NOT_IMPACTFUL = 0
    MEDIUM_IMPACTFUL = 1
    IMPACTFUL = 2


class Relation(Enum):
    SUPPORT = "support"
    ATTACK = "attack"


@dataclass(frozen=True)
class ImpactDistribution:
    """Probabilities over the three impact classes; must sum to one."""

    probs: dict[ImpactClass, float]

    def __post_init__(self) -> None:
        full = {cls: float(self.probs.get(cls, 0.0)) for cls in ImpactClass}
        object.__setattr__(self, "probs", full)
        if any(p < 0.0 for p in full.values()):
            raise ScoringError("class probabilities must be nonnegative")
        total = sum(full.values())
        if abs(total - 1.0) > PROB_SUM_TOLERANCE:
            raise ScoringError(f"class probabilities sum to {total}, not 1")

    @classmethod
    def point_mass(cls, impact: ImpactClass) -> ImpactDistribution:
        return cls({impact: 1.0})


def weighted_score(dist: ImpactDistribution) -> float:
    """Expected class value: sum of class index times probability, in [0, 2]."""
    return sum(cls.value * p for cls, p in dist.probs.items())


@dataclass(frozen=True)
class ImpactQuery:
    """One pairwise impact question along an argument chain.

    ``parent`` is the argument being acted on, ``child`` the acting one,
    ``context`` the chain of ancestors above the parent, oldest first.
    """

    parent: str
    child: str
    relation: Relation
    context: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.parent.strip() or not self.child.strip():
            raise ScoringError("parent and child must be nonempty")
        object.__setattr__(self, "context", tuple(self.context))

    def canonical(self) -> str:
        return json.dumps(
            {
                "context": list(self.context),
                "parent": self.parent,
                "child": self.child,
                "relation": self.relation.value,
            },
            sort_keys=True,
            ensure_ascii=False,
        )

    @property
    def key(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


class ImpactScorer(Protocol):
    def score(self, query: ImpactQuery) -> float: ...


def score_impact(query: ImpactQuery, scorer: ImpactScorer) -> float:
    """Score one query, clamped to [0, 2]; failures carry the query."""
    try:
        value = scorer.score(query)
    except ScoringError:
        raise
    except Exception as exc:  # noqa: BLE001 - provider faults vary
        raise ScoringError(f"scorer failed: {exc}", query=query) from exc
    return min(2.0, max(0.0, float(value)))


# ---------------------------------------------------------------------------
# Scorer implementations


class SeededStubScorer:
    """Pure function of (query, seed); uniform-ish over [0, 2]."""

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def score(self, query: ImpactQuery) -> float:
        digest = hashlib.sha256(
            f"{self.seed}:{query.canonical()}".encode("utf-8")
        ).digest()
        raw = int.from_bytes(digest[:8], "big")
        return 2.0 * raw / 2**64


class TableStubScorer:
    """Fixture-backed scorer: exact query-key lookup, loud on misses.

    Fixture rows are ``{"key": sha256-of-canonical-query, "relation": ...,
    "score": ...}``; golden examples reproduce bit-exactly.
    """

    def __init__(self, table: dict[str, float], default: Optional[float] = None) -> None:
        self.table = dict(table)
        self.default = default

    @classmethod
    def from_fixture(cls, path: str | Path, default: Optional[float] = None) -> TableStubScorer:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        table = {row["key"]: float(row["score"]) for row in raw["rows"]}
        return cls(table, default=default)

    def score(self, query: ImpactQuery) -> float:
        value = self.table.get(query.key, self.default)
        if value is None:
            raise ScoringError(
                f"no fixture score for query key {query.key[:12]}", query=query
            )
        return value


_CLASS_TOKEN_RE = re.compile(r"\b([012])\b")


def parse_class_reply(reply: str) -> ImpactClass:
    """Parse the single-class token out of a provider reply.

    A bare token is taken as-is; in a verbose reply the last standalone
    token wins, since echoed instructions can mention all three digits.
    """
    stripped = reply.strip()
    if stripped in ("0", "1", "2"):
        return ImpactClass(int(stripped))
    matches = _CLASS_TOKEN_RE.findall(reply)
    if not matches:
        raise ScoringError(f"no class token in scorer reply: {reply[:80]!r}")
    return ImpactClass(int(matches[-1]))


class PromptImpactScorer:
    """Asks the provider for the impact class of one argument pair.

    When the provider exposes token probabilities (``class_probabilities``
    hook), the full distribution feeds the weighted score; otherwise the
    returned class counts as a point mass.
    """

    def __init__(self, provider: ChatProvider, temperature: float = 0.0) -> None:
        self.provider = provider
        self.temperature = temperature

    def _request(self, query: ImpactQuery) -> ChatRequest:
        prompt = render_template(
            "impact_instruction",
            context="\n".join(query.context) if query.context else "(none)",
            claim1=query.parent,
            claim2=query.child,
            relation=query.relation.value,
        )
        return ChatRequest(prompt=prompt, temperature=self.temperature, max_tokens=8,
                           issuer="scoring.impact")

    def score(self, query: ImpactQuery) -> float:
        request = self._request(query)
        probs_hook = getattr(self.provider, "class_probabilities", None)
        if probs_hook is not None:
            raw = probs_hook(request)
            dist = ImpactDistribution(
                {ImpactClass(int(k)): float(v) for k, v in raw.items()}
            )
            return weighted_score(dist)
        reply = chat_exchange(self.provider, request)
        cls = parse_class_reply(reply)
        return weighted_score(ImpactDistribution.point_mass(cls))


@dataclass
class ScorePair:
    """Bundles the attack and support scorers used during tree building."""

    attack: ImpactScorer
    support: ImpactScorer

    @classmethod
    def single(cls, scorer: ImpactScorer) -> ScorePair:
        return cls(attack=scorer, support=scorer)

    def attack_score(self, query: ImpactQuery) -> float:
        return score_impact(query, self.attack)

    def support_score(self, query: ImpactQuery) -> float:
        return score_impact(query, self.support)


def save_fixture(rows: list[dict], path: str | Path) -> None:
    """Write a score-table fixture: rows of (key, relation, score)."""
    doc = {"schema_version": 1, "kind": "impact_score_table", "rows": rows}
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
