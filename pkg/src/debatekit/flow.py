"""Live debate state: flow trees, action extraction, candidate actions.

A flow tree keeps every proposed claim with its attacks and defenses. Each
delivered statement is decomposed into (action, claim, argument, target)
tuples which drive the tree update rules; the trees in turn define which
moves are legal at each stage and what prepared material backs them.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, Optional, Protocol, Sequence

from .model import (
    ActionKind,
    ActionTuple,
    Claim,
    DebateError,
    NodeStatus,
    Stage,
    Stance,
    Statement,
)
from .prompts import render_template

if TYPE_CHECKING:
    from .rehearsal import RehearsalNode, RehearsalTree
    from .semantic import NodeMatcher

log = logging.getLogger(__name__)


class FlowError(DebateError):
    pass


class MatchNotFound(FlowError):
    """No tree node cleared the similarity threshold for a targeted tuple."""


@dataclass
class FlowNode:
    """One claim in a debate flow tree.

    ``claim`` is None only on the synthetic root anchor. ``created_at`` is
    the (stage, turn index) of the statement that introduced the node, when
    the caller supplies turn metadata.
    """

    claim: Optional[Claim]
    side: Stance
    arguments: list[str] = field(default_factory=list)
    status: NodeStatus = NodeStatus.PROPOSED
    visits: int = 0
    children: list[FlowNode] = field(default_factory=list)
    created_at: Optional[tuple[Stage, int]] = None

    @property
    def claim_text(self) -> str:
        return self.claim.text if self.claim is not None else ""

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def mark_solved(self) -> None:
        """Explicit external transition; the update rules never set SOLVED."""
        self.status = NodeStatus.SOLVED


@dataclass
class DebateFlowTree:
    """All claims one side has proposed, with the replies they drew."""

    owner: Stance
    root: FlowNode = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.root is None:
            self.root = FlowNode(claim=None, side=self.owner)

    def iter_nodes(self) -> Iterator[FlowNode]:
        """Pre-order over real nodes; the synthetic root is excluded."""

        def visit(node: FlowNode) -> Iterator[FlowNode]:
            yield node
            for child in node.children:
                yield from visit(child)

        for top in self.root.children:
            yield from visit(top)

    def total_visits(self) -> int:
        return sum(n.visits for n in self.iter_nodes())


@dataclass
class UpdateResult:
    node: Optional[FlowNode]
    created: bool
    matched: bool
    miss: bool
    similarity: Optional[float] = None


def update_flow_tree(
    tree: DebateFlowTree,
    tup: ActionTuple,
    matcher: "NodeMatcher",
    created_at: Optional[tuple[Stage, int]] = None,
) -> UpdateResult:
    """Apply one action tuple to a flow tree.

    Propose creates a Proposed child of the root. The targeted kinds first
    locate the most similar node at or above the matcher's threshold and
    bump its visit count; Reinforce extends its arguments, Attack/Rebut hang
    a new opposite-side child off it and flip it to Attacked.

    Misses: an unmatched Attack/Rebut claim is kept as an implicit
    counter-proposal under the root; an unmatched Reinforce is dropped.
    Either way the miss is reported on the result, and visits only ever
    count matched tuples.
    """
    if tup.kind is ActionKind.PROPOSE:
        node = FlowNode(
            claim=tup.claim,
            side=tree.owner,
            arguments=[tup.argument] if tup.argument else [],
            created_at=created_at,
        )
        tree.root.children.append(node)
        return UpdateResult(node, created=True, matched=False, miss=False)

    assert tup.target is not None
    hit = matcher.best_match(tree.iter_nodes(), tup.target.text, lambda n: n.claim_text)
    if hit is None:
        if tup.kind is ActionKind.REINFORCE:
            log.info("reinforce miss, tuple dropped: %r", tup.target.text[:60])
            return UpdateResult(None, created=False, matched=False, miss=True)
        log.info("%s miss, kept as counter-proposal: %r", tup.kind.value, tup.claim.text[:60])
        node = FlowNode(
            claim=tup.claim,
            side=tree.owner,
            arguments=[tup.argument] if tup.argument else [],
            created_at=created_at,
        )
        tree.root.children.append(node)
        return UpdateResult(node, created=True, matched=False, miss=True)

    target, similarity = hit
    target.visits += 1
    if tup.kind is ActionKind.REINFORCE:
        if tup.argument:
            target.arguments.append(tup.argument)
        return UpdateResult(target, created=False, matched=True, miss=False,
                            similarity=similarity)

    child = FlowNode(
        claim=tup.claim,
        side=target.side.opposite,
        arguments=[tup.argument] if tup.argument else [],
        created_at=created_at,
    )
    target.children.append(child)
    target.status = NodeStatus.ATTACKED
    return UpdateResult(child, created=True, matched=True, miss=False,
                        similarity=similarity)


# ---------------------------------------------------------------------------
# Candidate actions


@dataclass
class RetrievedArgument:
    """A prepared rehearsal node attached to a candidate action."""

    node: "RehearsalNode"
    strength: float


@dataclass
class CandidateAction:
    """A legal next move, optionally enriched with rehearsal material."""

    kind: ActionKind
    target: Optional[FlowNode] = None
    claim: Optional[Claim] = None  # the claim to advance, when already known
    retrieved: list[RetrievedArgument] = field(default_factory=list)
    k_used: int = 0

    @property
    def hit(self) -> bool:
        """Non-empty retrieval set, the hit-rate accounting definition."""
        return bool(self.retrieved)

    @property
    def target_text(self) -> Optional[str]:
        if self.target is not None:
            return self.target.claim_text
        if self.claim is not None:
            return self.claim.text
        return None

    @property
    def best_strength(self) -> Optional[float]:
        if not self.retrieved:
            return None
        return max(r.strength for r in self.retrieved)


def candidate_actions(
    own: DebateFlowTree,
    oppo: DebateFlowTree,
    stage: Stage,
    latest_turn_only: bool = False,
) -> list[CandidateAction]:
    """Legal moves for the owner of ``own`` at the given stage.

    Propose is offered only at the opening; Reinforce targets nodes on the
    owner's side, Attack targets nodes on the opposite side, Rebut targets
    opposite-side leaves (optionally only those from the latest opposing
    turn when turn metadata exists). A pure function of (trees, stage).
    """
    side = own.owner
    actions: list[CandidateAction] = []
    if stage is Stage.OPENING:
        actions.append(CandidateAction(kind=ActionKind.PROPOSE))

    every_node = list(own.iter_nodes()) + list(oppo.iter_nodes())
    for node in every_node:
        if node.side == side:
            actions.append(CandidateAction(kind=ActionKind.REINFORCE, target=node))
    for node in every_node:
        if node.side != side:
            actions.append(CandidateAction(kind=ActionKind.ATTACK, target=node))

    oppo_leaves = [n for n in every_node if n.side != side and n.is_leaf]
    if latest_turn_only:
        turns = [n.created_at[1] for n in oppo_leaves if n.created_at is not None]
        if turns:
            latest = max(turns)
            oppo_leaves = [
                n for n in oppo_leaves
                if n.created_at is not None and n.created_at[1] == latest
            ]
    for node in oppo_leaves:
        actions.append(CandidateAction(kind=ActionKind.REBUT, target=node))
    return actions


_ROUNDS_REMAINING = {
    (Stance.PRO, Stage.OPENING): 3,
    (Stance.CON, Stage.OPENING): 2,
    (Stance.PRO, Stage.REBUTTAL): 1,
    (Stance.CON, Stage.REBUTTAL): 0,
    (Stance.PRO, Stage.CLOSING): 0,
    (Stance.CON, Stage.CLOSING): 0,
}


def remaining_rounds_k(stage: Stage, side: Stance) -> int:
    """Effective rounds left after this statement; closings don't count."""
    return _ROUNDS_REMAINING[(side, stage)]


def retrieve_prepared(
    actions: Sequence[CandidateAction],
    forest: Sequence["RehearsalTree"],
    side: Stance,
    k: int,
    matcher: "NodeMatcher",
) -> list[CandidateAction]:
    """Attach prepared rehearsal arguments and lookahead strengths.

    For Propose/Reinforce the match is sought among rehearsal nodes on the
    acting side and the node itself is attached; for Attack/Rebut the match
    is sought on the opposite side and its children (the prepared counters)
    are attached. An empty retrieval set is a valid outcome.
    """
    from .rehearsal import strength_at

    for action in actions:
        action.retrieved = []
        action.k_used = k
        text = action.target_text
        if text is None:
            continue
        want_side = side if action.kind in (ActionKind.PROPOSE, ActionKind.REINFORCE) else side.opposite
        for tree in forest:
            nodes = [n for n in tree.iter_nodes() if n.side == want_side]
            hit = matcher.best_match(nodes, text, lambda n: n.argument.claim.text)
            if hit is None:
                continue
            node, _ = hit
            if action.kind in (ActionKind.PROPOSE, ActionKind.REINFORCE):
                action.retrieved.append(RetrievedArgument(node, strength_at(tree, node, k)))
            else:
                for child in node.children:
                    action.retrieved.append(
                        RetrievedArgument(child, strength_at(tree, child, k))
                    )
    return list(actions)


# ---------------------------------------------------------------------------
# Tuple extraction


class TupleExtractor(Protocol):
    def extract(self, statement: Statement, trees_rendered: str) -> list[ActionTuple]: ...


class ScriptedTupleExtractor:
    """Returns a fixed queue of tuple lists, one list per statement."""

    def __init__(self, scripted: Sequence[Sequence[ActionTuple]]) -> None:
        self._queue = [list(batch) for batch in scripted]

    def extract(self, statement: Statement, trees_rendered: str) -> list[ActionTuple]:
        if not self._queue:
            raise FlowError("scripted extractor exhausted")
        return self._queue.pop(0)


_JSON_BLOCK_RE = re.compile(r"\[.*\]", re.DOTALL)

_KIND_BY_NAME = {k.value: k for k in ActionKind}


def parse_tuple_reply(reply: str) -> list[ActionTuple]:
    """Parse the extractor's JSON array reply into action tuples."""
    block = _JSON_BLOCK_RE.search(reply)
    if block is None:
        raise FlowError("no JSON array in extractor reply")
    try:
        raw = json.loads(block.group(0))
    except json.JSONDecodeError as exc:
        raise FlowError(f"invalid JSON in extractor reply: {exc}") from exc
    if not isinstance(raw, list):
        raise FlowError("extractor reply is not a list")
    tuples: list[ActionTuple] = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise FlowError(f"tuple {i} is not an object")
        kind_name = str(item.get("action", "")).strip().lower()
        kind = _KIND_BY_NAME.get(kind_name)
        if kind is None:
            raise FlowError(f"tuple {i} has unknown action kind {kind_name!r}")
        claim_text = str(item.get("claim", "")).strip()
        if not claim_text:
            raise FlowError(f"tuple {i} is missing a claim")
        target_text = item.get("target")
        target = None
        if target_text is not None and str(target_text).strip():
            target = Claim(str(target_text).strip())
        if kind is ActionKind.PROPOSE:
            target = None
        elif target is None:
            raise FlowError(f"tuple {i} ({kind_name}) is missing a target")
        tuples.append(
            ActionTuple(
                kind=kind,
                claim=Claim(claim_text),
                argument=str(item.get("argument", "")).strip(),
                target=target,
            )
        )
    return tuples


class PromptTupleExtractor:
    """Extracts action tuples via one chat call; retries a bad parse once."""

    def __init__(self, provider, temperature: float = 0.0) -> None:
        self.provider = provider
        self.temperature = temperature

    def extract(self, statement: Statement, trees_rendered: str) -> list[ActionTuple]:
        from .providers import ChatRequest, chat_exchange

        prompt = render_template(
            "tuple_extraction",
            side=statement.side.value,
            stage=statement.stage.value,
            trees=trees_rendered,
            statement=statement.text,
        )
        request = ChatRequest(prompt=prompt, temperature=self.temperature,
                              issuer="flow.extract")
        reply = chat_exchange(self.provider, request)
        try:
            return parse_tuple_reply(reply)
        except FlowError:
            log.warning("tuple extraction parse failed; retrying once")
            reply = chat_exchange(self.provider, request)
            return parse_tuple_reply(reply)


def extract_action_tuples(
    statement: Statement,
    extractor: TupleExtractor,
    trees_rendered: str = "",
) -> list[ActionTuple]:
    """Decompose one statement into ordered action tuples."""
    if not statement.text.strip():
        raise FlowError("cannot extract from an empty statement")
    return extractor.extract(statement, trees_rendered)


def apply_statement_tuples(
    trees: dict[Stance, DebateFlowTree],
    tuples: Sequence[ActionTuple],
    speaker: Stance,
    matcher: "NodeMatcher",
    created_at: Optional[tuple[Stage, int]] = None,
) -> list[UpdateResult]:
    """Route a statement's tuples into the two-tree pair.

    Propose goes under the speaker's own root. Targeted kinds search both
    trees for the best node on the expected side (own side for Reinforce,
    the opponent's for Attack/Rebut) and update in place; misses follow the
    single-tree policy, with counter-proposals landing in the speaker's tree.
    """
    results: list[UpdateResult] = []
    for tup in tuples:
        if tup.kind is ActionKind.PROPOSE:
            results.append(
                update_flow_tree(trees[speaker], tup, matcher, created_at=created_at)
            )
            continue
        assert tup.target is not None
        want_side = speaker if tup.kind is ActionKind.REINFORCE else speaker.opposite
        pool = [
            n
            for tree in (trees[speaker], trees[speaker.opposite])
            for n in tree.iter_nodes()
            if n.side == want_side
        ]
        hit = matcher.best_match(pool, tup.target.text, lambda n: n.claim_text)
        if hit is None:
            if tup.kind is ActionKind.REINFORCE:
                log.info("reinforce miss, tuple dropped: %r", tup.target.text[:60])
                results.append(UpdateResult(None, created=False, matched=False, miss=True))
                continue
            node = FlowNode(
                claim=tup.claim,
                side=speaker,
                arguments=[tup.argument] if tup.argument else [],
                created_at=created_at,
            )
            trees[speaker].root.children.append(node)
            results.append(UpdateResult(node, created=True, matched=False, miss=True))
            continue
        target, similarity = hit
        target.visits += 1
        if tup.kind is ActionKind.REINFORCE:
            if tup.argument:
                target.arguments.append(tup.argument)
            results.append(
                UpdateResult(target, created=False, matched=True, miss=False,
                             similarity=similarity)
            )
            continue
        child = FlowNode(
            claim=tup.claim,
            side=target.side.opposite,
            arguments=[tup.argument] if tup.argument else [],
            created_at=created_at,
        )
        target.children.append(child)
        target.status = NodeStatus.ATTACKED
        results.append(
            UpdateResult(child, created=True, matched=True, miss=False,
                         similarity=similarity)
        )
    return results
