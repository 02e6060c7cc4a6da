"""Pre-debate rehearsal trees: anticipated exchanges and strength scores.

A rehearsal tree is rooted at a candidate main claim; children are the
counterarguments the other side is expected to raise, alternating sides
level by level. Each node carries an attack score against its parent and a
support score toward its grandparent; a k-step lookahead strength then
backs these up bottom-up, assuming the opponent always plays the reply
that is best for them, discounted by a decay factor per ply.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Protocol, Sequence

from .model import Argument, Claim, DebateError, Motion, Stance
from .prompts import render_template
from .providers import ChatProvider, ChatRequest, chat_exchange
from .scoring import ImpactQuery, Relation, ScorePair

log = logging.getLogger(__name__)

DEFAULT_DECAY = 0.8
STRENGTH_TIE_EPS = 1e-12


class RehearsalError(DebateError):
    pass


class BuildError(RehearsalError):
    """Tree construction aborted; carries the partial tree for diagnostics."""

    def __init__(self, message: str, partial: Optional["RehearsalTree"] = None,
                 node_path: Optional[list[int]] = None) -> None:
        super().__init__(message)
        self.partial = partial
        self.node_path = node_path or []


class TreeOwner(Enum):
    OWN = "own"
    OPPONENT = "opponent"


@dataclass(frozen=True)
class RehearsalParams:
    """Branching bound B, depth bound L, and per-ply decay."""

    branch: int = 3
    depth: int = 3
    decay: float = DEFAULT_DECAY

    def __post_init__(self) -> None:
        if self.branch < 1:
            raise ValueError("branch bound must be >= 1")
        if self.depth < 0:
            raise ValueError("depth bound must be >= 0")
        if not 0.0 < self.decay <= 1.0:
            raise ValueError("decay must be in (0, 1]")


@dataclass
class RehearsalNode:
    """One anticipated argument; level parity fixes which side speaks it."""

    argument: Argument
    level: int
    side: Stance
    attack_score: Optional[float] = None
    support_score: Optional[float] = None
    strengths: dict[int, float] = field(default_factory=dict)
    best_children: dict[int, Optional[int]] = field(default_factory=dict)
    children: list[RehearsalNode] = field(default_factory=list)

    @property
    def claim_text(self) -> str:
        return self.argument.claim.text


@dataclass
class RehearsalTree:
    root: RehearsalNode
    stance: Stance
    motion: Motion
    owner: TreeOwner = TreeOwner.OWN
    params: RehearsalParams = field(default_factory=RehearsalParams)

    def iter_nodes(self) -> Iterator[RehearsalNode]:
        def visit(node: RehearsalNode) -> Iterator[RehearsalNode]:
            yield node
            for child in node.children:
                yield from visit(child)

        yield from visit(self.root)


def stance_statement(motion: Motion, stance: Stance) -> str:
    """The root-level target a main claim is scored against."""
    verb = "Support" if stance is Stance.PRO else "Oppose"
    return f"{verb} the motion: {motion.text}"


def base_strength(node: RehearsalNode) -> float:
    """Zero-step strength from the node's own scores.

    Level 0 uses the support score toward the stance, level 1 the attack
    score against the root, deeper levels the mean of attack-on-parent and
    support-of-grandparent.
    """
    if node.level == 0:
        if node.support_score is None:
            raise RehearsalError("level-0 node is missing its support score")
        return node.support_score
    if node.level == 1:
        if node.attack_score is None:
            raise RehearsalError("level-1 node is missing its attack score")
        return node.attack_score
    if node.attack_score is None or node.support_score is None:
        raise RehearsalError(f"level-{node.level} node is missing a score")
    return 0.5 * (node.attack_score + node.support_score)


def strength(node: RehearsalNode, k: int, decay: float = DEFAULT_DECAY) -> float:
    """k-step lookahead strength.

    The opponent is assumed to answer with whichever child maximizes their
    own (k-1)-step strength, discounted by the decay; a node with no
    anticipated replies keeps its base strength for every k.
    """
    if k < 0:
        raise ValueError("lookahead k must be >= 0")
    f0 = base_strength(node)
    if k == 0 or not node.children:
        return f0
    return f0 - decay * max(strength(c, k - 1, decay) for c in node.children)


def compute_strengths(tree: RehearsalTree) -> None:
    """Bottom-up pass filling f_0..f_(L-level) on every node.

    Also records, per k, the index of the child realizing the max; ties
    within a tiny epsilon report the earlier-generated child.
    """
    depth = tree.params.depth
    decay = tree.params.decay
    by_level: dict[int, list[RehearsalNode]] = {}
    for node in tree.iter_nodes():
        by_level.setdefault(node.level, []).append(node)

    for level in sorted(by_level, reverse=True):
        for node in by_level[level]:
            f0 = base_strength(node)
            node.strengths = {0: f0}
            node.best_children = {0: None}
            for k in range(1, depth - level + 1):
                if not node.children:
                    node.strengths[k] = f0
                    node.best_children[k] = None
                    continue
                child_values = [c.strengths[k - 1] for c in node.children]
                best_value = max(child_values)
                best_index = next(
                    i for i, v in enumerate(child_values)
                    if v >= best_value - STRENGTH_TIE_EPS
                )
                node.strengths[k] = f0 - decay * best_value
                node.best_children[k] = best_index


def strength_at(tree: RehearsalTree, node: RehearsalNode, k: int) -> float:
    """Stored strength for lookahead k, exact for any k.

    Beyond the stored horizon the recursion bottoms out at leaves, where
    every further step repeats the base strength, so f_k equals
    f_(L - level) for all k >= L - level.
    """
    if k < 0:
        raise ValueError("lookahead k must be >= 0")
    k_eff = min(k, max(0, tree.params.depth - node.level))
    if k_eff in node.strengths:
        return node.strengths[k_eff]
    return strength(node, k_eff, tree.params.decay)


# ---------------------------------------------------------------------------
# Tree construction


class CounterargumentGenerator(Protocol):
    def counterarguments(
        self,
        motion: Motion,
        chain: Sequence[Argument],
        side: Stance,
        count: int,
    ) -> Sequence[Argument]: ...


class ScriptedTreeGenerator:
    """Maps a parent claim text to its scripted counterarguments."""

    def __init__(self, children_by_claim: dict[str, Sequence[Argument]]) -> None:
        self._children = {k: list(v) for k, v in children_by_claim.items()}

    def counterarguments(
        self, motion: Motion, chain: Sequence[Argument], side: Stance, count: int
    ) -> Sequence[Argument]:
        return self._children.get(chain[-1].claim.text, [])[:count]


class PromptCounterargumentGenerator:
    """One chat call per expansion; replies are JSON arrays of arguments."""

    def __init__(self, provider: ChatProvider, temperature: float = 0.0) -> None:
        self.provider = provider
        self.temperature = temperature

    def counterarguments(
        self, motion: Motion, chain: Sequence[Argument], side: Stance, count: int
    ) -> Sequence[Argument]:
        rendered_chain = "\n".join(
            f"{i}. {arg.claim.text}" for i, arg in enumerate(chain)
        )
        prompt = render_template(
            "counterargument_generation",
            motion=motion.text,
            chain=rendered_chain,
            side=side.value,
            num=str(count),
        )
        reply = chat_exchange(
            self.provider,
            ChatRequest(prompt=prompt, temperature=self.temperature,
                        issuer="rehearsal.expand"),
        )
        items = _parse_json_array(reply)
        out: list[Argument] = []
        for item in items[:count]:
            if isinstance(item, dict):
                claim_text = str(item.get("claim", "")).strip()
                support = str(item.get("support", "")).strip()
            else:
                claim_text, support = str(item).strip(), ""
            if not claim_text:
                raise RehearsalError("generator reply contained an empty claim")
            out.append(Argument(claim=Claim(claim_text), support_text=support))
        return out


def build_rehearsal_tree(
    root_claim: Claim,
    stance: Stance,
    motion: Motion,
    params: RehearsalParams,
    generator: CounterargumentGenerator,
    scorers: ScorePair,
    owner: TreeOwner = TreeOwner.OWN,
) -> RehearsalTree:
    """Breadth-first expansion to the depth bound, then the strength pass.

    Every node is scored as it is attached: level 1 gets an attack score
    only, deeper levels both scores. Generator or scorer failures abort
    with the partial tree attached; trees are never silently truncated.
    """
    root_argument = Argument(claim=root_claim)
    root = RehearsalNode(argument=root_argument, level=0, side=stance)
    tree = RehearsalTree(root=root, stance=stance, motion=motion, owner=owner, params=params)
    try:
        root.support_score = scorers.support_score(
            ImpactQuery(
                parent=stance_statement(motion, stance),
                child=root_claim.text,
                relation=Relation.SUPPORT,
            )
        )
    except Exception as exc:
        raise BuildError(f"root support scoring failed: {exc}", partial=tree) from exc

    queue: list[tuple[RehearsalNode, list[Argument], list[int]]] = [
        (root, [root_argument], [])
    ]
    while queue:
        node, chain, path = queue.pop(0)
        if node.level >= params.depth:
            continue
        child_side = node.side.opposite
        try:
            produced = list(
                generator.counterarguments(motion, chain, child_side, params.branch)
            )
        except Exception as exc:
            raise BuildError(
                f"generator failed under {node.claim_text[:60]!r}: {exc}",
                partial=tree, node_path=path,
            ) from exc
        if len(produced) > params.branch:
            raise BuildError(
                f"generator returned {len(produced)} children, branch bound is "
                f"{params.branch}", partial=tree, node_path=path,
            )
        texts = [arg.claim.text for arg in chain]
        for index, child_arg in enumerate(produced):
            child_level = node.level + 1
            child = RehearsalNode(argument=child_arg, level=child_level, side=child_side)
            try:
                child.attack_score = scorers.attack_score(
                    ImpactQuery(
                        parent=texts[-1],
                        child=child_arg.claim.text,
                        relation=Relation.ATTACK,
                        context=tuple(texts[:-1]),
                    )
                )
                if child_level >= 2:
                    child.support_score = scorers.support_score(
                        ImpactQuery(
                            parent=texts[-2],
                            child=child_arg.claim.text,
                            relation=Relation.SUPPORT,
                            context=tuple(texts[:-2]),
                        )
                    )
            except Exception as exc:
                raise BuildError(
                    f"scoring failed under {node.claim_text[:60]!r}: {exc}",
                    partial=tree, node_path=path + [index],
                ) from exc
            node.children.append(child)
            queue.append((child, chain + [child_arg], path + [index]))

    compute_strengths(tree)
    return tree


# ---------------------------------------------------------------------------
# Main claim proposal and selection


class ClaimProposer(Protocol):
    def propose(self, motion: Motion, stance: Stance, n: int, history: str) -> Sequence[Claim]: ...


class ScriptedClaimProposer:
    def __init__(self, claims: Sequence[Claim]) -> None:
        self._claims = list(claims)

    def propose(self, motion: Motion, stance: Stance, n: int, history: str) -> Sequence[Claim]:
        return self._claims[:n]


class PromptClaimProposer:
    def __init__(self, provider: ChatProvider, temperature: float = 0.0) -> None:
        self.provider = provider
        self.temperature = temperature

    def propose(self, motion: Motion, stance: Stance, n: int, history: str) -> Sequence[Claim]:
        prompt = render_template(
            "main_claim_generation",
            motion=motion.text,
            act="support" if stance is Stance.PRO else "oppose",
            num=str(n),
            history=history or "(none yet)",
        )
        reply = chat_exchange(
            self.provider,
            ChatRequest(prompt=prompt, temperature=self.temperature,
                        issuer="rehearsal.claims"),
        )
        items = _parse_json_array(reply)
        claims = [Claim(str(item).strip()) for item in items if str(item).strip()]
        return claims[:n]


def propose_main_claims(
    motion: Motion,
    stance: Stance,
    n: int,
    proposer: ClaimProposer,
    history: str = "",
) -> list[Claim]:
    """Exactly n distinct candidate main claims for the stance.

    A duplicate-bearing reply triggers one regeneration, then an error.
    """
    if n < 1:
        raise ValueError("must request at least one claim")
    for attempt in range(2):
        claims = list(proposer.propose(motion, stance, n, history))
        texts = [c.text for c in claims]
        if len(claims) == n and len(set(texts)) == n:
            return claims
        log.warning(
            "claim proposal attempt %d returned %d claims (%d distinct), want %d",
            attempt + 1, len(claims), len(set(texts)), n,
        )
    raise RehearsalError(f"proposer failed to return {n} distinct claims")


@dataclass(frozen=True)
class ClaimSelection:
    claims: tuple[Claim, ...]
    framework: str
    explanation: str


def render_rehearsal_outline(tree: RehearsalTree) -> str:
    """Indented outline of a rehearsal tree with display-rounded strengths."""
    lines: list[str] = []

    def describe(node: RehearsalNode) -> str:
        if node.level == 0:
            label = "Root Claim"
            scores = f"Support Score: {node.support_score:.1f}"
        else:
            label = "Opponent's Attack" if node.level % 2 == 1 else "Your Rebuttal"
            scores = f"Attack Score: {node.attack_score:.1f}"
            if node.support_score is not None:
                scores += f", Support Score: {node.support_score:.1f}"
        shown = strength_at(tree, node, tree.params.depth - node.level)
        return (
            f'Level-{node.level} {label}: "claim": "{node.claim_text}", '
            f"Scores: {scores}, Strength: {shown:.1f}"
        )

    def visit(node: RehearsalNode) -> None:
        lines.append("  " * node.level + describe(node))
        for child in node.children:
            visit(child)

    visit(tree.root)
    return "\n".join(lines)


_JSON_OBJECT_RE = re.compile(r"\{.*\}", re.DOTALL)
_JSON_ARRAY_RE = re.compile(r"\[.*\]", re.DOTALL)


def _parse_json_array(reply: str) -> list:
    m = _JSON_ARRAY_RE.search(reply)
    if m is None:
        raise RehearsalError(f"no JSON array in reply: {reply[:80]!r}")
    try:
        data = json.loads(m.group(0))
    except json.JSONDecodeError as exc:
        raise RehearsalError(f"invalid JSON in reply: {exc}") from exc
    if not isinstance(data, list):
        raise RehearsalError("reply JSON is not an array")
    return data


def parse_selection_reply(reply: str) -> ClaimSelection:
    m = _JSON_OBJECT_RE.search(reply)
    if m is None:
        raise RehearsalError(f"no JSON object in selection reply: {reply[:80]!r}")
    try:
        data = json.loads(m.group(0))
    except json.JSONDecodeError as exc:
        raise RehearsalError(f"invalid JSON in selection reply: {exc}") from exc
    if "selection" in data:
        data = data["selection"]
    missing = [k for k in ("claims", "framework", "explanation") if k not in data]
    if missing:
        raise RehearsalError(f"selection reply missing fields: {missing}")
    claims = tuple(Claim(str(c).strip()) for c in data["claims"] if str(c).strip())
    if not claims:
        raise RehearsalError("selection reply contained no claims")
    return ClaimSelection(
        claims=claims,
        framework=str(data["framework"]),
        explanation=str(data["explanation"]),
    )


def select_main_claims(
    candidates: Sequence[RehearsalTree],
    context: str,
    selector: ChatProvider,
    definition: str = "",
    temperature: float = 0.0,
) -> ClaimSelection:
    """Pick the main claims to open with, using the rehearsal outlines.

    An unparseable selector reply is retried once, then raised.
    """
    if not candidates:
        raise RehearsalError("no candidate trees to select from")
    motion = candidates[0].motion
    side = candidates[0].stance
    trees_rendered = "\n\n".join(render_rehearsal_outline(t) for t in candidates)
    claims_json = json.dumps([t.root.claim_text for t in candidates], ensure_ascii=False)
    prompt = render_template(
        "main_claim_selection",
        motion=motion.text,
        side=side.value,
        definition=definition or "(none)",
        tree=trees_rendered,
        context=context or "(not yet delivered)",
        claims=claims_json,
    )
    request = ChatRequest(prompt=prompt, temperature=temperature,
                          issuer="rehearsal.select")
    reply = chat_exchange(selector, request)
    try:
        return parse_selection_reply(reply)
    except RehearsalError:
        log.warning("selection parse failed; retrying once")
        reply = chat_exchange(selector, request)
        return parse_selection_reply(reply)


def build_forest(
    motion: Motion,
    side: Stance,
    params: RehearsalParams,
    proposer: ClaimProposer,
    generator: CounterargumentGenerator,
    scorers: ScorePair,
    n_claims: int,
    history: str = "",
    include_opponent: bool = True,
) -> list[RehearsalTree]:
    """Rehearsal trees for a debater: own candidates plus, optionally, the
    anticipated candidates of the other side."""
    forest: list[RehearsalTree] = []
    for claim in propose_main_claims(motion, side, n_claims, proposer, history):
        forest.append(
            build_rehearsal_tree(claim, side, motion, params, generator, scorers,
                                 owner=TreeOwner.OWN)
        )
    if include_opponent:
        opposite = side.opposite
        for claim in propose_main_claims(motion, opposite, n_claims, proposer, history):
            forest.append(
                build_rehearsal_tree(claim, opposite, motion, params, generator, scorers,
                                     owner=TreeOwner.OPPONENT)
            )
    return forest
