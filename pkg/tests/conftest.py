"""Shared fixtures and deterministic generators for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from debatekit.flow import DebateFlowTree, FlowNode
from debatekit.model import Claim, Motion, NodeStatus, Stage, Stance
from debatekit.providers import EmbeddingVector, HashEmbedder
from debatekit.rehearsal import RehearsalNode, RehearsalParams, RehearsalTree
from debatekit.model import Argument

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def hash_embedder() -> HashEmbedder:
    return HashEmbedder()


class FixedEmbedder:
    """Maps known texts to designed vectors; unknown texts are an error."""

    model_tag = "fixed-test"

    def __init__(self, table: dict[str, tuple[float, ...]]) -> None:
        self.table = dict(table)

    def embed(self, text: str) -> EmbeddingVector:
        if text not in self.table:
            raise KeyError(f"FixedEmbedder has no vector for {text!r}")
        return EmbeddingVector(self.table[text], self.model_tag)


# ---------------------------------------------------------------------------
# Random structure generators (used by round-trip and property tests)


def random_flow_tree(rng: random.Random, owner: Stance, max_children: int = 3,
                     max_depth: int = 3, prefix: str = "") -> DebateFlowTree:
    """Structurally consistent random flow tree: sides alternate, nodes with
    children are Attacked, leaves are Proposed."""
    tree = DebateFlowTree(owner=owner)
    counter = [0]

    def grow(parent: FlowNode, depth: int) -> None:
        n_children = rng.randint(0, max_children) if depth < max_depth else 0
        for _ in range(n_children):
            counter[0] += 1
            node = FlowNode(
                claim=Claim(f"{prefix}{owner.value} generated claim {counter[0]}"),
                side=parent.side.opposite if parent.claim is not None else owner,
                arguments=[f"argument {counter[0]}"] if rng.random() < 0.7 else [],
                visits=rng.randint(0, 4),
                created_at=(rng.choice(list(Stage)), rng.randint(0, 5))
                if rng.random() < 0.5 else None,
            )
            parent.children.append(node)
            grow(node, depth + 1)
        if parent.claim is not None:
            parent.status = NodeStatus.ATTACKED if parent.children else NodeStatus.PROPOSED

    grow(tree.root, 0)
    return tree


def random_rehearsal_tree(
    rng: random.Random,
    max_branch: int = 3,
    max_depth: int = 4,
    stance: Stance = Stance.PRO,
) -> RehearsalTree:
    """Random scored rehearsal tree; strengths left for the code under test."""
    motion = Motion("A generated motion for property testing")
    counter = [0]

    def make_node(level: int, side: Stance) -> RehearsalNode:
        counter[0] += 1
        node = RehearsalNode(
            argument=Argument(claim=Claim(f"prop claim {counter[0]}")),
            level=level,
            side=side,
            attack_score=round(rng.uniform(0, 2), 6) if level >= 1 else None,
            support_score=round(rng.uniform(0, 2), 6) if level != 1 else None,
        )
        if level < max_depth:
            for _ in range(rng.randint(0, max_branch)):
                node.children.append(make_node(level + 1, side.opposite))
        return node

    root = make_node(0, stance)
    return RehearsalTree(
        root=root, stance=stance, motion=motion,
        params=RehearsalParams(branch=max_branch, depth=max_depth),
    )


def rehearsal_to_spec(node: RehearsalNode) -> dict:
    """Mirror a rehearsal node into the oracle's plain-dict form."""
    from .oracles import oracle_base

    return {
        "f0": oracle_base(node.level, node.attack_score, node.support_score),
        "children": [rehearsal_to_spec(c) for c in node.children],
    }
