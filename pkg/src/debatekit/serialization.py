"""Canonical document serialization and structural validation.

Every persistable value (flow trees, rehearsal trees, statements, whole
debate states) maps to a versioned JSON document with sorted keys, so
fixtures diff cleanly and replays are byte-deterministic. Parsing is
strict: unknown kinds, unknown enum values and missing required fields are
rejected rather than defaulted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Optional

from .flow import DebateFlowTree, FlowNode
from .model import (
    Argument,
    Claim,
    DebateError,
    DebateState,
    Motion,
    NodeStatus,
    Stage,
    Stance,
    Statement,
    count_words,
)
from .rehearsal import RehearsalNode, RehearsalParams, RehearsalTree, TreeOwner

SCHEMA_VERSION = 1


class ParseError(DebateError):
    pass


class SerializeError(DebateError):
    pass


def _require(payload: dict, key: str, kind: str) -> Any:
    if key not in payload:
        raise ParseError(f"{kind} document is missing required field {key!r}")
    return payload[key]


def _enum(cls, raw: Any, kind: str):
    try:
        return cls(raw)
    except ValueError as exc:
        raise ParseError(f"{kind}: unknown {cls.__name__} value {raw!r}") from exc


# ---------------------------------------------------------------------------
# Payload builders (python values <-> JSON-safe dicts)


def _claim_payload(claim: Claim) -> dict:
    out: dict[str, Any] = {"text": claim.text}
    if claim.embedding is not None:
        out["embedding"] = [float(v) for v in claim.embedding]
    return out


def _claim_from(payload: Any) -> Claim:
    if not isinstance(payload, dict):
        raise ParseError("claim payload must be an object")
    text = _require(payload, "text", "claim")
    embedding = payload.get("embedding")
    return Claim(text=text, embedding=tuple(embedding) if embedding is not None else None)


def _argument_payload(arg: Argument) -> dict:
    return {
        "claim": _claim_payload(arg.claim),
        "support_text": arg.support_text,
        "evidence_refs": list(arg.evidence_refs),
    }


def _argument_from(payload: Any) -> Argument:
    if not isinstance(payload, dict):
        raise ParseError("argument payload must be an object")
    return Argument(
        claim=_claim_from(_require(payload, "claim", "argument")),
        support_text=payload.get("support_text", ""),
        evidence_refs=tuple(payload.get("evidence_refs", [])),
    )


def _flow_node_payload(node: FlowNode, seen: set[int]) -> dict:
    if id(node) in seen:
        raise SerializeError("cyclic flow tree cannot be serialized")
    seen.add(id(node))
    return {
        "claim": _claim_payload(node.claim) if node.claim is not None else None,
        "side": node.side.value,
        "arguments": list(node.arguments),
        "status": node.status.value,
        "visits": node.visits,
        "created_at": (
            [node.created_at[0].value, node.created_at[1]]
            if node.created_at is not None else None
        ),
        "children": [_flow_node_payload(c, seen) for c in node.children],
    }


def _flow_node_from(payload: Any, allow_anchor: bool) -> FlowNode:
    if not isinstance(payload, dict):
        raise ParseError("flow node payload must be an object")
    raw_claim = _require(payload, "claim", "flow node")
    if raw_claim is None and not allow_anchor:
        raise ParseError("only the root anchor may omit its claim")
    created = payload.get("created_at")
    node = FlowNode(
        claim=_claim_from(raw_claim) if raw_claim is not None else None,
        side=_enum(Stance, _require(payload, "side", "flow node"), "flow node"),
        arguments=[str(a) for a in payload.get("arguments", [])],
        status=_enum(NodeStatus, _require(payload, "status", "flow node"), "flow node"),
        visits=int(_require(payload, "visits", "flow node")),
        created_at=(
            (_enum(Stage, created[0], "flow node"), int(created[1]))
            if created is not None else None
        ),
    )
    if node.visits < 0:
        raise ParseError("flow node visits must be >= 0")
    node.children = [_flow_node_from(c, False) for c in payload.get("children", [])]
    return node


def _flow_tree_payload(tree: DebateFlowTree) -> dict:
    return {
        "owner": tree.owner.value,
        "root": _flow_node_payload(tree.root, set()),
    }


def _flow_tree_from(payload: dict) -> DebateFlowTree:
    owner = _enum(Stance, _require(payload, "owner", "flow tree"), "flow tree")
    root = _flow_node_from(_require(payload, "root", "flow tree"), True)
    return DebateFlowTree(owner=owner, root=root)


def _rehearsal_node_payload(node: RehearsalNode, seen: set[int]) -> dict:
    if id(node) in seen:
        raise SerializeError("cyclic rehearsal tree cannot be serialized")
    seen.add(id(node))
    return {
        "argument": _argument_payload(node.argument),
        "level": node.level,
        "side": node.side.value,
        "attack_score": node.attack_score,
        "support_score": node.support_score,
        "strengths": {str(k): v for k, v in sorted(node.strengths.items())},
        "best_children": {str(k): v for k, v in sorted(node.best_children.items())},
        "children": [_rehearsal_node_payload(c, seen) for c in node.children],
    }


def _rehearsal_node_from(payload: Any) -> RehearsalNode:
    if not isinstance(payload, dict):
        raise ParseError("rehearsal node payload must be an object")
    node = RehearsalNode(
        argument=_argument_from(_require(payload, "argument", "rehearsal node")),
        level=int(_require(payload, "level", "rehearsal node")),
        side=_enum(Stance, _require(payload, "side", "rehearsal node"), "rehearsal node"),
        attack_score=payload.get("attack_score"),
        support_score=payload.get("support_score"),
        strengths={int(k): float(v) for k, v in payload.get("strengths", {}).items()},
        best_children={
            int(k): (int(v) if v is not None else None)
            for k, v in payload.get("best_children", {}).items()
        },
    )
    node.children = [_rehearsal_node_from(c) for c in payload.get("children", [])]
    return node


def _rehearsal_tree_payload(tree: RehearsalTree) -> dict:
    return {
        "stance": tree.stance.value,
        "motion": {"text": tree.motion.text, "id": tree.motion.id},
        "owner": tree.owner.value,
        "params": {
            "branch": tree.params.branch,
            "depth": tree.params.depth,
            "decay": tree.params.decay,
        },
        "root": _rehearsal_node_payload(tree.root, set()),
    }


def _rehearsal_tree_from(payload: dict) -> RehearsalTree:
    params_raw = _require(payload, "params", "rehearsal tree")
    motion_raw = _require(payload, "motion", "rehearsal tree")
    return RehearsalTree(
        root=_rehearsal_node_from(_require(payload, "root", "rehearsal tree")),
        stance=_enum(Stance, _require(payload, "stance", "rehearsal tree"), "rehearsal tree"),
        motion=Motion(text=motion_raw["text"], id=motion_raw.get("id", "")),
        owner=_enum(TreeOwner, payload.get("owner", "own"), "rehearsal tree"),
        params=RehearsalParams(
            branch=int(params_raw["branch"]),
            depth=int(params_raw["depth"]),
            decay=float(params_raw["decay"]),
        ),
    )


def _statement_payload(st: Statement) -> dict:
    return {
        "side": st.side.value,
        "stage": st.stage.value,
        "text": st.text,
        "plan": st.plan,
        "word_count": st.word_count,
        "estimated_duration": st.estimated_duration,
    }


def _statement_from(payload: dict) -> Statement:
    st = Statement(
        side=_enum(Stance, _require(payload, "side", "statement"), "statement"),
        stage=_enum(Stage, _require(payload, "stage", "statement"), "statement"),
        text=_require(payload, "text", "statement"),
        plan=payload.get("plan"),
        estimated_duration=payload.get("estimated_duration"),
    )
    claimed = payload.get("word_count")
    if claimed is not None and int(claimed) != count_words(st.text):
        raise ParseError("statement word_count does not match its text")
    return st


def _state_payload(state: DebateState) -> dict:
    return {
        "motion": {"text": state.motion.text, "id": state.motion.id},
        "sides": {s.value: name for s, name in sorted(state.sides.items(), key=lambda kv: kv[0].value)},
        "stage_schedule": [[s.value, g.value] for s, g in state.stage_schedule],
        "flow_trees": {
            s.value: _flow_tree_payload(t)
            for s, t in sorted(state.flow_trees.items(), key=lambda kv: kv[0].value)
        },
        "transcript": [_statement_payload(st) for st in state.transcript],
        "definitions": {s.value: d for s, d in sorted(state.definitions.items(), key=lambda kv: kv[0].value)},
        "rng_seed": state.rng_seed,
    }


def _state_from(payload: dict) -> DebateState:
    motion_raw = _require(payload, "motion", "debate state")
    schedule = tuple(
        (_enum(Stance, s, "debate state"), _enum(Stage, g, "debate state"))
        for s, g in _require(payload, "stage_schedule", "debate state")
    )
    trees_raw = _require(payload, "flow_trees", "debate state")
    state = DebateState(
        motion=Motion(text=motion_raw["text"], id=motion_raw.get("id", "")),
        sides={_enum(Stance, k, "debate state"): v
               for k, v in _require(payload, "sides", "debate state").items()},
        flow_trees={_enum(Stance, k, "debate state"): _flow_tree_from(v)
                    for k, v in trees_raw.items()},
        stage_schedule=schedule,
        transcript=[_statement_from(st) for st in payload.get("transcript", [])],
        definitions={_enum(Stance, k, "debate state"): str(v)
                     for k, v in payload.get("definitions", {}).items()},
        rng_seed=int(payload.get("rng_seed", 0)),
    )
    if len(state.transcript) > len(state.stage_schedule):
        raise ParseError("transcript longer than the stage schedule")
    return state


_KINDS = {
    "debate_flow_tree": (DebateFlowTree, _flow_tree_payload, _flow_tree_from),
    "rehearsal_tree": (RehearsalTree, _rehearsal_tree_payload, _rehearsal_tree_from),
    "statement": (Statement, _statement_payload, _statement_from),
    "debate_state": (DebateState, _state_payload, _state_from),
}


def serialize(value) -> str:
    """Canonical UTF-8 JSON document: versioned, sorted keys, 2-space indent."""
    for kind, (cls, to_payload, _) in _KINDS.items():
        if isinstance(value, cls):
            doc = {"schema_version": SCHEMA_VERSION, "kind": kind}
            doc.update(to_payload(value))
            return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    raise SerializeError(f"cannot serialize values of type {type(value).__name__}")


def parse(document: str):
    """Inverse of serialize; strict about version, kind and required fields."""
    try:
        payload = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"document is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ParseError("document must be a JSON object")
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}")
    kind = payload.get("kind")
    if kind not in _KINDS:
        raise ParseError(f"unknown document kind {kind!r}")
    return _KINDS[kind][2](payload)


# ---------------------------------------------------------------------------
# Structural validation


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    detail: str


def validate_flow_tree(tree: DebateFlowTree) -> list[Violation]:
    """Structural invariants implied by the update rules.

    Violations are data, not errors: an empty list means the tree is sound.
    """
    violations: list[Violation] = []

    if tree.root.claim is not None:
        violations.append(Violation("root/claim", "root", "root anchor must carry no claim"))
    if tree.root.side != tree.owner:
        violations.append(
            Violation("root/side", "root", "root anchor side must match the owner")
        )

    def visit(node: FlowNode, parent: Optional[FlowNode], path: str) -> None:
        if parent is not None and node.side == parent.side:
            violations.append(
                Violation("side alternation", path,
                          f"child shares its parent's side ({node.side.value})")
            )
        if node.visits < 0:
            violations.append(Violation("visits", path, "negative visit count"))
        if node.status is NodeStatus.ATTACKED and not node.children:
            violations.append(
                Violation("status/children mismatch", path,
                          "attacked node has no attacking children")
            )
        if node.status is NodeStatus.PROPOSED and node.children:
            violations.append(
                Violation("status/children mismatch", path,
                          "proposed node should have no children")
            )
        for i, child in enumerate(node.children):
            visit(child, node, f"{path}/{i}")

    for i, top in enumerate(tree.root.children):
        if top.side != tree.owner:
            violations.append(
                Violation("side alternation", f"root/{i}",
                          "top-level claim must be on the owner's side")
            )
        visit(top, None, f"root/{i}")
    return violations
