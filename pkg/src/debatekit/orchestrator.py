"""Drives a full Oxford-style debate through the per-stage pipeline.

Each stage: update flow trees from what has been said, derive the legal
candidate actions, enrich them with rehearsed material, group them into
ranked battlefields, draft against the stage template, revise on simulated
audience feedback, then fit the statement into the stage's time range and
apply the hard cut. Statements are validated and every artifact persists
for replay and resume.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from .audience import audience_feedback
from .corpus import CorpusIndex
from .flow import (
    CandidateAction,
    DebateFlowTree,
    TupleExtractor,
    apply_statement_tuples,
    candidate_actions,
    extract_action_tuples,
    remaining_rounds_k,
    retrieve_prepared,
)
from .model import (
    ActionKind,
    Battlefield,
    Claim,
    DebateError,
    DebateState,
    Importance,
    Motion,
    Stage,
    Stance,
    Statement,
)
from .prompts import render_template
from .providers import ChatProvider, ChatRequest, Embedder, chat_exchange
from .rehearsal import (
    ClaimProposer,
    ClaimSelection,
    CounterargumentGenerator,
    PromptClaimProposer,
    PromptCounterargumentGenerator,
    RehearsalParams,
    RehearsalTree,
    TreeOwner,
    build_forest,
    select_main_claims,
)
from .scoring import PromptImpactScorer, ScorePair
from .semantic import DEFAULT_SIMILARITY_THRESHOLD, NodeMatcher, flow_tree_to_string
from .serialization import SCHEMA_VERSION, parse, serialize
from .timecontrol import (
    DurationEstimator,
    FitTrace,
    PromptReviser,
    RateEstimator,
    StatementReviser,
    TimeRange,
    estimate_duration,
    fit_to_time,
    hard_cut,
)

log = logging.getLogger(__name__)


class OrchestrationError(DebateError):
    pass


# ---------------------------------------------------------------------------
# Configuration


def _default_time_ranges(stage_limits: dict[Stage, float]) -> dict[Stage, TimeRange]:
    return {s: TimeRange(0.95 * limit, limit) for s, limit in stage_limits.items()}


@dataclass(frozen=True)
class StagePipelineConfig:
    """All run-level knobs, with the documented defaults."""

    words_per_minute: float = 130.0
    stage_limits: dict[Stage, float] = field(
        default_factory=lambda: {s: s.default_time_limit for s in Stage}
    )
    time_ranges: dict[Stage, TimeRange] = field(default_factory=dict)
    revision_cycles: int = 1
    theta: float = DEFAULT_SIMILARITY_THRESHOLD
    decay: float = 0.8
    branch: int = 3
    depth: int = 3
    n_main_claims: int = 3
    max_fit_iterations: int = 10
    latest_turn_rebuts_only: bool = True

    def __post_init__(self) -> None:
        if self.words_per_minute <= 0:
            raise ValueError("words_per_minute must be positive")
        if not 0 < self.theta <= 1:
            raise ValueError("theta must be in (0, 1]")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must be in (0, 1]")
        if self.revision_cycles < 0 or self.max_fit_iterations < 1:
            raise ValueError("revision_cycles >= 0 and max_fit_iterations >= 1 required")
        if self.n_main_claims < 1 or self.branch < 1 or self.depth < 0:
            raise ValueError("n_main_claims/branch >= 1 and depth >= 0 required")
        if not self.time_ranges:
            object.__setattr__(self, "time_ranges", _default_time_ranges(self.stage_limits))

    def rehearsal_params(self) -> RehearsalParams:
        return RehearsalParams(branch=self.branch, depth=self.depth, decay=self.decay)

    def word_budget(self, stage: Stage) -> int:
        return round(self.words_per_minute * self.stage_limits[stage] / 60.0)

    @classmethod
    def from_payload(cls, raw: dict) -> StagePipelineConfig:
        kwargs: dict = {}
        for key in ("words_per_minute", "revision_cycles", "theta", "decay", "branch",
                    "depth", "n_main_claims", "max_fit_iterations",
                    "latest_turn_rebuts_only"):
            if key in raw:
                kwargs[key] = raw[key]
        if "stage_limits" in raw:
            kwargs["stage_limits"] = {Stage(k): float(v) for k, v in raw["stage_limits"].items()}
        if "time_ranges" in raw:
            kwargs["time_ranges"] = {
                Stage(k): TimeRange(float(v[0]), float(v[1]))
                for k, v in raw["time_ranges"].items()
            }
        return cls(**kwargs)


@dataclass
class Collaborators:
    """Everything the pipeline calls out to, bundled for injection."""

    chat: ChatProvider
    embedder: Embedder
    scorers: ScorePair
    proposer: ClaimProposer
    generator: CounterargumentGenerator
    extractor: TupleExtractor
    reviser: StatementReviser
    estimator: DurationEstimator
    corpus_index: Optional[CorpusIndex] = None

    @classmethod
    def from_provider(
        cls,
        provider: ChatProvider,
        embedder: Embedder,
        corpus_index: Optional[CorpusIndex] = None,
        words_per_minute: float = 130.0,
    ) -> Collaborators:
        """Prompt-based implementations of every role over one provider."""
        from .flow import PromptTupleExtractor

        return cls(
            chat=provider,
            embedder=embedder,
            scorers=ScorePair.single(PromptImpactScorer(provider)),
            proposer=PromptClaimProposer(provider),
            generator=PromptCounterargumentGenerator(provider),
            extractor=PromptTupleExtractor(provider),
            reviser=PromptReviser(provider),
            estimator=RateEstimator(words_per_minute),
            corpus_index=corpus_index,
        )


# ---------------------------------------------------------------------------
# Statement validity


@dataclass(frozen=True)
class ValidityReport:
    format_valid: bool
    time_valid: bool
    reasons: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if (not self.format_valid or not self.time_valid) and not self.reasons:
            raise ValueError("invalid reports must carry reasons")
        object.__setattr__(self, "reasons", tuple(self.reasons))

    @property
    def valid(self) -> bool:
        return self.format_valid and self.time_valid

    def to_payload(self) -> dict:
        return {
            "format_valid": self.format_valid,
            "time_valid": self.time_valid,
            "reasons": list(self.reasons),
        }


_META_PATTERNS = (
    "as suggested by the reviewer",
    "i will provide feedback on",
    "here is the revised statement",
    "here's the revised statement",
    "as an ai",
    "as a language model",
    "per your instructions",
    "word budget allocation",
)

_BULLET_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s+")


def _wrong_side_patterns(side: Stance) -> tuple[str, ...]:
    opp = side.opposite.value
    return (
        f"as the {opp} side, we",
        f"we are the {opp} side",
        f"we stand on the {opp} side",
        f"our side is the {opp}",
        f"we, the {opp} side",
    )


def validate_statement(
    statement: Statement,
    stage: Stage,
    estimator: Optional[DurationEstimator] = None,
    time_limit: Optional[float] = None,
) -> ValidityReport:
    """Format and time validity of one delivered statement.

    Format fails on planning/meta leakage, on explicit wrong-side
    self-identification, and on bare key-point lists without prose. Time
    fails when the estimated duration exceeds the stage limit.
    """
    estimator = estimator or RateEstimator()
    limit = time_limit if time_limit is not None else stage.default_time_limit
    reasons: list[str] = []
    lowered = statement.text.lower()

    format_valid = True
    if not statement.text.strip():
        format_valid = False
        reasons.append("statement is empty")
    for pattern in _META_PATTERNS:
        if pattern in lowered:
            format_valid = False
            reasons.append(f"meta/planning leakage: {pattern!r}")
    for pattern in _wrong_side_patterns(statement.side):
        if pattern in lowered:
            format_valid = False
            reasons.append(f"stance misidentification: {pattern!r}")
    lines = [ln for ln in statement.text.splitlines() if ln.strip()]
    if len(lines) >= 3:
        bullets = sum(1 for ln in lines if _BULLET_RE.match(ln))
        if bullets / len(lines) >= 0.8:
            format_valid = False
            reasons.append("statement is a bare list of key points")

    duration = statement.estimated_duration
    if duration is None:
        duration = estimate_duration(statement.text, estimator)
    time_valid = duration <= limit
    if not time_valid:
        reasons.append(f"estimated duration {duration:.1f}s exceeds limit {limit:.0f}s")

    return ValidityReport(format_valid=format_valid, time_valid=time_valid,
                          reasons=tuple(reasons))


# ---------------------------------------------------------------------------
# Battlefield assembly


def assemble_battlefields(
    actions: Sequence[CandidateAction],
    trees: dict[Stance, DebateFlowTree],
) -> list[Battlefield]:
    """Group candidate actions by the top-level subtree they touch.

    Groups are ranked by (max retrieved strength, total subtree visits)
    descending; importance tiers are the rank terciles. Propose actions
    form their own "new claims" group.
    """
    top_of: dict[int, tuple[str, int]] = {}  # node id -> (description, subtree visits)
    for tree in trees.values():
        for top in tree.root.children:
            stack = [top]
            visits = 0
            members = []
            while stack:
                node = stack.pop()
                members.append(node)
                visits += node.visits
                stack.extend(node.children)
            for node in members:
                top_of[id(node)] = (top.claim_text, visits)

    groups: dict[str, dict] = {}
    order: list[str] = []

    def group_for(key: str, description: str, visits: int) -> dict:
        if key not in groups:
            groups[key] = {"description": description, "visits": visits, "actions": []}
            order.append(key)
        return groups[key]

    for action in actions:
        if action.kind is ActionKind.PROPOSE or action.target is None:
            group = group_for("__new_claims__", "New claims to put forward", 0)
        else:
            description, visits = top_of.get(
                id(action.target), (action.target.claim_text, action.target.visits)
            )
            group = group_for(f"claim::{description}", description, visits)
        group["actions"].append(action)

    def strength_of(group: dict) -> float:
        best = [a.best_strength for a in group["actions"] if a.best_strength is not None]
        return max(best) if best else float("-inf")

    ranked = sorted(
        order,
        key=lambda key: (strength_of(groups[key]), groups[key]["visits"]),
        reverse=True,
    )
    tiers = (Importance.HIGH, Importance.MEDIUM, Importance.LOW)
    battlefields: list[Battlefield] = []
    for rank, key in enumerate(ranked):
        group = groups[key]
        tier = tiers[rank * 3 // len(ranked)]
        strongest = strength_of(group)
        rationale = (
            f"{len(group['actions'])} available actions; "
            f"prepared strength up to {strongest:.2f}; " if strongest > float("-inf")
            else f"{len(group['actions'])} available actions; nothing rehearsed; "
        )
        rationale += f"addressed {group['visits']} times so far"
        battlefields.append(
            Battlefield(
                description=group["description"],
                importance=tier,
                rationale=rationale,
                actions=tuple(group["actions"]),
            )
        )
    return battlefields


def render_battlefields(battlefields: Sequence[Battlefield]) -> str:
    if not battlefields:
        return "(no battlefields yet)"
    blocks: list[str] = []
    for bf in battlefields:
        lines = [
            f"**Battlefield Importance**: {bf.importance.value}",
            f"**Battlefield**: {bf.description}",
            f"**Battlefield Rationale**: {bf.rationale}",
            "**Actions**:",
        ]
        for action in bf.actions:
            target = f" -> \"{action.target_text}\"" if action.target_text else ""
            line = f"- {action.kind.value}{target}"
            if action.retrieved:
                prepared = "; ".join(
                    f"\"{r.node.claim_text}\" (strength {r.strength:.2f})"
                    for r in action.retrieved
                )
                line += f" | prepared: {prepared}"
            lines.append(line)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


# ---------------------------------------------------------------------------
# Drafting


_STAGE_TEMPLATES = {
    Stage.OPENING: "opening_stage",
    Stage.REBUTTAL: "rebuttal_stage",
    Stage.CLOSING: "closing_stage",
}

_STATEMENT_SPLIT_RE = re.compile(
    r"\*\*Statement\*\*\s*:?|^Statement\s*:", re.MULTILINE
)


def split_plan_and_statement(reply: str) -> tuple[Optional[str], str]:
    """Separate the planning preamble from the delivered statement."""
    parts = _STATEMENT_SPLIT_RE.split(reply)
    if len(parts) < 2:
        return None, reply.strip()
    plan = parts[0]
    plan = re.sub(r"\*\*\w+ Plan\*\*\s*:?", "", plan).strip() or None
    return plan, parts[-1].strip()


def _act_word(side: Stance) -> str:
    return "support" if side is Stance.PRO else "oppose"


def draft_statement(
    provider: ChatProvider,
    state: DebateState,
    side: Stance,
    stage: Stage,
    battlefields_rendered: str,
    claims: Sequence[Claim],
    definition: str,
    n_words: int,
) -> tuple[Optional[str], str]:
    own_rendered = flow_tree_to_string(state.own_tree(side))
    oppo_rendered = flow_tree_to_string(state.opponent_tree(side))
    slots = {
        "motion": state.motion.text,
        "act": _act_word(side),
        "counter_act": _act_word(side.opposite),
        "tree": own_rendered,
        "oppo_tree": oppo_rendered,
        "claims": json.dumps([c.text for c in claims], ensure_ascii=False),
        "definition": definition or "(none)",
        "battlefields": battlefields_rendered,
        "n_words": str(n_words),
    }
    prompt = render_template(_STAGE_TEMPLATES[stage], **slots)
    reply = chat_exchange(provider, ChatRequest(prompt=prompt, issuer="orchestrator.draft"))
    plan, text = split_plan_and_statement(reply)
    if not text:
        raise OrchestrationError(f"writer returned no statement for {stage.value}")
    return plan, text


def revise_with_feedback(
    provider: ChatProvider, text: str, feedback_text: str, n_words: int
) -> str:
    prompt = render_template(
        "revise_with_feedback",
        statement=text,
        feedback=feedback_text,
        n_words=str(n_words),
    )
    revised = chat_exchange(
        provider, ChatRequest(prompt=prompt, issuer="orchestrator.revise")
    ).strip()
    return revised or text


# ---------------------------------------------------------------------------
# The session


@dataclass
class StageSidecar:
    """Per-statement artifacts kept alongside the transcript."""

    index: int
    side: Stance
    stage: Stage
    fit_trace: FitTrace
    validity: ValidityReport
    hard_cut_trimmed: bool

    def to_payload(self) -> dict:
        return {
            "index": self.index,
            "side": self.side.value,
            "stage": self.stage.value,
            "fit_trace": self.fit_trace.to_payload(),
            "validity": self.validity.to_payload(),
            "hard_cut_trimmed": self.hard_cut_trimmed,
        }


class DebateSession:
    """Owns one debate's state; all mutation is sequential."""

    def __init__(
        self,
        state: DebateState,
        config: StagePipelineConfig,
        collaborators: Collaborators,
        run_dir: Optional[Path] = None,
    ) -> None:
        self.state = state
        self.config = config
        self.collab = collaborators
        self.run_dir = Path(run_dir) if run_dir is not None else None
        self.matcher = NodeMatcher(collaborators.embedder, theta=config.theta)
        self.forests: dict[Stance, list[RehearsalTree]] = {}
        self.selections: dict[Stance, ClaimSelection] = {}
        self.sidecars: list[StageSidecar] = []
        self.events: list[dict] = []
        if self.run_dir is not None:
            self.run_dir.mkdir(parents=True, exist_ok=True)
            (self.run_dir / "statements").mkdir(exist_ok=True)

    # -- events

    def emit(self, phase: str, detail: str = "") -> None:
        self.events.append({"seq": len(self.events), "phase": phase, "detail": detail})

    # -- preparation

    def history_text(self) -> str:
        return "\n\n".join(
            f"[{st.side.value} {st.stage.value}]\n{st.text}" for st in self.state.transcript
        )

    def prepare_side(self, side: Stance) -> None:
        """Build the side's rehearsal forest (own + anticipated opponent)."""
        if side in self.forests:
            return
        self.emit("rehearsal", f"building forest for {side.value}")
        self.forests[side] = build_forest(
            motion=self.state.motion,
            side=side,
            params=self.config.rehearsal_params(),
            proposer=self.collab.proposer,
            generator=self.collab.generator,
            scorers=self.collab.scorers,
            n_claims=self.config.n_main_claims,
        )
        self._persist()

    def ensure_definitions(self, side: Stance) -> str:
        cached = self.state.definitions.get(side)
        if cached is not None:
            return cached
        self.emit("definitions", f"framing for {side.value}")
        prompt = render_template(
            "definitions", motion=self.state.motion.text, act=_act_word(side)
        )
        text = chat_exchange(
            self.collab.chat, ChatRequest(prompt=prompt, issuer="orchestrator.definitions")
        ).strip()
        self.state.definitions[side] = text
        return text

    def ensure_selection(self, side: Stance) -> ClaimSelection:
        if side in self.selections:
            return self.selections[side]
        self.prepare_side(side)
        own_trees = [t for t in self.forests[side] if t.owner is TreeOwner.OWN]
        context = ""
        for st in self.state.transcript:
            if st.side is side.opposite and st.stage is Stage.OPENING:
                context = st.text
        self.emit("claim_selection", f"selecting main claims for {side.value}")
        selection = select_main_claims(
            own_trees,
            context=context,
            selector=self.collab.chat,
            definition=self.state.definitions.get(side, ""),
        )
        self.selections[side] = selection
        self._persist()
        return selection

    # -- state updates

    def observe_statement(self, statement: Statement) -> None:
        """Append to the transcript and fold the statement into the trees."""
        turn = self.state.cursor
        self.state.append_statement(statement)
        rendered = "\n\n".join(
            flow_tree_to_string(self.state.flow_trees[s]) for s in (Stance.PRO, Stance.CON)
        )
        tuples = extract_action_tuples(statement, self.collab.extractor, rendered)
        self.emit("flow_update", f"{len(tuples)} tuples from {statement.side.value} "
                                 f"{statement.stage.value}")
        apply_statement_tuples(
            self.state.flow_trees, tuples, statement.side, self.matcher,
            created_at=(statement.stage, turn),
        )
        self._persist()

    # -- the stage pipeline

    def play_stage(self, side: Stance, stage: Stage) -> Statement:
        slot = self.state.next_slot()
        if slot != (side, stage):
            raise OrchestrationError(
                f"schedule expects {slot}, asked to play {side.value} {stage.value}"
            )
        self.prepare_side(side)
        claims: Sequence[Claim] = ()
        definition = ""
        if stage is Stage.OPENING:
            definition = self.ensure_definitions(side)
            claims = self.ensure_selection(side).claims

        k = remaining_rounds_k(stage, side)
        actions = candidate_actions(
            self.state.own_tree(side),
            self.state.opponent_tree(side),
            stage,
            latest_turn_only=self.config.latest_turn_rebuts_only,
        )
        # the open propose slot becomes one action per selected main claim
        expanded: list[CandidateAction] = []
        for action in actions:
            if action.kind is ActionKind.PROPOSE and claims:
                expanded.extend(
                    CandidateAction(kind=ActionKind.PROPOSE, claim=c) for c in claims
                )
            else:
                expanded.append(action)
        self.emit("candidate_actions", f"{len(expanded)} actions, k={k}")

        retrieve_prepared(expanded, self.forests[side], side, k, self.matcher)
        hits = sum(1 for a in expanded if a.hit)
        self.emit("retrieval", f"{hits}/{len(expanded)} actions hit")

        battlefields = assemble_battlefields(expanded, self.state.flow_trees)
        self.emit("battlefields", f"{len(battlefields)} battlefields")

        n_words = self.config.word_budget(stage)
        plan, text = draft_statement(
            self.collab.chat, self.state, side, stage,
            render_battlefields(battlefields), claims, definition, n_words,
        )
        self.emit("draft", f"{len(text.split())} words drafted")

        for cycle in range(self.config.revision_cycles):
            retrieved_tree = None
            if self.collab.corpus_index is not None:
                match = self.collab.corpus_index.retrieve(
                    self.state.own_tree(side), self.config.theta, self.matcher.embedder
                )
                if match is not None:
                    retrieved_tree = match.tree_string
            feedback = audience_feedback(
                self.state.motion.text,
                self.history_text(),
                text,
                side,
                stage,
                self.collab.chat,
                retrieved_tree=retrieved_tree,
            )
            text = revise_with_feedback(
                self.collab.chat, text, feedback.as_text(), n_words
            )
            self.emit("audience_feedback", f"cycle {cycle + 1} applied")

        draft = Statement(side=side, stage=stage, text=text, plan=plan)
        fitted, trace = fit_to_time(
            draft,
            self.config.time_ranges[stage],
            self.collab.reviser,
            self.collab.estimator,
            max_iter=self.config.max_fit_iterations,
            words_per_minute=self.config.words_per_minute,
        )
        self.emit("time_fit", f"{len(trace.iterations)} iterations, {trace.outcome.value}")

        cut = hard_cut(fitted, self.config.stage_limits[stage], self.collab.estimator)
        statement = cut.statement
        if cut.trimmed:
            self.emit("hard_cut", "statement trimmed to the stage limit")

        validity = validate_statement(
            statement, stage, self.collab.estimator, self.config.stage_limits[stage]
        )
        sidecar = StageSidecar(
            index=self.state.cursor, side=side, stage=stage,
            fit_trace=trace, validity=validity, hard_cut_trimmed=cut.trimmed,
        )
        self.sidecars.append(sidecar)
        self.emit("validity", f"format={validity.format_valid} time={validity.time_valid}")

        self.observe_statement(statement)
        self._persist_statement(statement, sidecar)
        self.emit("stage_complete", f"{side.value} {stage.value}")
        return statement

    # -- persistence

    def _persist(self) -> None:
        if self.run_dir is None:
            return
        tmp = self.run_dir / "state.json.tmp"
        tmp.write_text(serialize(self.state), encoding="utf-8")
        tmp.replace(self.run_dir / "state.json")
        forests_doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "forest_set",
            "forests": {
                side.value: [json.loads(serialize(t)) for t in trees]
                for side, trees in sorted(self.forests.items(), key=lambda kv: kv[0].value)
            },
        }
        (self.run_dir / "forests.json").write_text(
            json.dumps(forests_doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        selections_doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "selection_set",
            "selections": {
                side.value: {
                    "claims": [c.text for c in sel.claims],
                    "framework": sel.framework,
                    "explanation": sel.explanation,
                }
                for side, sel in sorted(self.selections.items(), key=lambda kv: kv[0].value)
            },
        }
        (self.run_dir / "selections.json").write_text(
            json.dumps(selections_doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        sidecars_doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "sidecar_set",
            "sidecars": [s.to_payload() for s in self.sidecars],
        }
        (self.run_dir / "sidecars.json").write_text(
            json.dumps(sidecars_doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    def _persist_statement(self, statement: Statement, sidecar: StageSidecar) -> None:
        if self.run_dir is None:
            return
        name = f"{sidecar.index:02d}_{statement.side.value}_{statement.stage.value}.txt"
        (self.run_dir / "statements" / name).write_text(
            statement.text + "\n", encoding="utf-8"
        )
        self._persist()

    @classmethod
    def resume(
        cls,
        run_dir: str | Path,
        config: StagePipelineConfig,
        collaborators: Collaborators,
    ) -> DebateSession:
        """Rebuild a session from its persisted artifacts at a stage boundary."""
        run_dir = Path(run_dir)
        state = parse((run_dir / "state.json").read_text(encoding="utf-8"))
        session = cls(state, config, collaborators, run_dir=run_dir)
        forests_path = run_dir / "forests.json"
        if forests_path.exists():
            raw = json.loads(forests_path.read_text(encoding="utf-8"))
            for side_name, trees in raw.get("forests", {}).items():
                session.forests[Stance(side_name)] = [
                    parse(json.dumps(t)) for t in trees
                ]
        selections_path = run_dir / "selections.json"
        if selections_path.exists():
            raw = json.loads(selections_path.read_text(encoding="utf-8"))
            for side_name, sel in raw.get("selections", {}).items():
                session.selections[Stance(side_name)] = ClaimSelection(
                    claims=tuple(Claim(c) for c in sel["claims"]),
                    framework=sel["framework"],
                    explanation=sel["explanation"],
                )
        return session


# ---------------------------------------------------------------------------
# Entry points


@dataclass
class RunResult:
    state: DebateState
    sidecars: list[StageSidecar]
    events: list[dict]
    run_dir: Optional[Path] = None

    @property
    def all_valid(self) -> bool:
        return all(s.validity.valid for s in self.sidecars)


def run_stage(
    state: DebateState,
    side: Stance,
    stage: Stage,
    config: StagePipelineConfig,
    collaborators: Collaborators,
) -> Statement:
    """One-shot stage execution on an externally owned state."""
    session = DebateSession(state, config, collaborators)
    return session.play_stage(side, stage)


def run_debate(
    motion: Motion,
    config: StagePipelineConfig,
    collaborators: Collaborators,
    run_dir: Optional[str | Path] = None,
    resume: bool = False,
    swap_sides: bool = False,
    debaters: tuple[str, str] = ("debater-a", "debater-b"),
) -> RunResult:
    """Execute the six-stage Oxford schedule end to end.

    A stage failure propagates after the partial transcript has been
    persisted; rerunning with resume=True continues at the stage boundary.
    """
    if resume:
        if run_dir is None:
            raise OrchestrationError("resume requires a run_dir")
        session = DebateSession.resume(run_dir, config, collaborators)
    else:
        pro, con = debaters if not swap_sides else (debaters[1], debaters[0])
        state = DebateState.new(motion, pro=pro, con=con)
        session = DebateSession(state, config, collaborators,
                                run_dir=Path(run_dir) if run_dir else None)

    while True:
        slot = session.state.next_slot()
        if slot is None:
            break
        session.play_stage(*slot)
    return RunResult(
        state=session.state,
        sidecars=session.sidecars,
        events=session.events,
        run_dir=session.run_dir,
    )


def run_debate_paired(
    motion: Motion,
    config: StagePipelineConfig,
    collaborators_factory: Callable[[], Collaborators],
    out_dir: Optional[str | Path] = None,
) -> tuple[RunResult, RunResult]:
    """The experimental-protocol option: same motion, stances flipped."""
    out = Path(out_dir) if out_dir is not None else None
    first = run_debate(
        motion, config, collaborators_factory(),
        run_dir=out / "original" if out else None,
    )
    second = run_debate(
        motion, config, collaborators_factory(),
        run_dir=out / "swapped" if out else None,
        swap_sides=True,
    )
    return first, second
