import json

import pytest

from debatekit.flow import CandidateAction, DebateFlowTree, FlowNode
from debatekit.model import (
    ActionKind,
    Claim,
    Importance,
    Motion,
    Stage,
    Stance,
    Statement,
)
from debatekit.orchestrator import (
    Collaborators,
    DebateSession,
    OrchestrationError,
    StagePipelineConfig,
    assemble_battlefields,
    run_debate,
    run_debate_paired,
    split_plan_and_statement,
    validate_statement,
)
from debatekit.providers import ProviderError
from debatekit.serialization import serialize, validate_flow_tree
from debatekit.stubs import DeterministicDebateStub, make_stub_collaborators
from debatekit.timecontrol import RateEstimator

MOTION = Motion("Congress should abolish the debt ceiling")


# ---------------------------------------------------------------------------
# validity checks


def test_clean_statement_is_valid():
    st = Statement(side=Stance.PRO, stage=Stage.OPENING,
                   text="A short and tidy opening. It argues plainly.")
    report = validate_statement(st, Stage.OPENING)
    assert report.format_valid and report.time_valid
    assert report.reasons == ()


def test_reviewer_leakage_invalidates_format():
    st = Statement(side=Stance.PRO, stage=Stage.REBUTTAL,
                   text="We proceed as suggested by the reviewer and argue on.")
    report = validate_statement(st, Stage.REBUTTAL)
    assert not report.format_valid
    assert any("meta/planning leakage" in r for r in report.reasons)


def test_intermediate_thought_invalidates_format():
    st = Statement(side=Stance.CON, stage=Stage.OPENING,
                   text="I will provide feedback on the following points. First.")
    assert not validate_statement(st, Stage.OPENING).format_valid


def test_wrong_side_identification_flagged():
    st = Statement(side=Stance.PRO, stage=Stage.OPENING,
                   text="We are the con side and we oppose this motion strongly.")
    report = validate_statement(st, Stage.OPENING)
    assert not report.format_valid


def test_bare_bullet_list_invalidates_format():
    st = Statement(side=Stance.PRO, stage=Stage.CLOSING,
                   text="- point one\n- point two\n- point three\n- point four")
    assert not validate_statement(st, Stage.CLOSING).format_valid


def test_600_words_exceed_two_minutes():
    text = " ".join(f"w{i}" for i in range(600))
    st = Statement(side=Stance.CON, stage=Stage.CLOSING, text=text)
    report = validate_statement(st, Stage.CLOSING, RateEstimator(), time_limit=120.0)
    assert report.format_valid
    assert not report.time_valid  # 600 words at 130 wpm is ~277 s


def test_invalid_report_requires_reasons():
    from debatekit.orchestrator import ValidityReport

    with pytest.raises(ValueError):
        ValidityReport(format_valid=False, time_valid=True, reasons=())


# ---------------------------------------------------------------------------
# battlefield assembly


def build_trees_with_actions():
    own = DebateFlowTree(owner=Stance.PRO)
    hot = FlowNode(claim=Claim("hot claim"), side=Stance.PRO, visits=5)
    cold = FlowNode(claim=Claim("cold claim"), side=Stance.PRO, visits=0)
    own.root.children.extend([hot, cold])
    oppo = DebateFlowTree(owner=Stance.CON)
    theirs = FlowNode(claim=Claim("their claim"), side=Stance.CON, visits=2)
    oppo.root.children.append(theirs)
    actions = [
        CandidateAction(kind=ActionKind.REINFORCE, target=hot),
        CandidateAction(kind=ActionKind.REINFORCE, target=cold),
        CandidateAction(kind=ActionKind.ATTACK, target=theirs),
    ]
    return own, oppo, actions


def test_battlefields_group_by_top_level_subtree():
    own, oppo, actions = build_trees_with_actions()
    battlefields = assemble_battlefields(actions, {Stance.PRO: own, Stance.CON: oppo})
    assert len(battlefields) == 3
    descriptions = [b.description for b in battlefields]
    # ranked by (max strength = none anywhere, so visits): hot 5, theirs 2, cold 0
    assert descriptions == ["hot claim", "their claim", "cold claim"]
    assert battlefields[0].importance is Importance.HIGH
    assert battlefields[1].importance is Importance.MEDIUM
    assert battlefields[2].importance is Importance.LOW


def test_battlefield_rank_prefers_retrieved_strength():
    own, oppo, actions = build_trees_with_actions()
    from debatekit.flow import RetrievedArgument
    from debatekit.rehearsal import RehearsalNode
    from debatekit.model import Argument

    node = RehearsalNode(argument=Argument(claim=Claim("prepared")), level=1,
                         side=Stance.CON, attack_score=1.9)
    actions[1].retrieved = [RetrievedArgument(node, 1.9)]  # cold claim, strong prep
    battlefields = assemble_battlefields(actions, {Stance.PRO: own, Stance.CON: oppo})
    assert battlefields[0].description == "cold claim"


def test_propose_actions_form_new_claims_group():
    own = DebateFlowTree(owner=Stance.PRO)
    oppo = DebateFlowTree(owner=Stance.CON)
    actions = [CandidateAction(kind=ActionKind.PROPOSE, claim=Claim("fresh"))]
    battlefields = assemble_battlefields(actions, {Stance.PRO: own, Stance.CON: oppo})
    assert len(battlefields) == 1
    assert battlefields[0].description == "New claims to put forward"
    assert battlefields[0].importance is Importance.HIGH


# ---------------------------------------------------------------------------
# plan/statement splitting


def test_split_plan_and_statement():
    plan, text = split_plan_and_statement(
        "**Opening Plan**: spend words wisely.\n**Statement**: The case begins."
    )
    assert plan == "spend words wisely."
    assert text == "The case begins."


def test_split_without_marker_returns_whole_reply():
    plan, text = split_plan_and_statement("Just a bare statement.")
    assert plan is None
    assert text == "Just a bare statement."


# ---------------------------------------------------------------------------
# full runs on stubs


def run_stub_debate(run_dir=None, resume=False):
    return run_debate(MOTION, StagePipelineConfig(), make_stub_collaborators(),
                      run_dir=run_dir, resume=resume)


def test_full_stub_debate_is_deterministic_and_valid():
    first = run_stub_debate()
    second = run_stub_debate()
    assert len(first.state.transcript) == 6
    assert first.all_valid
    assert serialize(first.state) == serialize(second.state)
    for side in Stance:
        assert validate_flow_tree(first.state.flow_trees[side]) == []


def test_opening_claims_round_trip_through_extraction():
    result = run_stub_debate()
    opening = result.state.transcript[0]
    pro_tree = result.state.flow_trees[Stance.PRO]
    top_claims = [n.claim_text for n in pro_tree.root.children]
    # every top-level pro claim appears verbatim in the opening statement
    assert top_claims
    for claim in top_claims[:3]:
        assert claim in opening.text


def test_closing_offers_no_propose_actions():
    result = run_stub_debate()
    from debatekit.flow import candidate_actions

    state = result.state
    actions = candidate_actions(
        state.own_tree(Stance.PRO), state.opponent_tree(Stance.PRO), Stage.CLOSING
    )
    assert all(a.kind is not ActionKind.PROPOSE for a in actions)
    closing = state.transcript[4]
    assert "We put forward the claim" not in closing.text


def test_transcript_matches_oxford_schedule():
    result = run_stub_debate()
    slots = [(st.side, st.stage) for st in result.state.transcript]
    assert slots == list(result.state.stage_schedule)


def test_flow_trees_reproducible_from_transcript_alone():
    """Replaying the transcript through extract/update rebuilds the trees."""
    result = run_stub_debate()
    collab = make_stub_collaborators()
    from debatekit.model import DebateState

    state = DebateState.new(MOTION)
    replay_session = DebateSession(state, StagePipelineConfig(), collab)
    for statement in result.state.transcript:
        replay_session.observe_statement(statement)
    for side in Stance:
        assert serialize(state.flow_trees[side]) == serialize(
            result.state.flow_trees[side]
        )


def test_paired_run_swaps_side_assignment(tmp_path):
    first, second = run_debate_paired(
        MOTION, StagePipelineConfig(), make_stub_collaborators, out_dir=tmp_path
    )
    assert first.state.sides[Stance.PRO] == "debater-a"
    assert second.state.sides[Stance.PRO] == "debater-b"
    assert (tmp_path / "original" / "state.json").exists()
    assert (tmp_path / "swapped" / "state.json").exists()
    # same engine on both sides: swapped transcript text matches the original
    assert [s.text for s in first.state.transcript] == [
        s.text for s in second.state.transcript
    ]


class FailAtStage:
    """Chat provider that fails when the engine reaches a given stage draft."""

    def __init__(self, fail_marker: str):
        self.inner = DeterministicDebateStub()
        self.fail_marker = fail_marker
        self.armed = True

    def chat(self, request):
        if self.armed and self.fail_marker in request.prompt:
            raise ProviderError("injected outage")
        return self.inner.chat(request)


def test_interrupted_run_resumes_to_identical_state(tmp_path):
    from debatekit.providers import HashEmbedder

    # uninterrupted reference
    reference = run_stub_debate()

    failing = Collaborators.from_provider(
        FailAtStage("Now it comes the rebuttal phase"), HashEmbedder()
    )
    run_dir = tmp_path / "run"
    with pytest.raises(ProviderError):
        run_debate(MOTION, StagePipelineConfig(), failing, run_dir=run_dir)

    partial = (run_dir / "state.json").read_text(encoding="utf-8")
    assert json.loads(partial)["transcript"]  # the openings persisted

    resumed = run_debate(MOTION, StagePipelineConfig(), make_stub_collaborators(),
                         run_dir=run_dir, resume=True)
    assert len(resumed.state.transcript) == 6
    assert serialize(resumed.state) == serialize(reference.state)


def test_out_of_schedule_stage_rejected():
    collab = make_stub_collaborators()
    from debatekit.model import DebateState

    session = DebateSession(DebateState.new(MOTION), StagePipelineConfig(), collab)
    with pytest.raises(OrchestrationError):
        session.play_stage(Stance.CON, Stage.OPENING)


def test_stage_pipeline_config_validation():
    with pytest.raises(ValueError):
        StagePipelineConfig(theta=1.5)
    with pytest.raises(ValueError):
        StagePipelineConfig(words_per_minute=0)
    config = StagePipelineConfig()
    assert config.word_budget(Stage.OPENING) == 520
    assert config.word_budget(Stage.CLOSING) == 260
    assert config.time_ranges[Stage.OPENING].t_l == pytest.approx(228.0)


def test_events_cover_pipeline_phases():
    result = run_stub_debate()
    phases = {e["phase"] for e in result.events}
    assert {"rehearsal", "candidate_actions", "retrieval", "battlefields", "draft",
            "audience_feedback", "time_fit", "validity", "stage_complete"} <= phases
