
import random

import pytest

from debatekit.providers import ScriptedChatProvider, ChatRequest
from debatekit.scoring import (
    ImpactClass,
    ImpactDistribution,
    ImpactQuery,
    PromptImpactScorer,
    Relation,
    ScoringError,
    SeededStubScorer,
    TableStubScorer,
    parse_class_reply,
    score_impact,
    weighted_score,
)

from .conftest import FIXTURES

ROOT_CLAIM = "Removing the debt ceiling benefits future generations."
STANCE_STATEMENT = "Support the motion: Congress should abolish the debt ceiling"


def make_query(i: int) -> ImpactQuery:
    return ImpactQuery(
        parent=f"parent argument {i}",
        child=f"child argument {i}",
        relation=Relation.ATTACK if i % 2 else Relation.SUPPORT,
        context=(f"ancestor {i}",) if i % 3 == 0 else (),
    )


@pytest.mark.parametrize(
    "probs,expected",
    [
        ({ImpactClass.NOT_IMPACTFUL: 1.0}, 0.0),
        ({ImpactClass.IMPACTFUL: 1.0}, 2.0),
        ({ImpactClass.NOT_IMPACTFUL: 0.2, ImpactClass.MEDIUM_IMPACTFUL: 0.5,
          ImpactClass.IMPACTFUL: 0.3}, 1.1),
    ],
)
def test_weighted_score(probs, expected):
    assert weighted_score(ImpactDistribution(probs)) == pytest.approx(expected, abs=1e-12)


def test_distribution_rejects_bad_probabilities():
    with pytest.raises(ScoringError):
        ImpactDistribution({ImpactClass.NOT_IMPACTFUL: 0.5})  # sums to 0.5
    with pytest.raises(ScoringError):
        ImpactDistribution({ImpactClass.NOT_IMPACTFUL: 1.5,
                            ImpactClass.IMPACTFUL: -0.5})


def test_weighted_score_is_linear_and_bounded():
    rng = random.Random(11)
    for _ in range(200):
        a, b, c = rng.random(), rng.random(), rng.random()
        total = a + b + c
        dist = ImpactDistribution({
            ImpactClass.NOT_IMPACTFUL: a / total,
            ImpactClass.MEDIUM_IMPACTFUL: b / total,
            ImpactClass.IMPACTFUL: c / total,
        })
        score = weighted_score(dist)
        assert 0.0 <= score <= 2.0
        assert score == pytest.approx((b / total) + 2 * (c / total), abs=1e-9)


def test_stub_scorer_is_pure_and_bounded():
    scorer = SeededStubScorer(seed=7)
    query = make_query(0)
    first = score_impact(query, scorer)
    assert 0.0 <= first <= 2.0
    assert score_impact(query, scorer) == first
    assert score_impact(query, SeededStubScorer(seed=7)) == first
    # a different seed moves the value (not a constant function)
    assert any(
        score_impact(make_query(i), SeededStubScorer(seed=8))
        != score_impact(make_query(i), scorer)
        for i in range(5)
    )


def test_stub_scorer_batch_within_range():
    scorer = SeededStubScorer(seed=3)
    values = [score_impact(make_query(i), scorer) for i in range(50)]
    assert all(0.0 <= v <= 2.0 for v in values)
    assert len(set(values)) > 10  # spread, not a point mass


def test_table_scorer_reproduces_worked_example_root_score():
    scorer = TableStubScorer.from_fixture(FIXTURES / "impact_scores_debt_ceiling.json")
    query = ImpactQuery(parent=STANCE_STATEMENT, child=ROOT_CLAIM,
                        relation=Relation.SUPPORT)
    assert score_impact(query, scorer) == 1.6


def test_table_scorer_misses_loudly():
    scorer = TableStubScorer({})
    with pytest.raises(ScoringError) as err:
        score_impact(make_query(1), scorer)
    assert err.value.query is not None


def test_query_canonical_key_is_stable():
    q1 = make_query(4)
    q2 = make_query(4)
    assert q1.key == q2.key
    assert q1.key != make_query(5).key
    assert len(q1.key) == 64


def test_query_requires_nonempty_sides():
    with pytest.raises(ScoringError):
        ImpactQuery(parent=" ", child="x", relation=Relation.SUPPORT)


def test_score_impact_clamps_to_range():
    class Wild:
        def score(self, query):
            return 7.5

    assert score_impact(make_query(2), Wild()) == 2.0


def test_parse_class_reply():
    assert parse_class_reply("2") is ImpactClass.IMPACTFUL
    assert parse_class_reply("The answer is 0.") is ImpactClass.NOT_IMPACTFUL
    with pytest.raises(ScoringError):
        parse_class_reply("strongly impactful")


def test_prompt_scorer_point_mass_path():
    provider = ScriptedChatProvider()
    scorer = PromptImpactScorer(provider)
    query = make_query(6)
    provider.script(scorer._request(query), "1")
    assert score_impact(query, scorer) == 1.0


def test_prompt_scorer_uses_class_probabilities_when_available():
    class ProbProvider:
        def chat(self, request: ChatRequest) -> str:  # pragma: no cover
            raise AssertionError("distribution path should not call chat")

        def class_probabilities(self, request: ChatRequest):
            return {0: 0.2, 1: 0.5, 2: 0.3}

    scorer = PromptImpactScorer(ProbProvider())
    assert scorer.score(make_query(8)) == pytest.approx(1.1)


def test_provider_failure_surfaces_with_query():
    class Broken:
        def score(self, query):
            raise RuntimeError("socket closed")

    with pytest.raises(ScoringError) as err:
        score_impact(make_query(9), Broken())
    assert err.value.query is not None
