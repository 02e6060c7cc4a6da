"""Regenerates the golden fixtures under fixtures/.

The debt-ceiling rehearsal tree is the worked four-level example with its
reference attack/support scores; the score table keys every query the tree
build issues, so the build reproduces the example bit-exactly offline.
"""

from __future__ import annotations

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from debatekit.model import Argument, Claim, Motion, Stance
from debatekit.rehearsal import (
    RehearsalParams,
    ScriptedTreeGenerator,
    build_rehearsal_tree,
    render_rehearsal_outline,
    stance_statement,
)
from debatekit.scoring import ImpactQuery, Relation, ScorePair, TableStubScorer, save_fixture
from debatekit.serialization import serialize

MOTION = Motion("Congress should abolish the debt ceiling")

L0 = "Removing the debt ceiling benefits future generations."
L1 = ("The debt ceiling, while imperfect, compels fiscal responsibility, "
      "safeguarding future generations from unsustainable debt burdens.")
L2 = ("The debt ceiling does not ensure fiscal responsibility; it merely "
      "invites fiscal crises.")
L3A = ("The debt ceiling's 'manufactured crises' are preferable to unchecked "
       "spending, which is a greater danger.")
L3B = ("Our budgeting process requires improvement, but eliminating the debt "
       "ceiling is not the right solution.")
L3C = ("The debt ceiling does not need to be a 'political weapon' and can be "
       "reformed to work more effectively, rather than eliminated.")

SCORED_QUERIES: list[tuple[ImpactQuery, float]] = [
    (ImpactQuery(parent=stance_statement(MOTION, Stance.PRO), child=L0,
                 relation=Relation.SUPPORT), 1.6),
    (ImpactQuery(parent=L0, child=L1, relation=Relation.ATTACK), 1.3),
    (ImpactQuery(parent=L1, child=L2, relation=Relation.ATTACK, context=(L0,)), 1.4),
    (ImpactQuery(parent=L0, child=L2, relation=Relation.SUPPORT), 1.6),
    (ImpactQuery(parent=L2, child=L3A, relation=Relation.ATTACK, context=(L0, L1)), 0.8),
    (ImpactQuery(parent=L1, child=L3A, relation=Relation.SUPPORT, context=(L0,)), 0.8),
    (ImpactQuery(parent=L2, child=L3B, relation=Relation.ATTACK, context=(L0, L1)), 1.0),
    (ImpactQuery(parent=L1, child=L3B, relation=Relation.SUPPORT, context=(L0,)), 0.8),
    (ImpactQuery(parent=L2, child=L3C, relation=Relation.ATTACK, context=(L0, L1)), 1.2),
    (ImpactQuery(parent=L1, child=L3C, relation=Relation.SUPPORT, context=(L0,)), 1.0),
]


def main() -> None:
    fixtures = REPO / "fixtures"
    fixtures.mkdir(exist_ok=True)

    rows = [
        {"key": q.key, "relation": q.relation.value, "score": score}
        for q, score in SCORED_QUERIES
    ]
    save_fixture(rows, fixtures / "impact_scores_debt_ceiling.json")

    generator = ScriptedTreeGenerator(
        {
            L0: [Argument(claim=Claim(L1))],
            L1: [Argument(claim=Claim(L2))],
            L2: [Argument(claim=Claim(L3A)), Argument(claim=Claim(L3B)),
                 Argument(claim=Claim(L3C))],
        }
    )
    scorer = TableStubScorer.from_fixture(fixtures / "impact_scores_debt_ceiling.json")
    tree = build_rehearsal_tree(
        Claim(L0), Stance.PRO, MOTION, RehearsalParams(branch=3, depth=3),
        generator, ScorePair.single(scorer),
    )
    (fixtures / "rehearsal_debt_ceiling.json").write_text(
        serialize(tree), encoding="utf-8"
    )
    (fixtures / "rehearsal_debt_ceiling.txt").write_text(
        render_rehearsal_outline(tree) + "\n", encoding="utf-8"
    )
    print(render_rehearsal_outline(tree))
    root = tree.root
    print()
    print("root f_3      =", root.strengths[3])
    print("level-1 f_2   =", root.children[0].strengths[2])
    print("level-2 f_1   =", root.children[0].children[0].strengths[1])
    print("level-3 f_0   =", [c.strengths[0] for c in root.children[0].children[0].children])


if __name__ == "__main__":
    main()
