"""Human-debate corpus: transcript ingestion and the retrieval index.

Raw transcripts arrive as one text document per debate with stage/side
headings. Ingestion segments them, extracts action tuples per statement,
replays the flow-tree update rules, renders and embeds the tree strings,
and persists everything as versioned documents. Retrieval is an exact
cosine scan over one index row per (debate, side).
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .flow import DebateFlowTree, TupleExtractor, apply_statement_tuples, extract_action_tuples
from .model import DebateError, Motion, OXFORD_SCHEDULE, Stage, Stance, Statement
from .providers import Embedder, EmbeddingVector
from .semantic import NodeMatcher, flow_tree_to_string, retrieve_similar_row
from .serialization import ParseError, SCHEMA_VERSION, parse, serialize, validate_flow_tree

log = logging.getLogger(__name__)


class CorpusError(DebateError):
    pass


class SegmentationError(CorpusError):
    pass


# ---------------------------------------------------------------------------
# Transcript segmentation

_SIDE_WORDS = {
    "pro": Stance.PRO, "for": Stance.PRO, "affirmative": Stance.PRO, "aff": Stance.PRO,
    "con": Stance.CON, "against": Stance.CON, "negative": Stance.CON, "neg": Stance.CON,
}
_STAGE_WORDS = {
    "opening": Stage.OPENING, "open": Stage.OPENING,
    "rebuttal": Stage.REBUTTAL, "rebut": Stage.REBUTTAL,
    "closing": Stage.CLOSING, "close": Stage.CLOSING, "summary": Stage.CLOSING,
}

_HEADING_RE = re.compile(r"^\s*#{0,6}\s*[\[(]?\s*([A-Za-z]+)[\s\-_/:]+([A-Za-z]+)\s*[\])]?\s*:?\s*$")
_MOTION_RE = re.compile(r"^\s*#{0,6}\s*(?:motion|topic)\s*:\s*(.+)$", re.IGNORECASE)


def _heading_slot(line: str) -> Optional[tuple[Stance, Stage]]:
    m = _HEADING_RE.match(line)
    if m is None:
        return None
    first, second = m.group(1).lower(), m.group(2).lower()
    if first in _SIDE_WORDS and second in _STAGE_WORDS:
        return _SIDE_WORDS[first], _STAGE_WORDS[second]
    if first in _STAGE_WORDS and second in _SIDE_WORDS:
        return _SIDE_WORDS[second], _STAGE_WORDS[first]
    return None


def segment_transcript(raw: str) -> tuple[str, dict[tuple[Stance, Stage], str]]:
    """Split a raw debate document into its motion and six stage texts.

    Lenient about heading spellings (pro/for/affirmative, markdown levels,
    either word order) but strict about coverage: all six slots must be
    present and nonempty.
    """
    motion_text = ""
    sections: dict[tuple[Stance, Stage], list[str]] = {}
    current: Optional[tuple[Stance, Stage]] = None
    for line in raw.splitlines():
        m = _MOTION_RE.match(line)
        if m and not motion_text:
            motion_text = m.group(1).strip()
            continue
        slot = _heading_slot(line)
        if slot is not None:
            if slot in sections:
                raise SegmentationError(f"duplicate section {slot[0].value} {slot[1].value}")
            sections[slot] = []
            current = slot
            continue
        if current is not None:
            sections[current].append(line)
    if not motion_text:
        raise SegmentationError("no motion line found")
    texts = {slot: "\n".join(lines).strip() for slot, lines in sections.items()}
    missing = [slot for slot in OXFORD_SCHEDULE if not texts.get(slot)]
    if missing:
        names = ", ".join(f"{s.value} {g.value}" for s, g in missing)
        raise SegmentationError(f"transcript is missing stages: {names}")
    return motion_text, texts


# ---------------------------------------------------------------------------
# Entries and the index


@dataclass
class CorpusEntry:
    debate_id: str
    motion: Motion
    statements: list[Statement]
    trees: dict[Stance, DebateFlowTree]
    tree_strings: dict[Stance, str]
    embeddings: dict[Stance, EmbeddingVector]

    def to_document(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "corpus_entry",
            "debate_id": self.debate_id,
            "motion": {"text": self.motion.text, "id": self.motion.id},
            "statements": [json.loads(serialize(st)) for st in self.statements],
            "trees": {s.value: json.loads(serialize(t)) for s, t in sorted(
                self.trees.items(), key=lambda kv: kv[0].value)},
            "tree_strings": {s.value: t for s, t in sorted(
                self.tree_strings.items(), key=lambda kv: kv[0].value)},
            "embeddings": {
                s.value: {"values": list(v.values), "model_tag": v.model_tag}
                for s, v in sorted(self.embeddings.items(), key=lambda kv: kv[0].value)
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_document(cls, document: str) -> CorpusEntry:
        raw = json.loads(document)
        if raw.get("schema_version") != SCHEMA_VERSION or raw.get("kind") != "corpus_entry":
            raise ParseError("not a corpus_entry document")
        return cls(
            debate_id=raw["debate_id"],
            motion=Motion(text=raw["motion"]["text"], id=raw["motion"].get("id", "")),
            statements=[
                parse(json.dumps(st | {"schema_version": SCHEMA_VERSION, "kind": "statement"}))
                for st in raw["statements"]
            ],
            trees={
                Stance(k): parse(json.dumps(v | {"schema_version": SCHEMA_VERSION,
                                                 "kind": "debate_flow_tree"}))
                for k, v in raw["trees"].items()
            },
            tree_strings={Stance(k): v for k, v in raw["tree_strings"].items()},
            embeddings={
                Stance(k): EmbeddingVector(tuple(v["values"]), v["model_tag"])
                for k, v in raw["embeddings"].items()
            },
        )


@dataclass(frozen=True)
class IndexRow:
    debate_id: str
    side: Stance
    motion_text: str
    tree_string: str
    embedding: EmbeddingVector


@dataclass(frozen=True)
class CorpusMatch:
    entry: CorpusEntry
    side: Stance
    tree_string: str
    similarity: float


@dataclass
class CorpusIndex:
    """Exact-scan retrieval index over per-side human flow trees."""

    model_tag: str
    rows: list[IndexRow] = field(default_factory=list)
    entries: dict[str, CorpusEntry] = field(default_factory=dict)

    def retrieve(
        self, current_tree: DebateFlowTree, theta: float, embedder: Embedder
    ) -> Optional[CorpusMatch]:
        """Top-1 human tree by cosine over tree-string embeddings."""
        query = flow_tree_to_string(current_tree)
        hit = retrieve_similar_row(query, self.rows, theta, embedder)
        if hit is None:
            return None
        row, similarity = hit
        return CorpusMatch(
            entry=self.entries[row.debate_id],
            side=row.side,
            tree_string=row.tree_string,
            similarity=similarity,
        )

    def motion_overlap(self, motion: Motion) -> list[str]:
        """Debate ids whose motion matches; reported, never enforced."""
        needle = " ".join(motion.text.lower().split())
        return [
            debate_id
            for debate_id, entry in sorted(self.entries.items())
            if " ".join(entry.motion.text.lower().split()) == needle
        ]

    def save(self, corpus_dir: str | Path) -> None:
        corpus_dir = Path(corpus_dir)
        (corpus_dir / "entries").mkdir(parents=True, exist_ok=True)
        for debate_id, entry in sorted(self.entries.items()):
            (corpus_dir / "entries" / f"{debate_id}.json").write_text(
                entry.to_document(), encoding="utf-8"
            )
        index_doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "corpus_index",
            "model_tag": self.model_tag,
            "rows": [
                {
                    "debate_id": r.debate_id,
                    "side": r.side.value,
                    "motion_text": r.motion_text,
                    "tree_string": r.tree_string,
                    "embedding": list(r.embedding.values),
                }
                for r in self.rows
            ],
        }
        (corpus_dir / "index.json").write_text(
            json.dumps(index_doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, corpus_dir: str | Path) -> CorpusIndex:
        corpus_dir = Path(corpus_dir)
        try:
            raw = json.loads((corpus_dir / "index.json").read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CorpusError(f"cannot load corpus index: {exc}") from exc
        if raw.get("schema_version") != SCHEMA_VERSION or raw.get("kind") != "corpus_index":
            raise CorpusError("corpus index version or kind mismatch")
        index = cls(model_tag=raw["model_tag"])
        for r in raw["rows"]:
            index.rows.append(
                IndexRow(
                    debate_id=r["debate_id"],
                    side=Stance(r["side"]),
                    motion_text=r["motion_text"],
                    tree_string=r["tree_string"],
                    embedding=EmbeddingVector(tuple(r["embedding"]), raw["model_tag"]),
                )
            )
        entries_dir = corpus_dir / "entries"
        if entries_dir.is_dir():
            for path in sorted(entries_dir.glob("*.json")):
                try:
                    entry = CorpusEntry.from_document(path.read_text(encoding="utf-8"))
                except (ParseError, json.JSONDecodeError, KeyError) as exc:
                    raise CorpusError(f"corrupt corpus entry {path.name}: {exc}") from exc
                index.entries[entry.debate_id] = entry
        missing = {r.debate_id for r in index.rows} - set(index.entries)
        if missing:
            raise CorpusError(f"index rows without entries: {sorted(missing)}")
        return index


def ingest_debate(
    raw: str,
    debate_id: str,
    extractor: TupleExtractor,
    matcher: NodeMatcher,
    embedder: Embedder,
) -> CorpusEntry:
    """One transcript document to a validated, embedded corpus entry."""
    motion_text, texts = segment_transcript(raw)
    motion = Motion(motion_text)
    trees = {s: DebateFlowTree(owner=s) for s in (Stance.PRO, Stance.CON)}
    statements: list[Statement] = []
    for turn, (side, stage) in enumerate(OXFORD_SCHEDULE):
        statement = Statement(side=side, stage=stage, text=texts[(side, stage)])
        statements.append(statement)
        rendered = "\n\n".join(
            flow_tree_to_string(trees[s]) for s in (Stance.PRO, Stance.CON)
        )
        tuples = extract_action_tuples(statement, extractor, rendered)
        apply_statement_tuples(trees, tuples, side, matcher, created_at=(stage, turn))
    for side, tree in trees.items():
        violations = validate_flow_tree(tree)
        if violations:
            raise CorpusError(
                f"debate {debate_id}: {side.value} tree failed validation: "
                + "; ".join(f"{v.code} at {v.path}" for v in violations)
            )
    tree_strings = {s: flow_tree_to_string(t) for s, t in trees.items()}
    embeddings = {s: embedder.embed(ts) for s, ts in tree_strings.items()}
    return CorpusEntry(
        debate_id=debate_id,
        motion=motion,
        statements=statements,
        trees=trees,
        tree_strings=tree_strings,
        embeddings=embeddings,
    )


def build_index(entries: Sequence[CorpusEntry], embedder: Embedder) -> CorpusIndex:
    """Assemble the retrieval index; entries without embeddings get them here."""
    index = CorpusIndex(model_tag=embedder.model_tag)
    for entry in entries:
        if entry.debate_id in index.entries:
            raise CorpusError(f"duplicate debate id {entry.debate_id!r}")
        index.entries[entry.debate_id] = entry
        for side in (Stance.PRO, Stance.CON):
            embedding = entry.embeddings.get(side)
            if embedding is None:
                embedding = embedder.embed(entry.tree_strings[side])
                entry.embeddings[side] = embedding
            if embedding.model_tag != embedder.model_tag:
                raise CorpusError(
                    f"entry {entry.debate_id} embedded with {embedding.model_tag}, "
                    f"index uses {embedder.model_tag}"
                )
            if index.rows and embedding.dimension != index.rows[0].embedding.dimension:
                raise CorpusError(
                    f"entry {entry.debate_id} embedding dimension "
                    f"{embedding.dimension} != index dimension "
                    f"{index.rows[0].embedding.dimension}"
                )
            index.rows.append(
                IndexRow(
                    debate_id=entry.debate_id,
                    side=side,
                    motion_text=entry.motion.text,
                    tree_string=entry.tree_strings[side],
                    embedding=embedding,
                )
            )
    return index
