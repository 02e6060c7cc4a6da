"""Embedding-based similarity: claim-to-node matching and tree retrieval.

All comparisons are exact cosine scans; the corpora involved are small
(~hundreds of nodes), so no approximate index is needed. Vectors from
different embedding models never mix: every vector carries a model_tag and
mismatches are errors, not silent zeros.
"""

from __future__ import annotations

import hashlib
import math
import re
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np

from .model import DebateError, NodeStatus, Stance
from .providers import Embedder, EmbeddingVector

DEFAULT_SIMILARITY_THRESHOLD = 0.8

N = TypeVar("N")


class SemanticError(DebateError):
    pass


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Standard cosine over two same-model, same-dimension vectors."""
    if a.model_tag != b.model_tag:
        raise SemanticError(f"model_tag mismatch: {a.model_tag} vs {b.model_tag}")
    if a.dimension != b.dimension:
        raise SemanticError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    va = np.asarray(a.values, dtype=np.float64)
    vb = np.asarray(b.values, dtype=np.float64)
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise SemanticError("cosine undefined for zero vector")
    return float(np.dot(va, vb) / (na * nb))


class CachedEmbedder:
    """Caches embeddings by (model_tag, sha256(text)).

    Concurrent readers are fine; writes are serialized. Retrieval runs every
    stage, so repeated texts (claims, tree strings) hit the cache.
    """

    def __init__(self, inner: Embedder) -> None:
        self.inner = inner
        self.model_tag = inner.model_tag
        self._cache: dict[tuple[str, str], EmbeddingVector] = {}
        self._lock = threading.Lock()
        self.misses = 0

    def embed(self, text: str) -> EmbeddingVector:
        key = (self.model_tag, hashlib.sha256(text.encode("utf-8")).hexdigest())
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        vec = self.inner.embed(text)
        with self._lock:
            self._cache[key] = vec
            self.misses += 1
        return vec


def find_similar(
    nodes: Iterable[N],
    target_text: str,
    theta: float,
    embedder: Embedder,
    text_of: Callable[[N], str],
) -> Optional[tuple[N, float]]:
    """Best node whose claim's cosine similarity to the target is >= theta.

    Ties (exact float equality) break toward the earlier node in iteration
    order, which callers arrange to be tree pre-order.
    """
    target_vec = embedder.embed(target_text)
    best: Optional[N] = None
    best_sim = -math.inf
    for node in nodes:
        sim = cosine_similarity(target_vec, embedder.embed(text_of(node)))
        if sim > best_sim:
            best, best_sim = node, sim
    if best is None or best_sim < theta:
        return None
    return best, best_sim


class NodeMatcher:
    """Bundles an embedder with the similarity threshold for claim matching."""

    def __init__(self, embedder: Embedder, theta: float = DEFAULT_SIMILARITY_THRESHOLD) -> None:
        if not 0.0 < theta <= 1.0:
            raise ValueError("theta must be in (0, 1]")
        self.embedder = CachedEmbedder(embedder) if not isinstance(embedder, CachedEmbedder) else embedder
        self.theta = theta

    def best_match(
        self,
        nodes: Iterable[N],
        target_text: str,
        text_of: Callable[[N], str],
    ) -> Optional[tuple[N, float]]:
        return find_similar(nodes, target_text, self.theta, self.embedder, text_of)


# ---------------------------------------------------------------------------
# Tree-string rendering

_LINE_RE = re.compile(
    r"^(?P<indent> *)\[(?P<side>pro|con)\]"
    r"(?:\[root\]|\[(?P<status>proposed|attacked|solved)\]\[v=(?P<visits>\d+)\] (?P<claim>.*))$"
)


def _one_line(text: str) -> str:
    return " ".join(text.split())


def flow_tree_to_string(tree) -> str:
    """Deterministic indented outline of a debate flow tree.

    One line per node, two spaces of indent per depth level, children in
    insertion order. The root renders as ``[side][root]``; every other node
    as ``[side][status][v=visits] claim``.
    """
    lines = [f"[{tree.owner.value}][root]"]

    def visit(node, depth: int) -> None:
        lines.append(
            "  " * depth
            + f"[{node.side.value}][{node.status.value}][v={node.visits}] "
            + _one_line(node.claim.text)
        )
        for child in node.children:
            visit(child, depth + 1)

    for child in tree.root.children:
        visit(child, 1)
    return "\n".join(lines)


@dataclass(frozen=True)
class TreeLine:
    side: Stance
    status: Optional[NodeStatus]  # None for the root anchor line
    visits: int
    claim: str
    depth: int


def parse_tree_string(rendered: str) -> list[TreeLine]:
    """Inverse of flow_tree_to_string, back to (side, status, visits, claim, depth)."""
    out: list[TreeLine] = []
    for lineno, line in enumerate(rendered.splitlines(), 1):
        m = _LINE_RE.match(line)
        if m is None:
            raise SemanticError(f"unparseable tree line {lineno}: {line!r}")
        indent = len(m.group("indent"))
        if indent % 2 != 0:
            raise SemanticError(f"odd indent on line {lineno}")
        status = m.group("status")
        out.append(
            TreeLine(
                side=Stance(m.group("side")),
                status=NodeStatus(status) if status else None,
                visits=int(m.group("visits") or 0),
                claim=m.group("claim") or "",
                depth=indent // 2,
            )
        )
    return out


def retrieve_similar_row(
    query_text: str,
    rows: Sequence,
    theta: float,
    embedder: Embedder,
):
    """Top-1 corpus row by cosine over pre-embedded tree strings.

    Rows carry .tree_string and .embedding; returns (row, similarity) only
    when the best similarity clears theta.
    """
    if not rows:
        return None
    query_vec = embedder.embed(query_text)
    best = None
    best_sim = -math.inf
    for row in rows:
        sim = cosine_similarity(query_vec, row.embedding)
        if sim > best_sim:
            best, best_sim = row, sim
    if best is None or best_sim < theta:
        return None
    return best, best_sim
