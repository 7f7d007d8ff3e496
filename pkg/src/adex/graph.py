"""In-memory knowledge graph: triples grouped into explanation blocks.

Triples carry a complexity weight, precondition edges, optional move
templates, and (once introduced to the explainee) a level-of-understanding
score in [0, 1]. Two triples are adjacent iff they share a concept; graph
distance between triples is the hop count in that adjacency graph.
"""

from __future__ import annotations

import copy
import math
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional

import yaml

VALID_COMPARISON_DOMAINS = ("chess", "tictactoe", "bestof4", "uno")

COMPARISON_DOMAIN_LABELS = {
    "chess": "chess",
    "tictactoe": "TicTacToe",
    "bestof4": "Bestof4",
    "uno": "UNO",
}


class GraphLoadError(ValueError):
    """Raised when a graph document violates the schema or its invariants."""


class GraphStateError(ValueError):
    """Raised when an operation is applied to triples in an illegal state."""


@dataclass
class Precondition:
    ref: str
    external: bool = False


@dataclass
class Triple:
    id: str
    subject: str
    predicate: str
    object: str
    complexity: int
    block: str
    mandatory: bool = True
    preconditions: list[Precondition] = field(default_factory=list)
    has_example: bool = False
    comparison_domain: Optional[str] = None
    template_texts: dict[str, str] = field(default_factory=dict)
    lou: Optional[float] = None

    @property
    def introduced(self) -> bool:
        return self.lou is not None


@dataclass
class BlockStatus:
    grounded_count: int
    total_count: int
    complete: bool


class KnowledgeGraph:
    """Holds concepts, blocks, triples and the derived adjacency structure."""

    def __init__(self, concepts: dict[str, str], blocks: list[str],
                 triples: list[Triple]):
        self.concepts = concepts
        self.blocks = blocks
        self.triples: dict[str, Triple] = {t.id: t for t in triples}
        self._validate()
        self._build_indexes()

    # -- construction ------------------------------------------------------

    def _validate(self) -> None:
        if not self.triples:
            raise GraphLoadError("graph has no triples")
        if len(self.blocks) != len(set(self.blocks)):
            raise GraphLoadError("duplicate block id in block list")
        for t in self.triples.values():
            if t.complexity not in (1, 2, 3):
                raise GraphLoadError(
                    f"triple {t.id!r}: complexity {t.complexity} outside {{1,2,3}}")
            if t.block not in self.blocks:
                raise GraphLoadError(
                    f"triple {t.id!r}: unknown block {t.block!r}")
            for c in (t.subject, t.object):
                if c not in self.concepts:
                    raise GraphLoadError(
                        f"triple {t.id!r}: unknown concept {c!r}")
            if t.comparison_domain is not None and \
                    t.comparison_domain not in VALID_COMPARISON_DOMAINS:
                raise GraphLoadError(
                    f"triple {t.id!r}: unknown comparison domain "
                    f"{t.comparison_domain!r}")
            if t.lou is not None and not 0.0 <= t.lou <= 1.0:
                raise GraphLoadError(
                    f"triple {t.id!r}: lou {t.lou} outside [0,1]")
            for pre in t.preconditions:
                target = self.triples.get(pre.ref)
                if target is None:
                    raise GraphLoadError(
                        f"triple {t.id!r}: dangling precondition {pre.ref!r}")
                is_external = target.block != t.block
                if pre.external != is_external:
                    raise GraphLoadError(
                        f"triple {t.id!r}: precondition {pre.ref!r} flagged "
                        f"external={pre.external} but blocks "
                        f"{'differ' if is_external else 'match'}")
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        # Depth-first search over precondition edges; grey nodes mark a cycle.
        WHITE, GREY, BLACK = 0, 1, 2
        color = {tid: WHITE for tid in self.triples}

        def visit(tid: str) -> None:
            color[tid] = GREY
            for pre in self.triples[tid].preconditions:
                if color[pre.ref] == GREY:
                    raise GraphLoadError(
                        f"cyclic preconditions involving {pre.ref!r}")
                if color[pre.ref] == WHITE:
                    visit(pre.ref)
            color[tid] = BLACK

        for tid in self.triples:
            if color[tid] == WHITE:
                visit(tid)

    def _build_indexes(self) -> None:
        by_concept: dict[str, set[str]] = {}
        for t in self.triples.values():
            by_concept.setdefault(t.subject, set()).add(t.id)
            by_concept.setdefault(t.object, set()).add(t.id)
        self.adjacency: dict[str, set[str]] = {tid: set() for tid in self.triples}
        for members in by_concept.values():
            for a in members:
                self.adjacency[a] |= members - {a}
        self.block_triples: dict[str, list[str]] = {b: [] for b in self.blocks}
        for t in self.triples.values():
            self.block_triples[t.block].append(t.id)
        for ids in self.block_triples.values():
            ids.sort()
        self._distances = self._all_pairs_distances()

    def _all_pairs_distances(self) -> dict[str, dict[str, float]]:
        dist: dict[str, dict[str, float]] = {}
        for source in self.triples:
            d = {source: 0}
            queue = deque([source])
            while queue:
                cur = queue.popleft()
                for nxt in self.adjacency[cur]:
                    if nxt not in d:
                        d[nxt] = d[cur] + 1
                        queue.append(nxt)
            dist[source] = d
        return dist

    # -- queries -----------------------------------------------------------

    def require(self, triple_id: str) -> Triple:
        try:
            return self.triples[triple_id]
        except KeyError:
            raise KeyError(f"unknown triple id {triple_id!r}") from None

    def triple_distance(self, a: str, b: str) -> float:
        """Shortest-path hop count between two triples; inf if disconnected."""
        self.require(b)
        return self._distances[self.require(a).id].get(b, math.inf)

    def mandatory_ids(self, block: str) -> list[str]:
        self._require_block(block)
        return [tid for tid in self.block_triples[block]
                if self.triples[tid].mandatory]

    def candidate_provide_sets(self, block: str, capacity: int) -> list[tuple[str, ...]]:
        """Sets of un-introduced mandatory triples whose combined complexity
        is closest to the capacity.

        Singletons plus semantically connected pairs (distance 1) are
        considered; only the best-ranked tier (minimal |sum(cx) - capacity|)
        is returned, ordered by triple ids for determinism.
        """
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        open_ids = [tid for tid in self.mandatory_ids(block)
                    if not self.triples[tid].introduced]
        if not open_ids:
            return []
        candidates: list[tuple[str, ...]] = [(tid,) for tid in open_ids]
        for a, b in combinations(open_ids, 2):
            if b in self.adjacency[a]:
                candidates.append((a, b))
        def gap(ids: tuple[str, ...]) -> int:
            return abs(sum(self.triples[t].complexity for t in ids) - capacity)
        best = min(gap(c) for c in candidates)
        tier = [c for c in candidates if gap(c) == best]
        tier.sort(key=lambda ids: (len(ids), ids))
        return tier

    def block_status(self, block: str, gth: float) -> BlockStatus:
        """Counts mandatory triples grounded at threshold gth."""
        mandatory = self.mandatory_ids(block)
        grounded = sum(1 for tid in mandatory
                       if (lou := self.triples[tid].lou) is not None and lou >= gth)
        return BlockStatus(grounded, len(mandatory), grounded == len(mandatory))

    def all_grounded(self, gth: float) -> bool:
        return all(self.block_status(b, gth).complete for b in self.blocks)

    def _require_block(self, block: str) -> None:
        if block not in self.block_triples:
            raise KeyError(f"unknown block {block!r}")

    # -- mutation ----------------------------------------------------------

    def apply_feedback_to_lou(self, cud: Iterable[str], polarity: str,
                              fb_gain: float, fb_loss: float) -> None:
        """Nudges the understanding of every triple under discussion.

        Positive feedback closes a fb_gain share of the gap to 1; negative
        feedback removes an fb_loss share of the current value.
        """
        if polarity not in ("positive", "negative"):
            raise ValueError(f"unknown polarity {polarity!r}")
        for tid in cud:
            t = self.require(tid)
            if t.lou is None:
                raise GraphStateError(
                    f"triple {tid!r} has no understanding level yet")
            if polarity == "positive":
                t.lou = t.lou + fb_gain * (1.0 - t.lou)
            else:
                t.lou = t.lou * (1.0 - fb_loss)
            t.lou = min(1.0, max(0.0, t.lou))

    def set_lou(self, triple_id: str, lou: float) -> None:
        self.require(triple_id).lou = min(1.0, max(0.0, lou))

    def fresh_copy(self) -> "KnowledgeGraph":
        """Independent copy for a new session (all understanding state reset)."""
        g = copy.deepcopy(self)
        for t in g.triples.values():
            t.lou = None
        return g


# -- loading ---------------------------------------------------------------

_REQUIRED_TRIPLE_FIELDS = ("id", "subject", "predicate", "object",
                           "complexity", "block")


def _parse_triple(raw: dict, index: int) -> Triple:
    if not isinstance(raw, dict):
        raise GraphLoadError(f"triples[{index}] is not a mapping")
    missing = [f for f in _REQUIRED_TRIPLE_FIELDS if f not in raw]
    if missing:
        raise GraphLoadError(
            f"triples[{index}] missing field(s): {', '.join(missing)}")
    if "lou" in raw:
        raise GraphLoadError(
            f"triples[{index}]: lou may not appear in a graph document")
    pres = []
    for p in raw.get("preconditions", []) or []:
        if isinstance(p, str):
            pres.append(Precondition(ref=p))
        elif isinstance(p, dict) and "ref" in p:
            pres.append(Precondition(ref=p["ref"], external=bool(p.get("external", False))))
        else:
            raise GraphLoadError(
                f"triples[{index}]: malformed precondition entry {p!r}")
    try:
        complexity = int(raw["complexity"])
    except (TypeError, ValueError):
        raise GraphLoadError(
            f"triples[{index}]: complexity {raw['complexity']!r} is not an integer")
    return Triple(
        id=str(raw["id"]),
        subject=str(raw["subject"]),
        predicate=str(raw["predicate"]),
        object=str(raw["object"]),
        complexity=complexity,
        block=str(raw["block"]),
        mandatory=bool(raw.get("mandatory", True)),
        preconditions=pres,
        has_example=bool(raw.get("has_example", False)),
        comparison_domain=raw.get("comparison_domain"),
        template_texts=dict(raw.get("template_texts", {}) or {}),
    )


def load_graph_data(data: dict) -> KnowledgeGraph:
    """Builds a graph from an already parsed document."""
    if not isinstance(data, dict):
        raise GraphLoadError("graph document is not a mapping")
    for key in ("concepts", "blocks", "triples"):
        if key not in data:
            raise GraphLoadError(f"graph document missing top-level key {key!r}")
    concepts = {}
    for i, c in enumerate(data["concepts"] or []):
        if not isinstance(c, dict) or "id" not in c:
            raise GraphLoadError(f"concepts[{i}] must be a mapping with an id")
        concepts[str(c["id"])] = str(c.get("label", c["id"]))
    blocks = [str(b) for b in (data["blocks"] or [])]
    raw_triples = data["triples"] or []
    if not raw_triples:
        raise GraphLoadError("graph has no triples")
    triples = [_parse_triple(r, i) for i, r in enumerate(raw_triples)]
    ids = [t.id for t in triples]
    if len(ids) != len(set(ids)):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise GraphLoadError(f"duplicate triple id(s): {', '.join(dupes)}")
    return KnowledgeGraph(concepts, blocks, triples)


def load_graph(path: str | Path) -> KnowledgeGraph:
    """Loads a graph from a YAML (or JSON) document on disk."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise GraphLoadError(f"cannot read graph file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise GraphLoadError(f"graph file {path} is not valid YAML: {exc}") from exc
    return load_graph_data(data)
