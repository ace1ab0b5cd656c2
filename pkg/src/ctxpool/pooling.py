"""Query-specific context graphs built by CNF-guided expansion.

Expansion follows the node-drop pooling split: a score per candidate
relation, a selector that keeps relations passing the CNF, and coarsening
that keeps only edges carrying a selected relation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cnf import cnf_generate
from .errors import CapacityError
from .kg import KnowledgeGraph, Vocabulary
from .relevance import MetricKind, RelevanceScore, rel_precision, rel_recall

Frontier = frozenset  # of (entity, arrived_via_relation) pairs

_EMPTY_EDGES = np.zeros((0, 3), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ContextLayer:
    """One hop.  ``admissions`` rows are (head, relation, tail, via)."""

    admissions: np.ndarray

    @property
    def edges(self) -> np.ndarray:
        if not len(self.admissions):
            return _EMPTY_EDGES
        return np.unique(self.admissions[:, :3], axis=0)

    def __len__(self):
        return len(self.edges)


@dataclass(eq=False)
class ContextGraph:
    head: int
    relation: int
    hops: int
    layers: list[ContextLayer] = field(default_factory=list)

    @property
    def union(self) -> np.ndarray:
        parts = [layer.edges for layer in self.layers if len(layer.admissions)]
        if not parts:
            return _EMPTY_EDGES
        return np.unique(np.concatenate(parts), axis=0)

    def entities(self) -> set[int]:
        u = self.union
        return {self.head} | set(u[:, 0].tolist()) | set(u[:, 2].tolist())


def score_generator(g: KnowledgeGraph, cnf, frontier_relation: int, candidate: int,
                    kind: MetricKind | None = None) -> RelevanceScore:
    """Singleton relevance of ``candidate`` for the inverse of the arriving relation.

    ``kind`` defaults to precision unless the CNF was trained on recall only.
    """
    if kind is None:
        kind = MetricKind.RECALL if cnf.config.metric_mode == "recall" else MetricKind.PRECISION
    target = g.inverse(frontier_relation)
    if kind is MetricKind.PRECISION:
        return rel_precision(g, {candidate}, target)
    return rel_recall(g, {candidate}, target)


def node_selector(cnf, g: KnowledgeGraph, e: int, frontier_relation: int) -> frozenset[int]:
    return cnf_generate(g, cnf, e, g.inverse(frontier_relation))


def context_pooling_step(
    g: KnowledgeGraph, frontier: Frontier, cnf, *, edge_cap: int | None = None
) -> tuple[ContextLayer, Frontier]:
    """Expand every frontier pair once; returns the layer and the next frontier."""
    chunks = []
    total = 0
    for e, via in sorted(frontier):
        selected = node_selector(cnf, g, e, via)
        if not selected:
            continue
        out = g.out_edges(e)
        keep = np.isin(out[:, 1], np.fromiter(selected, dtype=np.int64))
        if not keep.any():
            continue
        rows = np.column_stack([out[keep], np.full(int(keep.sum()), via, dtype=np.int64)])
        chunks.append(rows)
        total += len(rows)
        if edge_cap is not None and total > edge_cap:
            raise CapacityError(f"context layer exceeds the edge cap of {edge_cap}")
    if not chunks:
        return ContextLayer(np.zeros((0, 4), dtype=np.int64)), Frontier()
    admissions = np.unique(np.concatenate(chunks), axis=0)
    if edge_cap is not None and len(np.unique(admissions[:, :3], axis=0)) > edge_cap:
        raise CapacityError(f"context layer exceeds the edge cap of {edge_cap}")
    nxt = Frontier(zip(admissions[:, 2].tolist(), admissions[:, 1].tolist()))
    return ContextLayer(admissions), nxt


def build_context_graph(
    g: KnowledgeGraph, h: int, r: int, hops: int, cnf, *, edge_cap: int | None = None
) -> ContextGraph:
    """Layers 1..hops around ``(h, r, ?)``.

    The depth-0 frontier is ``{(h, inverse(r))}``, standing for the virtual
    edge ``(?, inverse(r), h)``.  Tail queries ``(?, r, t)`` should be passed
    as ``(t, inverse(r))``.
    """
    if hops < 1:
        raise ValueError("hops must be >= 1")
    h = g.check_entity(h)
    r = g.check_relation(r)
    cg = ContextGraph(h, r, hops)
    frontier = Frontier({(h, g.inverse(r))})
    empty = ContextLayer(np.zeros((0, 4), dtype=np.int64))
    for _ in range(hops):
        if not frontier:
            cg.layers.append(empty)
            continue
        layer, frontier = context_pooling_step(g, frontier, cnf, edge_cap=edge_cap)
        cg.layers.append(layer)
    return cg


def tail_query(g: KnowledgeGraph, t: int, r: int) -> tuple[int, int]:
    """Rewrite ``(?, r, t)`` as the head query ``(t, inverse(r), ?)``."""
    return t, g.inverse(r)


EXPORT_HEADER = "hop\thead\trelation\ttail"


def format_context_graph(cg: ContextGraph, vocab: Vocabulary, comments: list[str] = ()) -> str:
    lines = [f"# {c}" for c in comments] + [EXPORT_HEADER]
    rows = []
    for hop, layer in enumerate(cg.layers, start=1):
        for h, r, t in layer.edges.tolist():
            rows.append((hop, vocab.entity_name(h), vocab.relation_name(r), vocab.entity_name(t)))
    rows.sort()
    lines += [f"{hop}\t{h}\t{r}\t{t}" for hop, h, r, t in rows]
    return "\n".join(lines) + "\n"


def export_context_graph(cg: ContextGraph, path, vocab: Vocabulary, comments: list[str] = ()) -> None:
    Path(path).write_text(format_context_graph(cg, vocab, comments), encoding="utf-8")


# --------------------------------------------------------------------------
# invariant checks
# --------------------------------------------------------------------------


def check_context_graph(g: KnowledgeGraph, cg: ContextGraph, cnf) -> list[str]:
    """Return human-readable violations of the pooling contract (empty = valid)."""
    problems = []
    if len(cg.layers) != cg.hops:
        problems.append(f"expected {cg.hops} layers, found {len(cg.layers)}")
    union = cg.union
    missing = ~g.has_edges(union)
    if missing.any():
        problems.append(f"{int(missing.sum())} edges are not in the source graph")

    arrived = {(cg.head, g.inverse(cg.relation))}
    for hop, layer in enumerate(cg.layers, start=1):
        adm = layer.admissions
        for h, r, t, via in adm.tolist():
            if (h, via) not in arrived:
                problems.append(f"hop {hop}: edge {(h, r, t)} admitted by unknown frontier pair {(h, via)}")
        for h, via in sorted({(a[0], a[3]) for a in adm.tolist()}):
            allowed = node_selector(cnf, g, h, via)
            used = set(adm[(adm[:, 0] == h) & (adm[:, 3] == via), 1].tolist())
            if not used <= allowed:
                problems.append(f"hop {hop}: relations {sorted(used - allowed)} not selected at entity {h}")
        arrived = set(zip(adm[:, 2].tolist(), adm[:, 1].tolist()))

    # connectivity through union edges within `hops` steps
    reach = {cg.head}
    frontier = {cg.head}
    adjacency: dict[int, set[int]] = {}
    for h, _, t in union.tolist():
        adjacency.setdefault(h, set()).add(t)
    for _ in range(cg.hops):
        frontier = {t for e in frontier for t in adjacency.get(e, ())} - reach
        reach |= frontier
    unreachable = cg.entities() - reach
    if unreachable:
        problems.append(f"{len(unreachable)} entities unreachable from the head within {cg.hops} hops")
    return problems


def is_hop_monotone(smaller: ContextGraph, larger: ContextGraph) -> bool:
    a, b = smaller.union, larger.union
    if not len(a):
        return True
    keys_b = {tuple(x) for x in b.tolist()}
    return all(tuple(x) in keys_b for x in a.tolist())
