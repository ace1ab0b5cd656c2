"""Triple loading and the inverse-augmented, index-backed graph store.

Relation ids ``0..R-1`` are forward relations and ``R..2R-1`` their
inverses, so ``inverse(r) = (r + R) mod 2R``.  Entity ids follow first
appearance in the input.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from functools import cached_property
from os import PathLike
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import ConstructionError, InductiveContractError, ParseError, UnknownNameError

INVERSE_SUFFIX = "^-1"


@dataclass
class Vocabulary:
    entities: list[str] = field(default_factory=list)
    relations: list[str] = field(default_factory=list)
    entity_index: dict[str, int] = field(default_factory=dict)
    relation_index: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_names(cls, entities: Iterable[str] = (), relations: Iterable[str] = ()):
        vocab = cls()
        for name in entities:
            vocab.add_entity(name)
        for name in relations:
            vocab.add_relation(name)
        return vocab

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def add_entity(self, name: str) -> int:
        idx = self.entity_index.get(name)
        if idx is None:
            idx = len(self.entities)
            self.entity_index[name] = idx
            self.entities.append(name)
        return idx

    def add_relation(self, name: str) -> int:
        idx = self.relation_index.get(name)
        if idx is None:
            idx = len(self.relations)
            self.relation_index[name] = idx
            self.relations.append(name)
        return idx

    def copy(self) -> "Vocabulary":
        return Vocabulary(
            list(self.entities), list(self.relations),
            dict(self.entity_index), dict(self.relation_index),
        )

    def relations_only(self) -> "Vocabulary":
        """Same relation ids, no entities (for loading an inductive test graph)."""
        return Vocabulary.from_names((), self.relations)

    def entity_id(self, name: str) -> int:
        try:
            return self.entity_index[name]
        except KeyError:
            raise UnknownNameError(
                "entity", name, difflib.get_close_matches(name, self.entities, n=3)
            ) from None

    def relation_id(self, name: str) -> int:
        """Resolve a relation name; ``name^-1`` maps to the inverse id."""
        if name in self.relation_index:
            return self.relation_index[name]
        if name.endswith(INVERSE_SUFFIX):
            base = name[: -len(INVERSE_SUFFIX)]
            if base in self.relation_index:
                return self.relation_index[base] + self.num_relations
        known = self.relations + [r + INVERSE_SUFFIX for r in self.relations]
        raise UnknownNameError("relation", name, difflib.get_close_matches(name, known, n=3))

    def relation_name(self, rid: int) -> str:
        n = self.num_relations
        if 0 <= rid < n:
            return self.relations[rid]
        if n <= rid < 2 * n:
            return self.relations[rid - n] + INVERSE_SUFFIX
        raise UnknownNameError("relation", rid)

    def entity_name(self, eid: int) -> str:
        if 0 <= eid < len(self.entities):
            return self.entities[eid]
        raise UnknownNameError("entity", eid)


def load_triples(
    paths: str | PathLike | Sequence[str | PathLike],
    vocab: Vocabulary | None = None,
) -> tuple[np.ndarray, Vocabulary]:
    """Read GRAIL-style ``head<TAB>relation<TAB>tail`` files.

    Several paths are read as one graph.  Returns an ``(n, 3)`` int64 array
    of distinct forward triples in first-appearance order and the vocabulary
    used.  A supplied vocabulary is copied, never mutated; its relation set is
    treated as closed, while unseen entities are appended.
    """
    if isinstance(paths, (str, PathLike)):
        paths = [paths]
    fixed_relations = vocab is not None
    vocab = Vocabulary() if vocab is None else vocab.copy()
    seen: dict[tuple[int, int, int], None] = {}
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\r\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ParseError(path, line_no, f"expected 3 tab-separated fields, got {len(parts)}")
                head, rel, tail = parts
                if rel.endswith(INVERSE_SUFFIX):
                    raise ParseError(path, line_no, f"relation name may not end with {INVERSE_SUFFIX!r}")
                if fixed_relations:
                    rid = vocab.relation_index.get(rel)
                    if rid is None:
                        raise InductiveContractError(
                            f"{path}:{line_no}: relation {rel!r} is not in the training vocabulary"
                        )
                else:
                    rid = vocab.add_relation(rel)
                triple = (vocab.add_entity(head), rid, vocab.add_entity(tail))
                seen.setdefault(triple)
    triples = np.array(list(seen), dtype=np.int64).reshape(-1, 3)
    return triples, vocab


def inverse_relation(r: int, num_relations: int) -> int:
    return (r + num_relations) % (2 * num_relations)


@dataclass(frozen=True)
class GraphStats:
    num_relations: int
    num_entities: int
    num_triples: int


class KnowledgeGraph:
    """Immutable triple store with neighbour-relation indexes.

    Public arrays are read-only.  ``triples`` holds the stored (augmented)
    edge set sorted by (head, relation, tail); ``forward`` the deduplicated
    input triples in load order.
    """

    def __init__(self, forward: np.ndarray, vocab: Vocabulary, augment: bool = True):
        self.vocab = vocab
        self.augmented = augment
        self.num_entities = vocab.num_entities
        self.num_relations = vocab.num_relations
        self.num_relation_ids = 2 * self.num_relations

        forward = np.asarray(forward, dtype=np.int64).reshape(-1, 3)
        if len(forward):
            bad_e = (forward[:, [0, 2]] < 0) | (forward[:, [0, 2]] >= self.num_entities)
            bad_r = (forward[:, 1] < 0) | (forward[:, 1] >= self.num_relations)
            if bad_e.any() or bad_r.any():
                row = int(np.flatnonzero(bad_e.any(axis=1) | bad_r)[0])
                raise ConstructionError(f"triple {forward[row].tolist()} has ids outside the vocabulary")
        # set semantics, keeping first-appearance order
        _, first = np.unique(forward, axis=0, return_index=True)
        self.forward = _readonly(forward[np.sort(first)])

        stored = self.forward
        if augment and len(stored):
            inv = stored[:, [2, 1, 0]].copy()
            inv[:, 1] += self.num_relations
            stored = np.concatenate([stored, inv])
        stored = np.unique(stored, axis=0) if len(stored) else stored.reshape(0, 3)
        self.triples = _readonly(stored)

        heads = stored[:, 0]
        self._adj_indptr = _readonly(_indptr(heads, self.num_entities))

        pairs = np.unique(stored[:, :2], axis=0) if len(stored) else stored[:, :2]
        self.nr_indptr = _readonly(_indptr(pairs[:, 0], self.num_entities))
        self.nr_indices = _readonly(pairs[:, 1].copy())

        by_rel = pairs[np.lexsort((pairs[:, 0], pairs[:, 1]))]
        self.re_indptr = _readonly(_indptr(by_rel[:, 1], self.num_relation_ids))
        self.re_indices = _readonly(by_rel[:, 0].copy())

    # -- basic lookups -----------------------------------------------------

    def check_entity(self, e: int) -> int:
        e = int(e)
        if not 0 <= e < self.num_entities:
            raise UnknownNameError("entity", e)
        return e

    def check_relation(self, r: int) -> int:
        r = int(r)
        if not 0 <= r < self.num_relation_ids:
            raise UnknownNameError("relation", r)
        return r

    def inverse(self, r: int) -> int:
        return inverse_relation(r, self.num_relations)

    def nr(self, e: int) -> np.ndarray:
        """Sorted neighbour relations of entity ``e`` (index view)."""
        e = self.check_entity(e)
        return self.nr_indices[self.nr_indptr[e]:self.nr_indptr[e + 1]]

    def entities_with(self, r: int) -> np.ndarray:
        """Sorted entities whose neighbourhood contains ``r``."""
        r = self.check_relation(r)
        return self.re_indices[self.re_indptr[r]:self.re_indptr[r + 1]]

    def out_edges(self, e: int) -> np.ndarray:
        e = self.check_entity(e)
        return self.triples[self._adj_indptr[e]:self._adj_indptr[e + 1]]

    def tails(self, e: int, r: int) -> np.ndarray:
        """Sorted tails of edges ``(e, r, *)``."""
        edges = self.out_edges(e)
        lo, hi = np.searchsorted(edges[:, 1], [r, r + 1])
        return edges[lo:hi, 2]

    def has_edges(self, edges: np.ndarray) -> np.ndarray:
        """Boolean mask: which rows of ``edges`` are stored triples."""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 3)
        if not len(self.triples) or not len(edges):
            return np.zeros(len(edges), dtype=bool)
        keys = self._edge_keys
        probe = _triple_keys(edges, self.num_entities, self.num_relation_ids)
        pos = np.clip(np.searchsorted(keys, probe), 0, len(keys) - 1)
        return keys[pos] == probe

    @cached_property
    def _edge_keys(self) -> np.ndarray:
        return _triple_keys(self.triples, self.num_entities, self.num_relation_ids)

    # -- neighbourhood groups ---------------------------------------------

    @cached_property
    def groups(self) -> "NeighbourhoodGroups":
        """Distinct neighbourhoods with multiplicities, incl. the empty one."""
        return NeighbourhoodGroups.from_graph(self)

    def __repr__(self):
        return (
            f"KnowledgeGraph(entities={self.num_entities}, relations={self.num_relations}, "
            f"triples={len(self.triples)}, augmented={self.augmented})"
        )


@dataclass(frozen=True)
class NeighbourhoodGroups:
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    entity_group: np.ndarray
    num_ids: int

    @classmethod
    def from_graph(cls, g: KnowledgeGraph) -> "NeighbourhoodGroups":
        bits = kernels.to_bitsets(g.nr_indptr, g.nr_indices, g.num_relation_ids)
        if g.num_entities == 0:
            empty = np.zeros(0, np.int64)
            return cls(np.zeros(1, np.int64), empty, empty, empty, g.num_relation_ids)
        uniq, first, inverse, counts = np.unique(
            bits, axis=0, return_index=True, return_inverse=True, return_counts=True
        )
        sizes = np.diff(g.nr_indptr)[first]
        indptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        indices = np.concatenate(
            [g.nr_indices[g.nr_indptr[e]:g.nr_indptr[e + 1]] for e in first]
        ).astype(np.int64) if len(first) else np.zeros(0, np.int64)
        return cls(indptr, indices, counts.astype(np.int64), inverse.reshape(-1).astype(np.int64),
                   g.num_relation_ids)

    def __len__(self):
        return len(self.weights)

    def row(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @cached_property
    def bitsets(self) -> np.ndarray:
        return kernels.to_bitsets(self.indptr, self.indices, self.num_ids)

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.indptr)


def build_graph(
    triples: np.ndarray,
    vocab: Vocabulary | None = None,
    *,
    augment: bool = True,
) -> KnowledgeGraph:
    """Build the indexed graph; without a vocabulary, ids name themselves."""
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    if vocab is None:
        if len(triples) and triples.min() < 0:
            raise ConstructionError("negative ids")
        n_ent = int(max(triples[:, 0].max(), triples[:, 2].max()) + 1) if len(triples) else 0
        n_rel = int(triples[:, 1].max() + 1) if len(triples) else 0
        vocab = Vocabulary.from_names((str(i) for i in range(n_ent)), (str(i) for i in range(n_rel)))
    return KnowledgeGraph(triples, vocab, augment=augment)


def load_graph(paths, vocab: Vocabulary | None = None, *, augment: bool = True) -> KnowledgeGraph:
    triples, vocab = load_triples(paths, vocab)
    return KnowledgeGraph(triples, vocab, augment=augment)


def neighbor_relations_of_entity(g: KnowledgeGraph, e: int) -> frozenset[int]:
    return frozenset(g.nr(e).tolist())


def neighbor_relations_of_relation(g: KnowledgeGraph, r: int) -> frozenset[int]:
    """Relations sharing at least one entity neighbourhood with ``r`` (r included)."""
    ents = g.entities_with(r)
    if not len(ents):
        return frozenset()
    rows = [g.nr_indices[g.nr_indptr[e]:g.nr_indptr[e + 1]] for e in ents]
    return frozenset(np.unique(np.concatenate(rows)).tolist())


def graph_stats(g: KnowledgeGraph) -> GraphStats:
    """Forward-only counts of relations and entities that occur in triples."""
    f = g.forward
    if not len(f):
        return GraphStats(0, 0, 0)
    return GraphStats(
        num_relations=len(np.unique(f[:, 1])),
        num_entities=len(np.unique(f[:, [0, 2]])),
        num_triples=len(f),
    )


def _indptr(sorted_keys: np.ndarray, n: int) -> np.ndarray:
    counts = np.bincount(sorted_keys, minlength=n) if len(sorted_keys) else np.zeros(n, np.int64)
    return np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)


def _triple_keys(t: np.ndarray, n_ent: int, n_rel: int) -> np.ndarray:
    return (t[:, 0] * n_rel + t[:, 1]) * max(n_ent, 1) + t[:, 2]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a
