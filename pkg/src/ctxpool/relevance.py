"""Neighbourhood precision and recall by exact entity counting."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import kernels
from .kg import KnowledgeGraph


class MetricKind(enum.Enum):
    PRECISION = "precision"
    RECALL = "recall"


@dataclass(frozen=True)
class RelevanceScore:
    """An exact count ratio; undefined when the denominator is zero."""

    numerator: int
    denominator: int
    kind: MetricKind | None = None

    @property
    def defined(self) -> bool:
        return self.denominator > 0

    @property
    def value(self) -> float | None:
        return self.numerator / self.denominator if self.defined else None

    def as_fraction(self) -> Fraction | None:
        return Fraction(self.numerator, self.denominator) if self.defined else None

    def exceeds(self, threshold) -> bool:
        """Strict ``score > threshold``; undefined scores never pass."""
        if not self.defined:
            return False
        t = as_fraction(threshold)
        return self.numerator * t.denominator > t.numerator * self.denominator

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"


def as_fraction(value) -> Fraction:
    """Thresholds are taken at their decimal face value (``0.01`` is 1/100)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def passes(numer, denom, threshold) -> np.ndarray:
    """Vectorised strict test ``numer/denom > threshold`` with ``denom > 0``."""
    t = as_fraction(threshold)
    numer = np.asarray(numer, dtype=np.int64)
    denom = np.asarray(denom, dtype=np.int64)
    if t.denominator > 10**12 or abs(t.numerator) > 10**12:
        exact = [n * t.denominator > t.numerator * d for n, d in zip(numer.tolist(), denom.tolist())]
        return (denom > 0) & np.array(exact, dtype=bool).reshape(numer.shape)
    return (denom > 0) & (numer * t.denominator > t.numerator * denom)


def count_containing(g: KnowledgeGraph, relations: Iterable[int]) -> int:
    """Number of entities whose neighbourhood includes every given relation."""
    rels = sorted({g.check_relation(r) for r in relations})
    if not rels:
        return g.num_entities
    lists = sorted((g.entities_with(r) for r in rels), key=len)
    common = lists[0]
    for other in lists[1:]:
        if not len(common):
            break
        common = np.intersect1d(common, other, assume_unique=True)
    return int(len(common))


def count_containing_many(g: KnowledgeGraph, sets: list[Iterable[int]], backend=None) -> np.ndarray:
    """Batch form of :func:`count_containing` over bitset groups."""
    groups = g.groups
    queries = np.zeros((len(sets), groups.bitsets.shape[1]), dtype=np.uint64)
    for i, s in enumerate(sets):
        for r in s:
            r = g.check_relation(r)
            queries[i, r // 64] |= np.uint64(1) << np.uint64(r % 64)
    if not len(groups):
        return np.where(queries.any(axis=1), 0, g.num_entities).astype(np.int64)
    return kernels.count_supersets(groups.bitsets, groups.weights, queries, backend=backend)


def rel_precision(g: KnowledgeGraph, nr: Iterable[int], r: int) -> RelevanceScore:
    nr = set(nr)
    numer = count_containing(g, nr | {r})
    return RelevanceScore(numer, count_containing(g, nr), MetricKind.PRECISION)


def rel_recall(g: KnowledgeGraph, nr: Iterable[int], r: int) -> RelevanceScore:
    nr = set(nr)
    numer = count_containing(g, nr | {r})
    return RelevanceScore(numer, count_containing(g, {r}), MetricKind.RECALL)


def relevance(g: KnowledgeGraph, nr: Iterable[int], r: int, kind: MetricKind) -> RelevanceScore:
    if kind is MetricKind.PRECISION:
        return rel_precision(g, nr, r)
    return rel_recall(g, nr, r)


def jaccard_similarity(s1: Iterable[int], s2: Iterable[int]) -> Fraction:
    a, b = set(s1), set(s2)
    union = len(a | b)
    if union == 0:
        return Fraction(0)
    return Fraction(len(a & b), union)
