"""Reference implementations used only to check the engine.

Nothing here touches the graph indexes or the counting kernels: neighbourhoods
are rebuilt by scanning the stored triple list, and scores are plain loops.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityError
from .kg import KnowledgeGraph, Vocabulary, build_graph
from .relevance import MetricKind, RelevanceScore, rel_precision, rel_recall


def naive_neighborhoods(g: KnowledgeGraph) -> list[set[int]]:
    nbhd = [set() for _ in range(g.num_entities)]
    for h, r, _t in g.triples.tolist():
        nbhd[h].add(r)
    return nbhd


def naive_relevance(g: KnowledgeGraph, nr: Iterable[int], r: int, kind: MetricKind,
                    neighborhoods: list[set[int]] | None = None) -> RelevanceScore:
    nbhd = naive_neighborhoods(g) if neighborhoods is None else neighborhoods
    nr = set(nr)
    with_r = nr | {r}
    numer = 0
    denom = 0
    for e in range(g.num_entities):
        if with_r <= nbhd[e]:
            numer += 1
        if kind is MetricKind.PRECISION:
            if nr <= nbhd[e]:
                denom += 1
        elif r in nbhd[e]:
            denom += 1
    return RelevanceScore(numer, denom, kind)


def _passes(score: RelevanceScore, threshold) -> bool:
    if not score.defined:
        return False
    return Fraction(score.numerator, score.denominator) > Fraction(threshold)


def brute_force_cnf(g: KnowledgeGraph, r: int, cfg, size_guard: int = 20,
                    neighborhoods: list[set[int]] | None = None) -> set[frozenset[int]]:
    """Every subset of ``NR_r - {r}`` realised alongside ``r`` that passes ``cfg``.

    ``cfg`` needs ``metric_mode``, ``threshold_pre``, ``threshold_rec`` and
    ``set_sizes``; thresholds are not range-checked here.
    """
    nbhd = naive_neighborhoods(g) if neighborhoods is None else neighborhoods
    holders = [n for n in nbhd if r in n]
    pool = sorted(set().union(*holders) - {r}) if holders else []
    if len(pool) > size_guard:
        raise CapacityError(f"relation {r} has {len(pool)} neighbour relations (guard {size_guard})")
    lo, hi = cfg.set_sizes if cfg.set_sizes is not None else (0, len(pool) + 1)
    out = set()
    for size in range(lo, min(hi, len(pool) + 1)):
        for subset in itertools.combinations(pool, size):
            s = set(subset)
            if not any(s <= n for n in holders):
                continue
            ok = True
            if cfg.metric_mode in ("precision", "both"):
                ok &= _passes(naive_relevance(g, s, r, MetricKind.PRECISION, nbhd), cfg.threshold_pre)
            if ok and cfg.metric_mode in ("recall", "both"):
                ok &= _passes(naive_relevance(g, s, r, MetricKind.RECALL, nbhd), cfg.threshold_rec)
            if ok:
                out.add(frozenset(s))
    return out


# --------------------------------------------------------------------------
# synthetic graphs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    num_entities: int
    relation_probs: Mapping[int, float]
    seed: int = 0

    def __post_init__(self):
        for r, p in self.relation_probs.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability for relation {r} outside [0, 1]: {p}")


def generate_synthetic(spec: SyntheticSpec) -> KnowledgeGraph:
    """Independent Bernoulli neighbourhoods for ``e0..e{N-1}``.

    Each present relation gets one edge to a fresh sink entity, so sinks
    carry no neighbourhood of their own.  Inverse augmentation is off.
    """
    rels = sorted(spec.relation_probs)
    probs = np.array([spec.relation_probs[r] for r in rels], dtype=float)
    rng = np.random.default_rng(spec.seed)
    draws = rng.random((spec.num_entities, len(rels))) < probs[None, :]
    vocab = Vocabulary.from_names(
        (f"e{i}" for i in range(spec.num_entities)), (f"r{r}" for r in rels)
    )
    ent, rel = np.nonzero(draws)
    sinks = np.arange(len(ent)) + spec.num_entities
    for i in range(len(ent)):
        vocab.add_entity(f"s{i}")
    triples = np.column_stack([ent, rel, sinks]).astype(np.int64)
    return build_graph(triples, vocab, augment=False)


def correlated_fixture(num_entities: int = 2000, seed: int = 0) -> KnowledgeGraph:
    """Relations r0 and r1 always co-occur; r2 is independent (p = 0.5).

    Breaks the independence assumption on purpose.
    """
    rng = np.random.default_rng(seed)
    paired = rng.random(num_entities) < 0.5
    third = rng.random(num_entities) < 0.5
    draws = np.column_stack([paired, paired, third])
    vocab = Vocabulary.from_names((f"e{i}" for i in range(num_entities)), ("r0", "r1", "r2"))
    ent, rel = np.nonzero(draws)
    for i in range(len(ent)):
        vocab.add_entity(f"s{i}")
    triples = np.column_stack([ent, rel, np.arange(len(ent)) + num_entities]).astype(np.int64)
    return build_graph(triples, vocab, augment=False)


# --------------------------------------------------------------------------
# product identities under independence
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremSample:
    relations: tuple[int, ...]
    query: int
    lhs_rec: float
    rhs_rec: float
    lhs_pre_scaled: float
    rhs_pre: float

    @property
    def dev_rec(self) -> float:
        return abs(self.lhs_rec - self.rhs_rec)

    @property
    def dev_pre(self) -> float:
        return abs(self.lhs_pre_scaled - self.rhs_pre)


@dataclass
class TheoremReport:
    samples: list[TheoremSample] = field(default_factory=list)
    skipped: int = 0

    @property
    def max_dev_rec(self) -> float:
        return max((s.dev_rec for s in self.samples), default=0.0)

    @property
    def max_dev_pre(self) -> float:
        return max((s.dev_pre for s in self.samples), default=0.0)

    @property
    def mean_dev_rec(self) -> float:
        return float(np.mean([s.dev_rec for s in self.samples])) if self.samples else 0.0

    @property
    def mean_dev_pre(self) -> float:
        return float(np.mean([s.dev_pre for s in self.samples])) if self.samples else 0.0

    def to_text(self) -> str:
        return (
            f"samples={len(self.samples)} skipped={self.skipped}\n"
            f"recall identity:    max |dev| = {self.max_dev_rec:.6f}, mean = {self.mean_dev_rec:.6f}\n"
            f"precision identity: max |dev| = {self.max_dev_pre:.6f}, mean = {self.mean_dev_pre:.6f}\n"
        )

    def to_tsv(self) -> str:
        lines = ["relations\tquery\tlhs_rec\trhs_rec\tdev_rec\tlhs_pre_scaled\trhs_pre\tdev_pre"]
        for s in self.samples:
            lines.append(
                f"{','.join(map(str, s.relations))}\t{s.query}\t{s.lhs_rec:.8f}\t{s.rhs_rec:.8f}\t"
                f"{s.dev_rec:.8f}\t{s.lhs_pre_scaled:.8f}\t{s.rhs_pre:.8f}\t{s.dev_pre:.8f}"
            )
        return "\n".join(lines) + "\n"


def default_population(g: KnowledgeGraph) -> np.ndarray:
    """Entities that never occur as a tail: the source population of a synthetic graph."""
    is_tail = np.zeros(g.num_entities, dtype=bool)
    is_tail[g.forward[:, 2]] = True
    return np.flatnonzero(~is_tail)


def _sample_combos(num_relations: int, set_size: int, num_samples: int, seed: int):
    combos = [
        (rels, q)
        for q in range(num_relations)
        for rels in itertools.combinations([x for x in range(num_relations) if x != q], set_size)
    ]
    if len(combos) <= num_samples:
        return combos
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(len(combos), size=num_samples, replace=False))
    return [combos[i] for i in pick]


def verify_product_identity(g: KnowledgeGraph, set_size: int, num_samples: int, seed: int = 0,
                            population: np.ndarray | None = None) -> TheoremReport:
    """Compare joint scores with products of singleton scores.

    Recall: ``rec(S, r) = prod rec({s}, r)``.  Precision:
    ``pre(S, r) * P(r)^(|S|-1) = prod pre({s}, r)`` where ``P(r)`` is the share
    of the population having ``r``.
    """
    pop = default_population(g) if population is None else np.asarray(population)
    report = TheoremReport()
    if len(pop) == 0:
        return report
    for rels, q in _sample_combos(g.num_relations, set_size, num_samples, seed):
        joint_rec = rel_recall(g, rels, q)
        joint_pre = rel_precision(g, rels, q)
        singles_rec = [rel_recall(g, {x}, q) for x in rels]
        singles_pre = [rel_precision(g, {x}, q) for x in rels]
        scores = [joint_rec, joint_pre, *singles_rec, *singles_pre]
        if not all(s.defined for s in scores):
            report.skipped += 1
            continue
        p_q = np.isin(pop, g.entities_with(q)).sum() / len(pop)
        report.samples.append(TheoremSample(
            relations=tuple(rels),
            query=q,
            lhs_rec=joint_rec.value,
            rhs_rec=math.prod(s.value for s in singles_rec),
            lhs_pre_scaled=joint_pre.value * p_q ** (set_size - 1),
            rhs_pre=math.prod(s.value for s in singles_pre),
        ))
    return report


def verify_theorem1(g: KnowledgeGraph, num_samples: int, seed: int = 0,
                    population: np.ndarray | None = None) -> TheoremReport:
    if g.num_relations < 3:
        raise ValueError("need at least 3 relations")
    return verify_product_identity(g, 2, num_samples, seed, population)


def verify_eq5_extension(g: KnowledgeGraph, set_size: int, num_samples: int, seed: int = 0,
                         population: np.ndarray | None = None) -> TheoremReport:
    if g.num_relations <= set_size:
        raise ValueError("need more relations than the set size")
    return verify_product_identity(g, set_size, num_samples, seed, population)


def binomial_tolerance(p: float, n: int, sigmas: float = 3.0) -> float:
    return sigmas * math.sqrt(p * (1 - p) / n)


def random_graph(rng: np.random.Generator, max_entities: int = 30, max_relations: int = 8,
                 augment: bool = True, density: float = 1.5) -> KnowledgeGraph:
    """Small uniform random multigraph for oracle comparisons."""
    n_ent = int(rng.integers(2, max_entities + 1))
    n_rel = int(rng.integers(1, max_relations + 1))
    n_tri = int(rng.integers(0, int(density * n_ent) + 2))
    triples = np.column_stack([
        rng.integers(0, n_ent, n_tri),
        rng.integers(0, n_rel, n_tri),
        rng.integers(0, n_ent, n_tri),
    ]).astype(np.int64)
    vocab = Vocabulary.from_names((f"e{i}" for i in range(n_ent)), (f"r{j}" for j in range(n_rel)))
    return build_graph(triples, vocab, augment=augment)
