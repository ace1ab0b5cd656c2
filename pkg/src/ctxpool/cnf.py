"""Context neighbour families: training and query-time selection.

Two trainers are provided.  :func:`cnf_train_exhaustive` scores every
relation set realised inside an observed neighbourhood; it reduces to
counting, for each size ``k``, how many entities contain each ``k``- and
``(k+1)``-subset.  :func:`cnf_train_optimized` scores single relations only,
from one relation co-occurrence matrix.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import kernels
from .errors import CapacityError, ConfigError
from .kg import KnowledgeGraph
from .relevance import MetricKind, RelevanceScore, as_fraction, passes

log = logging.getLogger(__name__)

METRIC_MODES = ("precision", "recall", "both")
ALGORITHMS = ("exhaustive", "optimized")


@dataclass(frozen=True)
class TrainConfig:
    metric_mode: str = "both"
    threshold_pre: Fraction = Fraction(1, 100)
    threshold_rec: Fraction = Fraction(1, 100)
    set_sizes: tuple[int, int] | None = None
    algorithm: str = "optimized"
    size_cap: int = 20

    def __post_init__(self):
        if self.metric_mode not in METRIC_MODES:
            raise ConfigError(f"metric_mode must be one of {METRIC_MODES}, got {self.metric_mode!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        for name in ("threshold_pre", "threshold_rec"):
            value = as_fraction(getattr(self, name))
            if not 0 < value < 1:
                raise ConfigError(f"{name} must lie strictly between 0 and 1, got {value}")
            object.__setattr__(self, name, value)
        if self.set_sizes is not None:
            if self.algorithm != "exhaustive":
                raise ConfigError("set_sizes only applies to the exhaustive algorithm")
            lo, hi = (int(v) for v in self.set_sizes)
            if lo < 0 or hi <= lo:
                raise ConfigError(f"set_sizes must be a non-empty range [lo, hi), got {self.set_sizes}")
            object.__setattr__(self, "set_sizes", (lo, hi))

    @property
    def uses_precision(self) -> bool:
        return self.metric_mode in ("precision", "both")

    @property
    def uses_recall(self) -> bool:
        return self.metric_mode in ("recall", "both")

    def accept(self, numer, den_pre, den_rec) -> np.ndarray:
        ok = np.ones(np.shape(numer), dtype=bool)
        if self.uses_precision:
            ok &= passes(numer, den_pre, self.threshold_pre)
        if self.uses_recall:
            ok &= passes(numer, den_rec, self.threshold_rec)
        return ok

    def items(self) -> list[tuple[str, str]]:
        sizes = "all" if self.set_sizes is None else f"{self.set_sizes[0]}:{self.set_sizes[1]}"
        return [
            ("algorithm", self.algorithm),
            ("metric", self.metric_mode),
            ("threshold_pre", format_threshold(self.threshold_pre)),
            ("threshold_rec", format_threshold(self.threshold_rec)),
            ("set_sizes", sizes),
            ("size_cap", str(self.size_cap)),
        ]


def format_threshold(t: Fraction) -> str:
    as_float = float(t)
    return repr(as_float) if Fraction(repr(as_float)) == t else f"{t.numerator}/{t.denominator}"


def parse_set_sizes(text: str | None) -> tuple[int, int] | None:
    if text is None or text in ("", "all"):
        return None
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise ConfigError(f"set sizes must look like LO:HI, got {text!r}") from None


# --------------------------------------------------------------------------
# trained structures
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyMember:
    relations: tuple[int, ...]
    precision: RelevanceScore
    recall: RelevanceScore


@dataclass(frozen=True, eq=False)
class SetFamily:
    """Admitted relation sets for one query relation, in canonical order.

    ``members`` is ``(n, width)`` with rows padded by -1; rows are ordered by
    size (largest first), then lexicographically.
    """

    members: np.ndarray
    sizes: np.ndarray
    numer: np.ndarray
    den_pre: np.ndarray
    den_rec: np.ndarray

    @classmethod
    def empty(cls) -> "SetFamily":
        z = np.zeros(0, np.int64)
        return cls(np.zeros((0, 1), np.int64), z, z, z, z)

    @classmethod
    def canonical(cls, members, sizes, numer, den_pre, den_rec) -> "SetFamily":
        members = np.asarray(members, np.int64)
        sizes = np.asarray(sizes, np.int64)
        keys = [members[:, j] for j in range(members.shape[1] - 1, -1, -1)] + [-sizes]
        order = np.lexsort(keys) if len(sizes) else np.zeros(0, np.int64)
        return cls(members[order], sizes[order], np.asarray(numer, np.int64)[order],
                   np.asarray(den_pre, np.int64)[order], np.asarray(den_rec, np.int64)[order])

    def __len__(self):
        return len(self.sizes)

    def sets(self) -> list[tuple[int, ...]]:
        return [tuple(row[:n].tolist()) for row, n in zip(self.members, self.sizes)]

    def __iter__(self) -> Iterator[FamilyMember]:
        for i, rels in enumerate(self.sets()):
            yield FamilyMember(
                rels,
                RelevanceScore(int(self.numer[i]), int(self.den_pre[i]), MetricKind.PRECISION),
                RelevanceScore(int(self.numer[i]), int(self.den_rec[i]), MetricKind.RECALL),
            )


@dataclass(frozen=True, eq=False)
class Singletons:
    neighbors: np.ndarray
    numer: np.ndarray
    den_pre: np.ndarray
    den_rec: np.ndarray

    @classmethod
    def empty(cls) -> "Singletons":
        z = np.zeros(0, np.int64)
        return cls(z, z, z, z)

    def __len__(self):
        return len(self.neighbors)

    def __iter__(self) -> Iterator[FamilyMember]:
        for i, r in enumerate(self.neighbors.tolist()):
            yield FamilyMember(
                (r,),
                RelevanceScore(int(self.numer[i]), int(self.den_pre[i]), MetricKind.PRECISION),
                RelevanceScore(int(self.numer[i]), int(self.den_rec[i]), MetricKind.RECALL),
            )


class _CNFBase:
    config: TrainConfig
    num_relations: int

    def records(self) -> list[tuple[int, tuple[int, ...], int, int, int]]:
        out = []
        for r in sorted(self.relations()):
            for m in self[r]:
                out.append((r, m.relations, m.precision.numerator,
                            m.precision.denominator, m.recall.denominator))
        return out

    def num_members(self) -> int:
        return sum(len(v) for v in self._table().values())

    def relations(self) -> list[int]:
        table = self._table()
        return [r for r in table if len(table[r])]

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return (self.config == other.config and self.num_relations == other.num_relations
                and self.records() == other.records())

    def as_sets(self) -> dict[int, set[frozenset[int]]]:
        return {r: {frozenset(m.relations) for m in self[r]} for r in self.relations()}


@dataclass(eq=False)
class ExhaustiveCNF(_CNFBase):
    config: TrainConfig
    num_relations: int
    families: dict[int, SetFamily] = field(default_factory=dict)

    algorithm = "exhaustive"

    def _table(self):
        return self.families

    def __getitem__(self, r: int) -> SetFamily:
        return self.families.get(int(r), _EMPTY_FAMILY)

    def stratum(self, size: int) -> dict[int, set[frozenset[int]]]:
        """Members of a given set size, per relation (empty entries dropped)."""
        out = {}
        for r in self.relations():
            fam = self.families[r]
            rows = {frozenset(s) for s in fam.sets() if len(s) == size}
            if rows:
                out[r] = rows
        return out


@dataclass(eq=False)
class OptimizedCNF(_CNFBase):
    config: TrainConfig
    num_relations: int
    entries: dict[int, Singletons] = field(default_factory=dict)

    algorithm = "optimized"

    def _table(self):
        return self.entries

    def __getitem__(self, r: int) -> Singletons:
        return self.entries.get(int(r), _EMPTY_SINGLETONS)


_EMPTY_FAMILY = SetFamily.empty()
_EMPTY_SINGLETONS = Singletons.empty()


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------


def cnf_train_exhaustive(g: KnowledgeGraph, cfg: TrainConfig, backend=None) -> ExhaustiveCNF:
    """Score every relation set realised next to each relation.

    For query relation ``r`` a candidate ``S`` is admitted when ``S + {r}``
    sits inside some entity neighbourhood and the active scores exceed their
    thresholds.  Entities containing ``S + {r}`` are exactly the counts of the
    ``(k+1)``-subset, so each size only needs two subset-count tables.
    """
    if cfg.algorithm != "exhaustive":
        raise ConfigError("cnf_train_exhaustive needs algorithm='exhaustive'")
    groups = g.groups
    sizes = groups.sizes
    largest = int(sizes.max()) if len(sizes) else 0
    if cfg.set_sizes is None:
        wide = np.flatnonzero(sizes - 1 > cfg.size_cap)
        if len(wide):
            rel = int(groups.row(int(wide[0]))[0])
            raise CapacityError(
                f"neighbourhood of relation {g.vocab.relation_name(rel)!r} has "
                f"{int(sizes[wide[0]]) - 1} other relations (cap {cfg.size_cap}); "
                "set a candidate size range such as --set-sizes 4:6"
            )
        lo, hi = 0, largest
    else:
        lo, hi = cfg.set_sizes
        hi = min(hi, largest)
    width = max(1, hi - 1)
    single = np.diff(g.re_indptr).astype(np.int64)
    parts: dict[int, list] = defaultdict(list)

    subset_counts = None
    for k in range(lo, hi):
        if subset_counts is None:
            subset_counts = kernels.count_ksubsets(
                groups.indptr, groups.indices, groups.weights, groups.num_ids, k, backend)
        s_codes, s_counts, s_codec = subset_counts
        t_codes, t_counts, t_codec = kernels.count_ksubsets(
            groups.indptr, groups.indices, groups.weights, groups.num_ids, k + 1, backend)
        subset_counts = (t_codes, t_counts, t_codec)
        if not len(t_codes):
            break
        t_rows = t_codec.decode(t_codes)
        for j in range(k + 1):
            query = t_rows[:, j]
            cand = np.delete(t_rows, j, axis=1)
            pos = np.searchsorted(s_codes, s_codec.encode(cand))
            den_pre = s_counts[pos]
            den_rec = single[query]
            keep = cfg.accept(t_counts, den_pre, den_rec)
            if not keep.any():
                continue
            padded = np.full((int(keep.sum()), width), -1, dtype=np.int64)
            padded[:, :k] = cand[keep]
            parts["query"].append(query[keep])
            parts["members"].append(padded)
            parts["sizes"].append(np.full(len(padded), k, np.int64))
            parts["numer"].append(t_counts[keep])
            parts["den_pre"].append(den_pre[keep])
            parts["den_rec"].append(den_rec[keep])
        log.debug("exhaustive size %d: %d realised supersets", k, len(t_codes))

    families = {}
    if parts:
        cols = {key: np.concatenate(val) for key, val in parts.items()}
        order = np.argsort(cols["query"], kind="stable")
        cols = {key: val[order] for key, val in cols.items()}
        bounds = np.flatnonzero(np.diff(cols["query"])) + 1
        for sl in np.split(np.arange(len(order)), bounds):
            r = int(cols["query"][sl[0]])
            families[r] = SetFamily.canonical(
                cols["members"][sl], cols["sizes"][sl], cols["numer"][sl],
                cols["den_pre"][sl], cols["den_rec"][sl],
            )
    return ExhaustiveCNF(cfg, g.num_relations, families)


def cnf_train_optimized(g: KnowledgeGraph, cfg: TrainConfig, backend=None) -> OptimizedCNF:
    """Keep each single neighbour relation whose own scores pass."""
    if cfg.algorithm != "optimized":
        raise ConfigError("cnf_train_optimized needs algorithm='optimized'")
    groups = g.groups
    co = kernels.cooccurrence(groups.indptr, groups.indices, groups.weights, groups.num_ids, backend)
    diag = np.diag(co).copy()
    entries = {}
    for r in range(groups.num_ids):
        col = co[:, r]
        cand = np.flatnonzero(col)
        cand = cand[cand != r]
        if not len(cand):
            continue
        numer = col[cand]
        den_pre = diag[cand]
        den_rec = np.full(len(cand), diag[r], dtype=np.int64)
        keep = cfg.accept(numer, den_pre, den_rec)
        if keep.any():
            entries[r] = Singletons(cand[keep].astype(np.int64), numer[keep], den_pre[keep], den_rec[keep])
    return OptimizedCNF(cfg, g.num_relations, entries)


def train_cnf(g: KnowledgeGraph, cfg: TrainConfig, backend=None):
    if cfg.algorithm == "exhaustive":
        return cnf_train_exhaustive(g, cfg, backend)
    return cnf_train_optimized(g, cfg, backend)


# --------------------------------------------------------------------------
# query-time selection
# --------------------------------------------------------------------------


def best_member(g: KnowledgeGraph, cnf: ExhaustiveCNF, h: int, r: int) -> int | None:
    """Index into ``cnf[r]`` of the member most Jaccard-similar to ``NR_h``.

    Ties go to the first member in canonical order (largest, then
    lexicographically smallest).  ``None`` when no member overlaps ``NR_h``.
    """
    _check_compatible(g, cnf)
    nr_h = g.nr(h)
    fam = cnf[r]
    if not len(fam) or not len(nr_h):
        return None
    lut = np.zeros(g.num_relation_ids + 1, dtype=bool)
    lut[nr_h] = True
    inter = lut[fam.members].sum(axis=1)
    union = fam.sizes + len(nr_h) - inter
    sim = np.divide(inter, union, out=np.zeros(len(inter)), where=union > 0)
    best = int(np.argmax(sim))
    return best if sim[best] > 0 else None


def cnf_generate_exhaustive(g: KnowledgeGraph, cnf: ExhaustiveCNF, h: int, r: int) -> frozenset[int]:
    best = best_member(g, cnf, h, r)
    if best is None:
        return frozenset()
    fam = cnf[r]
    row = fam.members[best, : fam.sizes[best]]
    return frozenset(np.intersect1d(row, g.nr(h)).tolist())


def cnf_generate_optimized(g: KnowledgeGraph, cnf: OptimizedCNF, h: int, r: int) -> frozenset[int]:
    _check_compatible(g, cnf)
    nr_h = g.nr(h)
    return frozenset(np.intersect1d(nr_h, cnf[r].neighbors, assume_unique=True).tolist())


def cnf_generate(g: KnowledgeGraph, cnf, h: int, r: int) -> frozenset[int]:
    if isinstance(cnf, ExhaustiveCNF):
        return cnf_generate_exhaustive(g, cnf, h, r)
    return cnf_generate_optimized(g, cnf, h, r)


def _check_compatible(g: KnowledgeGraph, cnf) -> None:
    if cnf.num_relations != g.num_relations:
        raise ConfigError(
            f"CNF covers {cnf.num_relations} relations but the graph has {g.num_relations}; "
            "load the graph with the training relation vocabulary"
        )
