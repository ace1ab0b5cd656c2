"""Oracle suites driven by ``ctxpool verify`` and the acceptance tests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .cnf import TrainConfig, cnf_train_exhaustive, cnf_train_optimized
from .oracle import (
    SyntheticSpec,
    TheoremReport,
    brute_force_cnf,
    correlated_fixture,
    generate_synthetic,
    naive_neighborhoods,
    naive_relevance,
    random_graph,
    verify_theorem1,
)
from .relevance import MetricKind, rel_precision, rel_recall

THRESHOLD_GRID = (0.1, 0.3, 0.5, 0.9)
SIZE_RANGES = ((1, 2), (1, 4), (4, 6))


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, msg: str, limit: int = 20) -> None:
        if len(self.failures) < limit:
            self.failures.append(msg)
        elif len(self.failures) == limit:
            self.failures.append("... further failures suppressed")

    def to_text(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        lines = [f"{self.name}: {status} ({self.checks} checks, {len(self.failures)} failures)"]
        lines += [f"  note: {n}" for n in self.notes]
        lines += [f"  {f}" for f in self.failures]
        return "\n".join(lines) + "\n"


def metrics_suite(seeds: int = 200, queries: int = 1000, max_entities: int = 50,
                  max_relations: int = 8, seed: int = 0) -> SuiteResult:
    """Indexed precision/recall against the naive scan, exact rationals."""
    res = SuiteResult("metrics")
    for s in range(seeds):
        rng = np.random.default_rng([seed, s])
        g = random_graph(rng, max_entities=max_entities, max_relations=max_relations, density=2.0)
        nbhd = naive_neighborhoods(g)
        ids = g.num_relation_ids
        for _ in range(queries):
            r = int(rng.integers(ids))
            if rng.random() < 0.5 and any(nbhd):
                # draw from a real neighbourhood so most queries are non-trivial
                pool = sorted(nbhd[int(rng.integers(len(nbhd)))])
            else:
                pool = list(range(ids))
            k = int(rng.integers(0, min(len(pool), 4) + 1))
            nr = rng.choice(pool, size=k, replace=False).tolist() if k else []
            for kind, fn in ((MetricKind.PRECISION, rel_precision), (MetricKind.RECALL, rel_recall)):
                got = fn(g, nr, r)
                want = naive_relevance(g, nr, r, kind, nbhd)
                res.checks += 1
                if (got.numerator, got.denominator) != (want.numerator, want.denominator):
                    res.fail(f"seed {s}: {kind.value}({sorted(nr)}, {r}) = {got}, oracle {want}")
    return res


def cnf_suite(seeds: int = 200, max_entities: int = 30, max_relations: int = 5,
              thresholds=THRESHOLD_GRID, size_ranges=SIZE_RANGES, seed: int = 0,
              backend=None) -> SuiteResult:
    """Exhaustive training against brute force; optimized against the singleton stratum.

    Every graph runs the full threshold x size-range grid.  Odd seeds use a
    denser graph so the larger size ranges see realised sets.
    """
    res = SuiteResult("cnf")
    modes = ("both", "precision", "recall")
    nonempty = 0
    for s in range(seeds):
        rng = np.random.default_rng([seed, s])
        density = 4.0 if s % 2 else 1.5
        g = random_graph(rng, max_entities=max_entities, max_relations=max_relations, density=density)
        nbhd = naive_neighborhoods(g)
        mode = modes[s % len(modes)]
        for t, sizes in itertools.product(thresholds, size_ranges):
            cfg = TrainConfig(mode, t, t, sizes, "exhaustive")
            exh = cnf_train_exhaustive(g, cfg, backend).as_sets()
            for r in range(g.num_relation_ids):
                want = brute_force_cnf(g, r, cfg, neighborhoods=nbhd)
                res.checks += 1
                nonempty += bool(want)
                if exh.get(r, set()) != want:
                    res.fail(f"seed {s} {mode} t={t} sizes={sizes} r={r}: "
                             f"{sorted(map(sorted, exh.get(r, set())))} != {sorted(map(sorted, want))}")
        for t in thresholds:
            singles = cnf_train_exhaustive(g, TrainConfig(mode, t, t, (1, 2), "exhaustive"), backend)
            opt = cnf_train_optimized(g, TrainConfig(mode, t, t, None, "optimized"), backend)
            res.checks += 1
            if singles.stratum(1) != opt.as_sets():
                res.fail(f"seed {s} {mode} t={t}: optimized CNF differs from the size-1 stratum")
    res.notes.append(f"{nonempty} of {res.checks} comparisons had a non-empty expected family")
    return res


def singleton_agreement(g, thresholds=THRESHOLD_GRID, modes=("both", "precision", "recall"),
                        backend=None) -> SuiteResult:
    """Optimized CNF equals the size-1 stratum of exhaustive training on ``g``."""
    res = SuiteResult("singletons")
    for mode, t in itertools.product(modes, thresholds):
        exh = cnf_train_exhaustive(g, TrainConfig(mode, t, t, (1, 2), "exhaustive"), backend)
        opt = cnf_train_optimized(g, TrainConfig(mode, t, t, None, "optimized"), backend)
        exh_records = [x for x in exh.records() if len(x[1]) == 1]
        res.checks += 1
        if exh_records != opt.records():
            res.fail(f"{mode} t={t}: {len(exh_records)} exhaustive singletons vs {len(opt.records())} optimized")
    return res


def theorem_suite(entities: int = 10000, relations: int = 5, prob: float = 0.3,
                  samples: int = 100, seed: int = 0, tolerance: float = 0.02,
                  power_margin: float = 0.1) -> tuple[SuiteResult, TheoremReport, TheoremReport]:
    """Product identities on an independent synthetic graph, plus a power check."""
    res = SuiteResult("theorem")
    g = generate_synthetic(SyntheticSpec(entities, {r: prob for r in range(relations)}, seed))
    report = verify_theorem1(g, samples, seed)
    res.checks += 2
    res.notes.append(f"{len(report.samples)} samples, {report.skipped} skipped")
    if report.max_dev_rec > tolerance:
        res.fail(f"recall identity deviates by {report.max_dev_rec:.4f} > {tolerance}")
    if report.max_dev_pre > tolerance:
        res.fail(f"precision identity deviates by {report.max_dev_pre:.4f} > {tolerance}")
    res.notes.append(f"max dev recall {report.max_dev_rec:.4f}, precision {report.max_dev_pre:.4f}")

    adversarial = verify_theorem1(correlated_fixture(seed=seed), samples, seed)
    worst = max(adversarial.max_dev_rec, adversarial.max_dev_pre)
    res.checks += 1
    res.notes.append(f"correlated fixture max dev {worst:.4f}")
    if worst <= power_margin:
        res.fail(f"correlated fixture deviates only {worst:.4f}; the check lacks power")
    return res, report, adversarial
