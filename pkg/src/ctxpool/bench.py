"""Wall-clock comparison of the exhaustive and optimized CNF trainers."""

from __future__ import annotations

import json
import platform
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _accel
from .cnf import TrainConfig, cnf_train_exhaustive, cnf_train_optimized
from .kg import KnowledgeGraph, Vocabulary, build_graph


@dataclass
class BenchReport:
    dataset: str
    exhaustive_train_seconds: float
    optimized_train_seconds: float
    exhaustive_members: int
    optimized_members: int
    config: dict = field(default_factory=dict)
    machine: dict = field(default_factory=dict)

    @property
    def speedup(self) -> float:
        if self.optimized_train_seconds <= 0:
            return float("inf")
        return self.exhaustive_train_seconds / self.optimized_train_seconds

    def to_text(self) -> str:
        return "\n".join([
            f"dataset               {self.dataset}",
            "measures              CNF generation only (no downstream model training)",
            f"exhaustive_seconds    {self.exhaustive_train_seconds:.6f}",
            f"optimized_seconds     {self.optimized_train_seconds:.6f}",
            f"speedup               {self.speedup:.2f}x",
            f"exhaustive_members    {self.exhaustive_members}",
            f"optimized_members     {self.optimized_members}",
            *(f"config.{k:<16} {v}" for k, v in self.config.items()),
            *(f"machine.{k:<15} {v}" for k, v in self.machine.items()),
        ]) + "\n"

    def to_json(self) -> str:
        data = asdict(self)
        data["speedup"] = self.speedup
        return json.dumps(data, indent=2, sort_keys=True)


def machine_info() -> dict:
    return {
        "python": platform.python_version(),
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "numba": str(_accel.USE_NUMBA),
    }


def warm_up(backend=None) -> None:
    """Compile the kernels on a toy graph so JIT time stays out of the timings."""
    vocab = Vocabulary.from_names(["a", "b", "c"], ["x", "y"])
    g = build_graph(np.array([[0, 0, 1], [0, 1, 2], [1, 1, 2]]), vocab)
    cnf_train_optimized(g, TrainConfig(algorithm="optimized"), backend)
    cnf_train_exhaustive(g, TrainConfig(algorithm="exhaustive", set_sizes=(1, 3)), backend)
    g_wide = build_graph(np.array([[0, r, 1] for r in range(40)]),
                         Vocabulary.from_names(["a", "b"], [f"r{i}" for i in range(40)]))
    cnf_train_exhaustive(g_wide, TrainConfig(algorithm="exhaustive", set_sizes=(1, 2)), backend)


def run_bench(g: KnowledgeGraph, dataset: str, *, metric_mode="both", threshold_pre=0.01,
              threshold_rec=0.01, set_sizes=(4, 6), backend=None) -> BenchReport:
    exh_cfg = TrainConfig(metric_mode, threshold_pre, threshold_rec, set_sizes, "exhaustive")
    opt_cfg = TrainConfig(metric_mode, threshold_pre, threshold_rec, None, "optimized")
    warm_up(backend)
    g.groups  # index construction is shared; keep it out of both timings

    t0 = time.perf_counter()
    exh = cnf_train_exhaustive(g, exh_cfg, backend)
    t1 = time.perf_counter()
    opt = cnf_train_optimized(g, opt_cfg, backend)
    t2 = time.perf_counter()

    config = dict(exh_cfg.items())
    config.pop("algorithm")
    config["backend"] = backend or ("numba" if _accel.USE_NUMBA else "numpy")
    return BenchReport(
        dataset=dataset,
        exhaustive_train_seconds=t1 - t0,
        optimized_train_seconds=t2 - t1,
        exhaustive_members=exh.num_members(),
        optimized_members=opt.num_members(),
        config=config,
        machine=machine_info(),
    )
