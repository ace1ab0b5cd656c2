import json

import numpy as np

from ctxpool.bench import BenchReport, run_bench
from ctxpool.kg import Vocabulary, build_graph


def test_report_speedup_and_formats():
    rep = BenchReport("X", 10.0, 2.0, 5, 3, {"set_sizes": "4:6"}, {"python": "3"})
    assert rep.speedup == 5.0
    assert "CNF generation only" in rep.to_text()
    data = json.loads(rep.to_json())
    assert data["speedup"] == 5.0 and data["config"]["set_sizes"] == "4:6"
    assert BenchReport("X", 1.0, 0.0, 0, 0).speedup == float("inf")


def test_run_bench_ten_triples():
    rng = np.random.default_rng(0)
    triples = np.column_stack([rng.integers(0, 6, 10), rng.integers(0, 3, 10), rng.integers(0, 6, 10)])
    vocab = Vocabulary.from_names([f"e{i}" for i in range(6)], ["a", "b", "c"])
    rep = run_bench(build_graph(triples, vocab), "tiny", set_sizes=(1, 3))
    assert rep.exhaustive_train_seconds >= 0 and rep.optimized_train_seconds >= 0
    assert rep.config["set_sizes"] == "1:3"
    assert set(rep.machine) >= {"python", "platform"}
