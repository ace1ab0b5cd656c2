import numpy as np
import pytest

from ctxpool.kg import Vocabulary, build_graph

TOY_TRIPLES = [
    ("A", "a", "X1"), ("A", "b", "X2"), ("A", "q", "X3"),
    ("B", "a", "X4"), ("B", "b", "X5"), ("C", "a", "X6"),
]


def make_graph(triples, augment=True, relations=None):
    vocab = Vocabulary()
    for name in relations or ():
        vocab.add_relation(name)
    rows = [(vocab.add_entity(h), vocab.add_relation(r), vocab.add_entity(t)) for h, r, t in triples]
    return build_graph(np.array(rows, dtype=np.int64).reshape(-1, 3), vocab, augment=augment)


@pytest.fixture
def toy():
    """TOY-KG-1 without inverse augmentation (metric examples)."""
    return make_graph(TOY_TRIPLES, augment=False)


@pytest.fixture
def toy_aug():
    return make_graph(TOY_TRIPLES, augment=True)


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.txt"
    path.write_text("".join(f"{h}\t{r}\t{t}\n" for h, r, t in TOY_TRIPLES))
    return path


def ids(g, *names):
    return {g.vocab.relation_id(n) for n in names}


# one line per acceptance criterion at the end of the run
ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        detail = dict(report.user_properties).get("detail", "")
        ACCEPTANCE[crit] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=lambda c: int(c.split()[0])):
        status, detail = ACCEPTANCE[crit]
        terminalreporter.write_line(f"[{status}] criterion {crit}" + (f": {detail}" if detail else ""))
