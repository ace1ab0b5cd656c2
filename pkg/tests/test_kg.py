import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctxpool.errors import InductiveContractError, ParseError, UnknownNameError
from ctxpool.kg import (
    GraphStats,
    Vocabulary,
    build_graph,
    graph_stats,
    inverse_relation,
    load_graph,
    load_triples,
    neighbor_relations_of_entity,
    neighbor_relations_of_relation,
)

from conftest import ids, make_graph


def test_duplicate_lines_collapse(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("A\tworks_at\tB\nA\tworks_at\tB\n")
    triples, vocab = load_triples(p)
    assert triples.tolist() == [[0, 0, 1]]
    assert vocab.relations == ["works_at"]


def test_malformed_line_reports_position(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("A\tr\tB\nA\tworks_at\n")
    with pytest.raises(ParseError) as err:
        load_triples(p)
    assert err.value.line_no == 2
    assert ":2:" in str(err.value)


def test_reserved_suffix_rejected(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("A\tr^-1\tB\n")
    with pytest.raises(ParseError):
        load_triples(p)


def test_several_files_form_one_graph(tmp_path):
    (tmp_path / "a.txt").write_text("A\tr\tB\n")
    (tmp_path / "b.txt").write_text("B\ts\tC\nA\tr\tB\n")
    g = load_graph([tmp_path / "a.txt", tmp_path / "b.txt"])
    assert graph_stats(g) == GraphStats(2, 3, 2)


def test_closed_relation_vocabulary(tmp_path):
    (tmp_path / "train.txt").write_text("A\tr\tB\n")
    (tmp_path / "test.txt").write_text("P\tr\tQ\nQ\tnew\tP\n")
    train = load_graph(tmp_path / "train.txt")
    with pytest.raises(InductiveContractError):
        load_graph(tmp_path / "test.txt", train.vocab.relations_only())


def test_inductive_vocab_keeps_relation_ids(tmp_path):
    (tmp_path / "train.txt").write_text("A\tr\tB\nB\ts\tA\n")
    (tmp_path / "test.txt").write_text("P\ts\tQ\n")
    train = load_graph(tmp_path / "train.txt")
    test = load_graph(tmp_path / "test.txt", train.vocab.relations_only())
    assert test.vocab.relation_id("s") == train.vocab.relation_id("s")
    assert test.vocab.entities == ["P", "Q"]
    assert train.vocab.entities == ["A", "B"]  # caller's vocabulary untouched


def test_single_triple_augmented():
    g = make_graph([("A", "a", "B")])
    names = {(g.vocab.entity_name(h), g.vocab.relation_name(r), g.vocab.entity_name(t))
             for h, r, t in g.triples.tolist()}
    assert names == {("A", "a", "B"), ("B", "a^-1", "A")}


def test_toy_nr_with_augmentation(toy_aug):
    g = toy_aug
    assert neighbor_relations_of_entity(g, g.vocab.entity_id("A")) == ids(g, "a", "b", "q")
    assert neighbor_relations_of_entity(g, g.vocab.entity_id("X3")) == ids(g, "q^-1")


def test_toy_nr_without_augmentation(toy):
    nr = lambda e: neighbor_relations_of_entity(toy, toy.vocab.entity_id(e))
    assert nr("A") == ids(toy, "a", "b", "q")
    assert nr("B") == ids(toy, "a", "b")
    assert nr("C") == ids(toy, "a")
    assert nr("X1") == frozenset()


def test_nr_of_relation(toy):
    assert neighbor_relations_of_relation(toy, toy.vocab.relation_id("q")) == ids(toy, "a", "b", "q")
    g = make_graph([("A", "a", "B")], augment=False)
    assert neighbor_relations_of_relation(g, 0) == {0}


def test_nr_of_absent_relation():
    g = make_graph([("A", "a", "B")], augment=False, relations=["unused"])
    assert neighbor_relations_of_relation(g, g.vocab.relation_id("unused")) == frozenset()


def test_inverse_relation_ids():
    assert inverse_relation(0, 9) == 9
    assert inverse_relation(9, 9) == 0
    assert all(inverse_relation(inverse_relation(r, 9), 9) == r for r in range(18))


def test_empty_graph():
    g = build_graph(np.zeros((0, 3), np.int64), Vocabulary())
    assert graph_stats(g) == GraphStats(0, 0, 0)
    assert len(g.triples) == 0


def test_stats_counts_forward_triples_only(toy_aug):
    assert graph_stats(toy_aug) == GraphStats(3, 9, 6)


def test_unknown_names_suggest():
    vocab = Vocabulary.from_names(["Alice", "Bob"], ["works_at"])
    with pytest.raises(UnknownNameError) as err:
        vocab.relation_id("work_at")
    assert "works_at" in str(err.value)
    with pytest.raises(KeyError):
        vocab.entity_id("Alicia")
    assert vocab.relation_id("works_at^-1") == 1


def test_triples_read_only(toy_aug):
    with pytest.raises(ValueError):
        toy_aug.triples[0, 0] = 5


triple_lists = st.lists(
    st.tuples(st.integers(0, 7), st.integers(0, 3), st.integers(0, 7)), max_size=30
)


@settings(max_examples=80, deadline=None)
@given(triple_lists)
def test_augmentation_and_index_invariants(rows):
    vocab = Vocabulary.from_names([f"e{i}" for i in range(8)], [f"r{j}" for j in range(4)])
    g = build_graph(np.array(rows, np.int64).reshape(-1, 3), vocab)
    fwd = {tuple(t) for t in rows}
    stored = {tuple(t) for t in g.triples.tolist()}
    assert stored == fwd | {(t, r + 4, h) for h, r, t in fwd}
    for e in range(8):
        assert set(g.nr(e).tolist()) == {r for h, r, _ in stored if h == e}
        for r in range(8):
            assert set(g.tails(e, r).tolist()) == {t for h, rr, t in stored if h == e and rr == r}
    for r in range(8):
        assert set(g.entities_with(r).tolist()) == {h for h, rr, _ in stored if rr == r}
    probe = np.array([[h, r, t] for h in range(3) for r in range(8) for t in range(3)], np.int64)
    assert g.has_edges(probe).tolist() == [tuple(p) in stored for p in probe.tolist()]
