import json

import pytest

from ctxpool.cli import main, read_config_file

TOY = "A\ta\tX1\nA\tb\tX2\nA\tq\tX3\nB\ta\tX4\nB\tb\tX5\nC\ta\tX6\n"


@pytest.fixture
def ws(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "toy.txt").write_text(TOY)
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def data_lines(text):
    return [x for x in text.splitlines() if x and not x.startswith("#")]


def train_toy(capsys, *extra):
    code, _, _ = run(capsys, "train", "--graph", "toy.txt", "--out", "toy.cnf", *extra)
    assert code == 0


def test_stats_directory(ws, capsys):
    (ws / "d").mkdir()
    (ws / "d" / "train.txt").write_text(TOY)
    code, out, _ = run(capsys, "stats", "d")
    assert code == 0
    assert out.splitlines()[1] == "train\t3\t9\t6"


def test_stats_empty_directory_is_usage_error(ws, capsys):
    (ws / "empty").mkdir()
    assert run(capsys, "stats", "empty")[0] == 2
    assert run(capsys, "stats")[0] == 2


def test_stats_split_missing_data(ws, capsys):
    code, out, _ = run(capsys, "stats", "--split", "WN18RR/Trans-V2", "--data-root", "nowhere")
    assert code == 3
    assert "\t6954\t15262\tmissing" in out


def test_stats_split_with_data(ws, capsys):
    d = ws / "root" / "WN18RR_v1"
    d.mkdir(parents=True)
    (d / "train.txt").write_text(TOY)
    (d / "test.txt").write_text(TOY)
    code, out, _ = run(capsys, "stats", "--split", "WN18RR/Trans-V1", "--data-root", "root")
    assert code == 0
    assert "WN18RR Trans-V1 train\t3\t9\t6\t9\t2746\t5410\tdiffers" in out


def test_train_writes_cnf_with_provenance(ws, capsys):
    code, _, err = run(capsys, "train", "--graph", "toy.txt", "--out", "toy.cnf", "-v",
                       "--threshold-pre", "1e-2", "--threshold-rec", "1e-2")
    assert code == 0
    text = (ws / "toy.cnf").read_text()
    assert text.startswith("#cnf-version 1\n")
    assert "# ctxpool 0.1.0 train" in text and "sha256=" in text
    assert "# config threshold_pre=0.01" in text
    assert "family q: 2 member(s)" in err


def test_train_conflicting_flags(ws, capsys):
    code, _, err = run(capsys, "train", "--graph", "toy.txt", "--out", "x.cnf", "--set-sizes", "4:6")
    assert code == 2 and "exhaustive" in err


def test_train_capacity_error_suggests_set_sizes(ws, capsys):
    (ws / "wide.txt").write_text("".join(f"H\tr{i}\tT\n" for i in range(25)))
    code, _, err = run(capsys, "train", "--graph", "wide.txt", "--out", "w.cnf", "--algorithm", "exhaustive")
    assert code == 4 and "--set-sizes" in err
    code, _, _ = run(capsys, "train", "--graph", "wide.txt", "--out", "w.cnf", "--algorithm", "exhaustive",
                     "--set-sizes", "4:6")
    assert code == 0


def test_train_bad_threshold(ws, capsys):
    code, _, _ = run(capsys, "train", "--graph", "toy.txt", "--out", "x.cnf", "--threshold-pre", "1.5")
    assert code == 2
    code, _, _ = run(capsys, "train", "--graph", "toy.txt", "--out", "x.cnf", "--threshold-pre", "abc")
    assert code == 2


def test_missing_graph_file(ws, capsys):
    assert run(capsys, "train", "--graph", "nope.txt", "--out", "x.cnf")[0] == 2


def test_malformed_graph_is_data_error(ws, capsys):
    (ws / "bad.txt").write_text("A\tr\n")
    code, _, err = run(capsys, "train", "--graph", "bad.txt", "--out", "x.cnf")
    assert code == 3 and "bad.txt:1" in err


def test_query_optimized(ws, capsys):
    train_toy(capsys, "--metric", "precision", "--threshold-pre", "0.4")
    code, out, _ = run(capsys, "query", "--graph", "toy.txt", "--cnf", "toy.cnf", "--head", "A", "--relation", "q")
    assert code == 0
    assert data_lines(out) == ["relation\tprecision\trecall", "b\t1/2\t1/1"]


def test_query_exhaustive(ws, capsys):
    train_toy(capsys, "--metric", "precision", "--threshold-pre", "0.4", "--algorithm", "exhaustive",
              "--set-sizes", "1:3")
    code, out, _ = run(capsys, "query", "--graph", "toy.txt", "--cnf", "toy.cnf", "--head", "A", "--relation", "q")
    assert code == 0
    assert data_lines(out)[1:] == ["a\t1/2\t1/1", "b\t1/2\t1/1"]
    assert "# member {a,b}" in out


def test_query_head_without_neighbours(ws, capsys):
    train_toy(capsys)
    code, out, _ = run(capsys, "query", "--graph", "toy.txt", "--cnf", "toy.cnf", "--head", "X1", "--relation", "q")
    assert code == 0 and data_lines(out) == ["relation\tprecision\trecall"]


def test_query_unknown_names(ws, capsys):
    train_toy(capsys)
    code, _, err = run(capsys, "query", "--graph", "toy.txt", "--cnf", "toy.cnf", "--head", "A", "--relation", "qq")
    assert code == 2 and "did you mean: q" in err
    code, _, err = run(capsys, "query", "--graph", "toy.txt", "--cnf", "toy.cnf", "--head", "Z", "--relation", "q")
    assert code == 2 and "unknown entity" in err


def test_pool_export(ws, capsys):
    train_toy(capsys, "--metric", "precision", "--threshold-pre", "0.4")
    code, _, _ = run(capsys, "pool", "--graph", "toy.txt", "--cnf", "toy.cnf", "--head", "A",
                     "--relation", "q", "--hops", "1", "--out", "ctx.tsv")
    assert code == 0
    text = (ws / "ctx.tsv").read_text()
    assert data_lines(text) == ["hop\thead\trelation\ttail", "1\tA\tb\tX2"]
    assert "# config hops=1" in text


def test_pool_zero_hops(ws, capsys):
    train_toy(capsys)
    code, _, _ = run(capsys, "pool", "--graph", "toy.txt", "--cnf", "toy.cnf", "--head", "A",
                     "--relation", "q", "--hops", "0")
    assert code == 2


def test_pool_tail_direction(ws, capsys):
    (ws / "g.txt").write_text("A\tb\tX2\nB\tb\tX5\nX2\tc\tZ1\nX5\tc\tZ2\n")
    run(capsys, "train", "--graph", "g.txt", "--out", "g.cnf")
    code, out, _ = run(capsys, "pool", "--graph", "g.txt", "--cnf", "g.cnf", "--head", "X2",
                       "--relation", "b", "--direction", "tail", "--hops", "1")
    assert code == 0
    # (?, b, X2) is answered as (X2, b^-1, ?): X2 arrives via b, keeps c
    assert data_lines(out)[1:] == ["1\tX2\tc\tZ1"]


def test_pool_inductive(ws, capsys):
    (ws / "test.txt").write_text("P\ta\tY1\nP\tb\tY2\nQ\tq\tY3\n")
    train_toy(capsys, "--metric", "precision", "--threshold-pre", "0.4")
    code, out, _ = run(capsys, "pool", "--cnf-graph", "toy.txt", "--expand-graph", "test.txt",
                       "--cnf", "toy.cnf", "--head", "P", "--relation", "q", "--hops", "2")
    assert code == 0
    assert data_lines(out)[1:] == ["1\tP\tb\tY2"]
    (ws / "bad.txt").write_text("P\tunseen\tY\n")
    code, _, err = run(capsys, "pool", "--cnf-graph", "toy.txt", "--expand-graph", "bad.txt",
                       "--cnf", "toy.cnf", "--head", "P", "--relation", "q")
    assert code == 3 and "training vocabulary" in err


def test_pool_edge_cap(ws, capsys):
    train_toy(capsys)
    code, _, _ = run(capsys, "pool", "--graph", "toy.txt", "--cnf", "toy.cnf", "--head", "A",
                     "--relation", "q", "--edge-cap", "1")
    assert code == 4


def test_truncated_cnf_is_data_error(ws, capsys):
    train_toy(capsys)
    text = (ws / "toy.cnf").read_text()
    (ws / "toy.cnf").write_text(text.rsplit("#end", 1)[0])
    code, _, err = run(capsys, "query", "--graph", "toy.txt", "--cnf", "toy.cnf", "--head", "A", "--relation", "q")
    assert code == 3 and "truncated" in err


def test_config_file_precedence(ws, capsys):
    (ws / "run.cfg").write_text("# defaults\nmetric = precision\nthreshold-pre = 0.4\nthreshold_rec=0.3\n")
    train_toy(capsys, "--config", "run.cfg", "--threshold-pre", "0.2")
    text = (ws / "toy.cnf").read_text()
    assert "#metric precision" in text
    assert "#threshold_pre 0.2" in text
    assert "#threshold_rec 0.3" in text


def test_config_file_unknown_key(ws, capsys):
    (ws / "run.cfg").write_text("colour = blue\n")
    code, _, err = run(capsys, "train", "--graph", "toy.txt", "--out", "x.cnf", "--config", "run.cfg")
    assert code == 2 and "colour" in err


def test_read_config_file_rejects_garbage(ws):
    (ws / "c.cfg").write_text("just words\n")
    with pytest.raises(ValueError):
        read_config_file(ws / "c.cfg")


def test_output_independent_of_threads(ws, capsys, monkeypatch):
    outputs = []
    for threads in ("1", "2"):
        monkeypatch.setenv("CONTEXT_POOL_THREADS", threads)
        run(capsys, "train", "--graph", "toy.txt", "--out", f"t{threads}.cnf", "--algorithm", "exhaustive")
        outputs.append((ws / f"t{threads}.cnf").read_text())
    assert outputs[0] == outputs[1]


@pytest.mark.parametrize("suite, extra", [
    ("metrics", ["--seeds", "5", "--queries", "50"]),
    ("cnf", ["--seeds", "5", "--max-entities", "30"]),
    ("theorem", ["--entities", "10000", "--relations", "5", "--prob", "0.3"]),
])
def test_verify_suites_pass(ws, capsys, suite, extra):
    code, out, _ = run(capsys, "verify", suite, *extra)
    assert code == 0 and "PASS" in out


def test_verify_failure_exit_code(ws, capsys):
    code, out, _ = run(capsys, "verify", "theorem", "--entities", "2000", "--tolerance", "0.0001")
    assert code == 5 and "FAIL" in out


def test_verify_theorem_report(ws, capsys):
    code, _, _ = run(capsys, "verify", "theorem", "--report", "dev.tsv")
    assert code == 0
    assert (ws / "dev.tsv").read_text().startswith("relations\tquery")


def test_verify_theorem_on_real_graph_reports_only(ws, capsys):
    (ws / "g.txt").write_text("".join(f"e{i}\tr{i % 3}\te{(i * 7) % 40}\n" for i in range(120)))
    code, out, _ = run(capsys, "verify", "theorem", "--graph", "g.txt", "--tolerance", "0")
    assert code == 0 and "recall identity" in out


def test_bench_trivial_graph(ws, capsys):
    code, out, _ = run(capsys, "bench", "--graph", "toy.txt", "--json", "--set-sizes", "1:3")
    assert code == 0
    report = json.loads(out)
    assert report["dataset"] == "toy.txt"
    assert report["config"]["set_sizes"] == "1:3"
    assert report["speedup"] > 0


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "ctxpool" in capsys.readouterr().out


def test_argparse_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["train"])
    assert exc.value.code == 2
