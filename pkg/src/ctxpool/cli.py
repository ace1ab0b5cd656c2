"""``ctxpool`` command line: stats, train, query, pool, verify, bench.

Exit codes: 0 ok, 2 usage, 3 data, 4 capacity, 5 verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .bench import run_bench
from .cnf import TrainConfig, best_member, cnf_generate, parse_set_sizes, train_cnf
from .cnf_io import deserialize_cnf, serialize_cnf
from .datasets import PARTS, all_splits, data_root, parse_split
from .errors import CapacityError, ConfigError, ContextPoolError, UnknownNameError
from .kg import graph_stats, load_graph
from .oracle import verify_theorem1
from .pooling import build_context_graph, format_context_graph, tail_query
from .verification import cnf_suite, metrics_suite, theorem_suite

log = logging.getLogger("ctxpool")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CAPACITY, EXIT_VERIFY = 0, 2, 3, 4, 5
DIR_FILES = ("train", "valid", "test")


class UsageError(ConfigError):
    pass


# --------------------------------------------------------------------------
# provenance
# --------------------------------------------------------------------------


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance(command: str, inputs, config: dict) -> list[str]:
    lines = [f"ctxpool {__version__} {command}"]
    lines += [f"input {p} sha256={sha256(p)}" for p in inputs]
    lines += [f"config {k}={v}" for k, v in sorted(config.items())]
    return lines


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{no}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


# --------------------------------------------------------------------------
# graph sources
# --------------------------------------------------------------------------


def _add_source(p: argparse.ArgumentParser, cnf_graph: bool = False) -> None:
    src = p.add_argument_group("graph source (pick one)")
    src.add_argument("--graph", nargs="+", metavar="FILE", help="triple files read as one graph")
    src.add_argument("--dir", metavar="DIR", help="dataset directory; reads DIR/train.txt")
    src.add_argument("--split", metavar="NAME", help="GRAIL split such as FB15k-237/Ind-V1")
    src.add_argument("--part", choices=PARTS, default="train", help="split part to expand on (default train)")
    src.add_argument("--data-root", metavar="DIR", help="root for --split (default $CONTEXT_POOL_DATA or ./data)")
    if cnf_graph:
        src.add_argument("--cnf-graph", nargs="+", metavar="FILE",
                         help="graph the CNF was trained on; fixes the relation vocabulary")


def _require(paths) -> list[Path]:
    paths = [Path(p) for p in paths]
    missing = [str(p) for p in paths if not p.is_file()]
    if missing:
        raise UsageError(f"missing input file(s): {', '.join(missing)}")
    return paths


def _main_paths(args) -> list[Path]:
    given = [x for x in (args.graph, args.dir, args.split) if x]
    if len(given) != 1:
        raise UsageError("give exactly one of --graph, --dir, --split")
    if args.graph:
        return _require(args.graph)
    if args.dir:
        return _require([Path(args.dir) / "train.txt"])
    split = _split(args)
    return _require(split.files(_root(args), args.part))


def _split(args):
    try:
        return parse_split(args.split)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _root(args):
    return Path(args.data_root) if getattr(args, "data_root", None) else data_root()


def _cnf_paths(args, main: list[Path]) -> list[Path]:
    if getattr(args, "cnf_graph", None):
        return _require(args.cnf_graph)
    if args.split:
        return _require(_split(args).files(_root(args), "train"))
    return main


def load_sources(args):
    """Return ``(cnf_graph, expansion_graph, all input paths)``.

    The expansion graph reuses the CNF graph's relation ids so trained
    families apply to it unchanged.
    """
    main = _main_paths(args)
    cnf_files = _cnf_paths(args, main)
    cnf_g = load_graph(cnf_files)
    if [p.resolve() for p in cnf_files] == [p.resolve() for p in main]:
        return cnf_g, cnf_g, main
    expand = load_graph(main, cnf_g.vocab.relations_only())
    return cnf_g, expand, cnf_files + main


def _graph_label(args) -> str:
    if args.split:
        return _split(args).label
    return str(args.dir or ",".join(args.graph))


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _stats_line(label, st) -> str:
    return f"{label}\t{st.num_relations}\t{st.num_entities}\t{st.num_triples}"


def cmd_stats(args) -> int:
    header = "split\trelations\tentities\ttriples"
    if args.all or args.split:
        splits = all_splits() if args.all else [_split(args)]
        print(header + "\texpected_relations\texpected_entities\texpected_triples\tstatus")
        missing = 0
        for sp in splits:
            expected = sp.expected()
            for part, exp in zip(PARTS, expected):
                label = f"{sp.label} {part}"
                files = sp.files(_root(args), part)
                if not all(p.is_file() for p in files):
                    print(f"{label}\t-\t-\t-\t{exp.num_relations}\t{exp.num_entities}\t{exp.num_triples}\tmissing")
                    missing += 1
                    continue
                st = graph_stats(load_graph(files))
                status = "match" if st == exp else ("triples-match" if st.num_triples == exp.num_triples else "differs")
                print(f"{_stats_line(label, st)}\t{exp.num_relations}\t{exp.num_entities}\t{exp.num_triples}\t{status}")
        if missing:
            log.error("%d split part(s) missing under %s", missing, _root(args))
            return EXIT_DATA
        return EXIT_OK

    if not args.directory:
        raise UsageError("give a dataset directory, --split or --all")
    d = Path(args.directory)
    found = [(name, d / f"{name}.txt") for name in DIR_FILES if (d / f"{name}.txt").is_file()]
    if not found:
        raise UsageError(f"{d} holds none of {', '.join(n + '.txt' for n in DIR_FILES)}")
    print(header)
    for name, path in found:
        print(_stats_line(name, graph_stats(load_graph(path))))
    return EXIT_OK


def _train_config(args) -> TrainConfig:
    sizes = parse_set_sizes(args.set_sizes)
    if sizes is not None and args.algorithm != "exhaustive":
        raise UsageError("--set-sizes only applies to --algorithm exhaustive")
    return TrainConfig(args.metric, args.threshold_pre, args.threshold_rec, sizes,
                       args.algorithm, args.size_cap)


def cmd_train(args) -> int:
    cfg = _train_config(args)
    paths = _main_paths(args)
    g = load_graph(paths)
    try:
        cnf = train_cnf(g, cfg, args.backend)
    except CapacityError as exc:
        raise CapacityError(f"{exc}; restrict the candidate sizes with --set-sizes LO:HI (e.g. 4:6)") from None
    for r in range(g.num_relation_ids):
        log.info("family %s: %d member(s)", g.vocab.relation_name(r), len(cnf[r]))
    comments = provenance("train", paths, dict(cfg.items()) | {"backend": _backend_name(args)})
    serialize_cnf(cnf, args.out, g.vocab, comments)
    log.info("wrote %d record(s) to %s", cnf.num_members(), args.out)
    return EXIT_OK


def _resolve_query(args, g):
    h = g.vocab.entity_id(args.head)
    r = g.vocab.relation_id(args.relation)
    if args.direction == "tail":
        h, r = tail_query(g, h, r)
    return h, r


def cmd_query(args) -> int:
    cnf_g, g, inputs = load_sources(args)
    cnf = deserialize_cnf(args.cnf, cnf_g.vocab)
    h, r = _resolve_query(args, g)
    name = g.vocab.relation_name
    cfg = dict(cnf.config.items()) | {"head": args.head, "relation": args.relation, "direction": args.direction}
    for line in provenance("query", inputs + [Path(args.cnf)], cfg):
        print(f"# {line}")
    print(f"# query ({g.vocab.entity_name(h)}, {name(r)}, ?)")
    print("relation\tprecision\trecall")
    if cnf.algorithm == "optimized":
        chosen = cnf_generate(g, cnf, h, r)
        for m in cnf[r]:
            if m.relations[0] in chosen:
                print(f"{name(m.relations[0])}\t{m.precision}\t{m.recall}")
        return EXIT_OK
    idx = best_member(g, cnf, h, r)
    if idx is None:
        return EXIT_OK
    member = list(cnf[r])[idx]
    print(f"# member {{{','.join(name(x) for x in member.relations)}}} "
          f"precision={member.precision} recall={member.recall}")
    for x in sorted(cnf_generate(g, cnf, h, r), key=name):
        print(f"{name(x)}\t{member.precision}\t{member.recall}")
    return EXIT_OK


def cmd_pool(args) -> int:
    if args.hops < 1:
        raise UsageError("--hops must be at least 1")
    if args.expand_graph:
        if args.graph or args.dir:
            raise UsageError("--expand-graph replaces --graph/--dir")
        if args.split and not args.cnf_graph:
            args.cnf_graph = [str(p) for p in _split(args).files(_root(args), "train")]
        args.graph, args.split = args.expand_graph, None
    cnf_g, g, inputs = load_sources(args)
    cnf = deserialize_cnf(args.cnf, cnf_g.vocab)
    h, r = _resolve_query(args, g)
    cg = build_context_graph(g, h, r, args.hops, cnf, edge_cap=args.edge_cap)
    cfg = dict(cnf.config.items()) | {
        "head": args.head, "relation": args.relation, "direction": args.direction,
        "hops": args.hops, "edge_cap": args.edge_cap,
    }
    text = format_context_graph(cg, g.vocab, provenance("pool", inputs + [Path(args.cnf)], cfg))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        log.info("wrote %d edge(s) over %d hop(s) to %s", len(cg.union), args.hops, args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite == "metrics":
        res = metrics_suite(args.seeds, args.queries, args.max_entities, args.max_relations, args.seed)
    elif args.suite == "cnf":
        res = cnf_suite(args.seeds, args.max_entities, args.max_relations, seed=args.seed,
                        backend=args.backend)
    elif args.graph:
        # real graphs: report only, no pass/fail (independence is not expected to hold)
        g = load_graph(_require(args.graph))
        report = verify_theorem1(g, args.samples, args.seed, population=np.arange(g.num_entities))
        if args.report:
            Path(args.report).write_text(report.to_tsv(), encoding="utf-8")
        sys.stdout.write(report.to_text())
        return EXIT_OK
    else:
        res, report, _ = theorem_suite(args.entities, args.relations, args.prob, args.samples,
                                       args.seed, args.tolerance)
        if args.report:
            Path(args.report).write_text(report.to_tsv(), encoding="utf-8")
    sys.stdout.write(res.to_text())
    return EXIT_OK if res.ok else EXIT_VERIFY


def cmd_bench(args) -> int:
    sizes = parse_set_sizes(args.set_sizes)
    paths = _main_paths(args)
    g = load_graph(paths)
    report = run_bench(g, _graph_label(args), metric_mode=args.metric, threshold_pre=args.threshold_pre,
                       threshold_rec=args.threshold_rec, set_sizes=sizes, backend=args.backend)
    report.config["inputs"] = ",".join(f"{p}:{sha256(p)[:16]}" for p in paths)
    report.config["engine"] = __version__
    text = report.to_json() + "\n" if args.json else report.to_text()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _backend_name(args) -> str:
    return args.backend or ("numba" if _accel.USE_NUMBA else "numpy")


def _add_training(p) -> None:
    p.add_argument("--metric", choices=("precision", "recall", "both"), default="both")
    p.add_argument("--threshold-pre", default="0.01", help="strict lower bound on precision")
    p.add_argument("--threshold-rec", default="0.01", help="strict lower bound on recall")


def _add_query(p) -> None:
    p.add_argument("--cnf", required=True, metavar="FILE", help="trained CNF file")
    p.add_argument("--head", required=True, help="query entity (the tail with --direction tail)")
    p.add_argument("--relation", required=True)
    p.add_argument("--direction", choices=("head", "tail"), default="head",
                   help="tail answers (?, r, t) through the inverse relation")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, help="worker cap (default $CONTEXT_POOL_THREADS)")
    common.add_argument("--config", metavar="FILE", help="flat key=value defaults; flags win")
    common.add_argument("--backend", choices=("numba", "numpy"), help="kernel backend override")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="ctxpool", description="Context pooling over knowledge graphs.")
    parser.add_argument("--version", action="version", version=f"ctxpool {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common], help="relation/entity/triple counts")
    p.add_argument("directory", nargs="?", help="directory holding train/valid/test.txt")
    p.add_argument("--split", help="one GRAIL split, compared with the published counts")
    p.add_argument("--all", action="store_true", help="all 24 GRAIL splits")
    p.add_argument("--data-root", metavar="DIR")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", parents=[common], help="train a CNF file")
    _add_source(p)
    _add_training(p)
    p.add_argument("--algorithm", choices=("optimized", "exhaustive"), default="optimized")
    p.add_argument("--set-sizes", metavar="LO:HI", help="exhaustive only: candidate sizes in [LO, HI)")
    p.add_argument("--size-cap", type=int, default=20,
                   help="exhaustive guard on neighbourhood width when no size range is set")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("query", parents=[common], help="selected neighbour relations for (h, r, ?)")
    _add_source(p, cnf_graph=True)
    _add_query(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("pool", parents=[common], help="export the context graph for (h, r, ?)")
    _add_source(p, cnf_graph=True)
    _add_query(p)
    p.add_argument("--expand-graph", nargs="+", metavar="FILE", help="graph to expand on (inductive mode)")
    p.add_argument("--hops", type=int, default=3)
    p.add_argument("--edge-cap", type=int, help="fail when a layer admits more edges")
    p.add_argument("--out", metavar="FILE", help="default stdout")
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("verify", parents=[common], help="oracle and statistical suites")
    p.add_argument("suite", choices=("metrics", "cnf", "theorem"))
    p.add_argument("--seeds", type=int, default=200, help="random graphs (metrics, cnf)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--queries", type=int, default=1000, help="queries per graph (metrics)")
    p.add_argument("--max-entities", type=int, default=None)
    p.add_argument("--max-relations", type=int, default=None)
    p.add_argument("--entities", type=int, default=10000, help="theorem: synthetic entities")
    p.add_argument("--relations", type=int, default=5, help="theorem: synthetic relations")
    p.add_argument("--prob", type=float, default=0.3, help="theorem: relation probability")
    p.add_argument("--samples", type=int, default=100, help="theorem: sampled (set, relation) pairs")
    p.add_argument("--tolerance", type=float, default=0.02)
    p.add_argument("--report", metavar="FILE", help="theorem: per-sample TSV")
    p.add_argument("--graph", nargs="+", metavar="FILE",
                   help="theorem: report deviations on a real graph instead (never fails)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="time exhaustive vs optimized CNF training")
    _add_source(p)
    _add_training(p)
    p.add_argument("--set-sizes", default="4:6", metavar="LO:HI")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_bench)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    """Parse with precedence flags > ``--config`` file > defaults."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config_file(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(values) - known)
        if unknown:
            raise UsageError(f"unknown config key(s) for {args.command}: {', '.join(unknown)}")
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
        for action in sub._actions:
            # argparse only applies `type` to string defaults when they are used
            if action.dest in values and isinstance(getattr(args, action.dest), str) and action.type:
                setattr(args, action.dest, action.type(getattr(args, action.dest)))
            if action.dest in values and action.nargs == "+" and isinstance(getattr(args, action.dest), str):
                setattr(args, action.dest, getattr(args, action.dest).split())
    if args.command == "verify":
        small = args.suite == "cnf"
        args.max_entities = args.max_entities or (30 if small else 50)
        args.max_relations = args.max_relations or (5 if small else 8)
    return args


def _setup_logging(verbose: int) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.DEBUG if verbose > 1 else logging.INFO if verbose else logging.WARNING)


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except ContextPoolError as exc:
        print(f"ctxpool: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _setup_logging(args.verbose)
    threads = args.threads if args.threads is not None else _accel.threads_from_env()
    _accel.set_threads(threads)
    try:
        return args.func(args)
    except UnknownNameError as exc:
        print(f"ctxpool: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ContextPoolError as exc:
        print(f"ctxpool: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        # argument values rejected below the parser (e.g. a bad threshold literal)
        print(f"ctxpool: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ctxpool: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
