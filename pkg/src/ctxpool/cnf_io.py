"""Versioned text format for trained context neighbour families.

Layout::

    #cnf-version 1
    #algorithm optimized
    #metric both
    #threshold_pre 0.01
    #threshold_rec 0.01
    #set_sizes all
    #relations 237
    # ...free-form provenance comments...
    <relation>\t<num>/<den>\t<num>/<den>\t<neighbours>
    #end <record count>

Neighbours are one name (optimized) or a comma-joined sorted list
(exhaustive, empty for the empty set).  Inverse relations carry the
``^-1`` suffix.  The ``#end`` trailer catches truncated files.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cnf import ExhaustiveCNF, OptimizedCNF, SetFamily, Singletons, TrainConfig, parse_set_sizes
from .errors import ConfigError, DecodeError, UnknownNameError
from .kg import Vocabulary

FORMAT_VERSION = "1"
_REQUIRED = ("algorithm", "metric", "threshold_pre", "threshold_rec", "set_sizes", "relations")


def _quote(name: str) -> str:
    return name.replace("%", "%25").replace(",", "%2C")


def _unquote(name: str) -> str:
    return name.replace("%2C", ",").replace("%25", "%")


def _sorted_members(cnf, vocab: Vocabulary):
    """Records ordered by relation name, then canonical set order."""
    by_name = sorted(cnf.relations(), key=vocab.relation_name)
    for r in by_name:
        for m in cnf[r]:
            yield vocab.relation_name(r), m


def format_cnf(cnf, vocab: Vocabulary, comments: list[str] = ()) -> str:
    cfg = cnf.config
    if vocab.num_relations != cnf.num_relations:
        raise ConfigError("vocabulary does not match the CNF relation count")
    header = dict(cfg.items())
    lines = [
        f"#cnf-version {FORMAT_VERSION}",
        f"#algorithm {cnf.algorithm}",
        f"#metric {header['metric']}",
        f"#threshold_pre {header['threshold_pre']}",
        f"#threshold_rec {header['threshold_rec']}",
        f"#set_sizes {header['set_sizes']}",
        f"#relations {cnf.num_relations}",
        f"#size_cap {cfg.size_cap}",
    ]
    lines += [f"# {c}" for c in comments]
    count = 0
    for rel_name, m in _sorted_members(cnf, vocab):
        neigh = ",".join(_quote(vocab.relation_name(x)) for x in m.relations)
        lines.append(f"{rel_name}\t{m.precision}\t{m.recall}\t{neigh}")
        count += 1
    lines.append(f"#end {count}")
    return "\n".join(lines) + "\n"


def serialize_cnf(cnf, path, vocab: Vocabulary, comments: list[str] = ()) -> None:
    Path(path).write_text(format_cnf(cnf, vocab, comments), encoding="utf-8")


def deserialize_cnf(path, vocab: Vocabulary):
    text = Path(path).read_text(encoding="utf-8")
    return parse_cnf(text, vocab, source=str(path))


def parse_cnf(text: str, vocab: Vocabulary, source: str = "<cnf>"):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != f"#cnf-version {FORMAT_VERSION}":
        found = lines[0] if lines else "<empty file>"
        raise DecodeError(source, 1, f"expected '#cnf-version {FORMAT_VERSION}', found {found!r}")

    header: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i].startswith("#") and not lines[i].startswith("#end"):
        line = lines[i]
        if not line.startswith("# "):
            key, _, value = line[1:].partition(" ")
            header[key] = value
        i += 1
    missing = [k for k in _REQUIRED if k not in header]
    if missing:
        raise DecodeError(source, i + 1, f"missing header fields: {', '.join(missing)}")
    algorithm = header["algorithm"]
    if algorithm not in ("exhaustive", "optimized"):
        raise DecodeError(source, 2, f"unknown algorithm {algorithm!r}")
    try:
        cfg = TrainConfig(
            metric_mode=header["metric"],
            threshold_pre=Fraction(header["threshold_pre"]),
            threshold_rec=Fraction(header["threshold_rec"]),
            set_sizes=parse_set_sizes(header["set_sizes"]),
            algorithm=algorithm,
            size_cap=int(header.get("size_cap", 20)),
        )
        num_relations = int(header["relations"])
    except (ConfigError, ValueError) as exc:
        raise DecodeError(source, i, f"bad header: {exc}") from None
    if num_relations != vocab.num_relations:
        raise DecodeError(source, i, f"CNF covers {num_relations} relations, vocabulary has {vocab.num_relations}")

    rows: dict[int, list] = defaultdict(list)
    count = 0
    end_seen = None
    for line_no in range(i + 1, len(lines) + 1):
        line = lines[line_no - 1]
        if end_seen is not None:
            raise DecodeError(source, line_no, "content after #end trailer")
        if line.startswith("#end"):
            try:
                end_seen = int(line.split()[1])
            except (IndexError, ValueError):
                raise DecodeError(source, line_no, f"malformed trailer {line!r}") from None
            if end_seen != count:
                raise DecodeError(source, line_no, f"trailer announces {end_seen} records, read {count}")
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise DecodeError(source, line_no, f"expected 4 tab-separated fields, got {len(parts)}")
        try:
            r = vocab.relation_id(parts[0])
            pre_n, pre_d = _ratio(parts[1])
            rec_n, rec_d = _ratio(parts[2])
            if pre_n != rec_n:
                raise ValueError("precision and recall numerators differ")
            neigh = [vocab.relation_id(_unquote(x)) for x in parts[3].split(",")] if parts[3] else []
        except (UnknownNameError, ValueError) as exc:
            raise DecodeError(source, line_no, str(exc)) from None
        if algorithm == "optimized" and len(neigh) != 1:
            raise DecodeError(source, line_no, "optimized records hold exactly one neighbour")
        rows[r].append((sorted(neigh), pre_n, pre_d, rec_d))
        count += 1
    if end_seen is None:
        raise DecodeError(source, len(lines), "missing #end trailer (truncated file?)")

    if algorithm == "optimized":
        entries = {}
        for r, recs in rows.items():
            recs.sort()
            entries[r] = Singletons(
                np.array([x[0][0] for x in recs], np.int64),
                np.array([x[1] for x in recs], np.int64),
                np.array([x[2] for x in recs], np.int64),
                np.array([x[3] for x in recs], np.int64),
            )
        return OptimizedCNF(cfg, num_relations, entries)

    families = {}
    for r, recs in rows.items():
        width = max(1, max(len(x[0]) for x in recs))
        members = np.full((len(recs), width), -1, np.int64)
        for j, x in enumerate(recs):
            members[j, : len(x[0])] = x[0]
        families[r] = SetFamily.canonical(
            members,
            [len(x[0]) for x in recs],
            [x[1] for x in recs],
            [x[2] for x in recs],
            [x[3] for x in recs],
        )
    return ExhaustiveCNF(cfg, num_relations, families)


def _ratio(text: str) -> tuple[int, int]:
    num, sep, den = text.partition("/")
    if not sep:
        raise ValueError(f"score {text!r} is not a ratio num/den")
    return int(num), int(den)
