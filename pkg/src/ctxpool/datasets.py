"""GRAIL benchmark splits and their published statistics.

Expected directory layout under the data root (``CONTEXT_POOL_DATA``, default
``./data``), as in the GRAIL release::

    WN18RR_v1/{train,valid,test}.txt      WN18RR_v1_ind/{train,valid,test}.txt
    fb237_v1/...                          fb237_v1_ind/...
    nell_v1/...                           nell_v1_ind/...

Transductive splits use ``<name>_vK/train.txt`` (training graph) and
``<name>_vK/test.txt`` (testing graph).  Inductive splits use all three files
of ``<name>_vK`` for training and all three of ``<name>_vK_ind`` for testing.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .kg import GraphStats

DATASETS = {"WN18RR": "WN18RR", "FB15k-237": "fb237", "NELL-995": "nell"}
SETTINGS = ("Trans", "Ind")
PARTS = ("train", "test")


# (relations, entities, triples) for the training graph, then the testing graph.
PUBLISHED_STATS: dict[tuple[str, str, int], tuple[GraphStats, GraphStats]] = {}


def _row(dataset, setting, version, train, test):
    PUBLISHED_STATS[(dataset, setting, version)] = (GraphStats(*train), GraphStats(*test))


_row("WN18RR", "Trans", 1, (9, 2746, 5410), (7, 962, 638))
_row("WN18RR", "Trans", 2, (10, 6954, 15262), (9, 2788, 1868))
_row("WN18RR", "Trans", 3, (11, 12078, 25901), (10, 4605, 3152))
_row("WN18RR", "Trans", 4, (9, 3861, 7940), (8, 1433, 968))
_row("WN18RR", "Ind", 1, (9, 2746, 6678), (9, 922, 1911))
_row("WN18RR", "Ind", 2, (10, 6954, 18968), (10, 2923, 4863))
_row("WN18RR", "Ind", 3, (11, 12078, 32150), (11, 5084, 7470))
_row("WN18RR", "Ind", 4, (9, 3861, 9842), (9, 7208, 15157))
_row("FB15k-237", "Trans", 1, (180, 1594, 4245), (102, 550, 492))
_row("FB15k-237", "Trans", 2, (200, 2608, 9739), (140, 1142, 1180))
_row("FB15k-237", "Trans", 3, (215, 3668, 17986), (179, 1871, 2214))
_row("FB15k-237", "Trans", 4, (219, 4707, 27203), (192, 2627, 3361))
_row("FB15k-237", "Ind", 1, (183, 2000, 5226), (146, 1500, 2404))
_row("FB15k-237", "Ind", 2, (203, 3000, 12085), (176, 2000, 5092))
_row("FB15k-237", "Ind", 3, (218, 4000, 22394), (187, 3000, 9137))
_row("FB15k-237", "Ind", 4, (222, 5000, 33916), (204, 3500, 14554))
_row("NELL-995", "Trans", 1, (14, 3103, 4687), (14, 553, 439))
_row("NELL-995", "Trans", 2, (88, 2564, 8219), (60, 841, 968))
_row("NELL-995", "Trans", 3, (142, 4647, 16393), (94, 1473, 1873))
_row("NELL-995", "Trans", 4, (76, 2092, 7546), (46, 699, 867))
_row("NELL-995", "Ind", 1, (14, 10915, 5540), (14, 225, 1034))
_row("NELL-995", "Ind", 2, (88, 2564, 10109), (79, 4937, 5521))
_row("NELL-995", "Ind", 3, (142, 4047, 20117), (122, 4921, 9668))
_row("NELL-995", "Ind", 4, (77, 2092, 9089), (61, 3294, 8520))


@dataclass(frozen=True)
class Split:
    dataset: str
    setting: str
    version: int

    @property
    def label(self) -> str:
        return f"{self.dataset} {self.setting}-V{self.version}"

    def directory(self, root: Path, part: str) -> Path:
        base = f"{DATASETS[self.dataset]}_v{self.version}"
        if self.setting == "Ind" and part == "test":
            base += "_ind"
        return Path(root) / base

    def files(self, root: Path | None = None, part: str = "train") -> list[Path]:
        if part not in PARTS:
            raise ValueError(f"part must be one of {PARTS}")
        root = data_root() if root is None else Path(root)
        d = self.directory(root, part)
        if self.setting == "Trans":
            return [d / f"{part}.txt"]
        return [d / "train.txt", d / "valid.txt", d / "test.txt"]

    def available(self, root: Path | None = None) -> bool:
        return all(p.is_file() for part in PARTS for p in self.files(root, part))

    def expected(self) -> tuple[GraphStats, GraphStats]:
        return PUBLISHED_STATS[(self.dataset, self.setting, self.version)]


def all_splits() -> list[Split]:
    return [Split(*key) for key in PUBLISHED_STATS]


def parse_split(text: str) -> Split:
    """Parse ``FB15k-237/Ind-V1`` (also ``FB15k-237:Ind:1``)."""
    norm = text.replace(":", "/").replace(" ", "/")
    parts = [p for p in norm.split("/") if p]
    try:
        if len(parts) == 2:
            setting, version = parts[1].split("-V")
            parts = [parts[0], setting, version]
        dataset, setting, version = parts
        version = int(version.lstrip("vV"))
    except ValueError:
        raise ValueError(f"cannot parse split {text!r}; expected e.g. 'FB15k-237/Ind-V1'") from None
    matches = [d for d in DATASETS if d.lower() == dataset.lower() or DATASETS[d].lower() == dataset.lower()]
    setting = setting.capitalize()
    if not matches or setting not in SETTINGS or (matches[0], setting, version) not in PUBLISHED_STATS:
        raise ValueError(f"unknown split {text!r}")
    return Split(matches[0], setting, version)


def data_root() -> Path:
    return Path(os.environ.get("CONTEXT_POOL_DATA", "data")).expanduser()
