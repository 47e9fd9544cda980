"""Three-level land cover label hierarchy, filtering operators, and compaction.

Leaves (level-3 labels) map bijectively to single printable ASCII characters
so stored label sets compact to short strings. A representative subset of the
CORINE 2018 nomenclature ships as the default hierarchy.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass
from enum import Enum
from typing import AbstractSet, Iterable

_FIRST_CHAR = 0x21  # '!'
_MAX_LEAVES = 94  # printable ASCII budget


class UnknownLabel(KeyError):
    """A label or hierarchy node id that the hierarchy does not know."""


class Operator(str, Enum):
    NONE = "none"  # pass-through: no label filtering
    SOME = "some"  # at least one selected label present
    EXACTLY = "exactly"  # exact set equality
    AT_LEAST_AND_MORE = "at_least_and_more"  # all selected labels, extras allowed


def matches_labels(operator: Operator, selected: AbstractSet[str],
                   patch_labels: AbstractSet[str]) -> bool:
    """Set-theoretic operator semantics; no hierarchy knowledge needed."""
    if operator is Operator.NONE:
        return True
    if operator is Operator.SOME:
        return bool(selected & patch_labels)
    if operator is Operator.EXACTLY:
        return set(selected) == set(patch_labels)
    if operator is Operator.AT_LEAST_AND_MORE:
        return set(selected) <= set(patch_labels)
    raise ValueError(f"unknown operator {operator!r}")


@dataclass(frozen=True)
class LabelPredicate:
    operator: Operator
    selected: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.operator is not Operator.NONE and not self.selected:
            raise ValueError(f"operator {self.operator.value!r} requires a non-empty selection")
        object.__setattr__(self, "selected", frozenset(self.selected))

    def matches(self, patch_labels: AbstractSet[str]) -> bool:
        return matches_labels(self.operator, self.selected, patch_labels)


PREDICATE_PASS_ALL = LabelPredicate(Operator.NONE)

# L1 group -> base hue (degrees). Greens for forests, blues for water,
# reds for urban; anything else gets a deterministic fallback.
_GROUP_HUES = {
    "Artificial surfaces": 0.0,
    "Agricultural areas": 45.0,
    "Forest and semi natural areas": 120.0,
    "Wetlands": 175.0,
    "Water bodies": 215.0,
}


class LabelHierarchy:
    """Level-1 groups -> level-2 groups -> level-3 leaves, plus leaf compaction.

    Node ids are names. A few CLC names repeat across levels (e.g. "Pastures"
    is both a level-2 group and its only leaf); id resolution prefers the most
    specific level: leaf, then level-2, then level-1.
    """

    def __init__(self, tree: Iterable[tuple[str, Iterable[tuple[str, Iterable[str]]]]]):
        self.level1: dict[str, tuple[str, ...]] = {}
        self.level2: dict[str, tuple[str, ...]] = {}
        self.leaf_parent: dict[str, str] = {}
        self.group_parent: dict[str, str] = {}
        for l1, groups in tree:
            if l1 in self.level1:
                raise ValueError(f"duplicate level-1 group {l1!r}")
            l2_names = []
            for l2, leaves in groups:
                if l2 in self.level2:
                    raise ValueError(f"duplicate level-2 group {l2!r}")
                leaf_names = tuple(leaves)
                for leaf in leaf_names:
                    if leaf in self.leaf_parent:
                        raise ValueError(f"duplicate leaf {leaf!r}")
                    self.leaf_parent[leaf] = l2
                self.level2[l2] = leaf_names
                self.group_parent[l2] = l1
                l2_names.append(l2)
            self.level1[l1] = tuple(l2_names)
        self.leaves: tuple[str, ...] = tuple(sorted(self.leaf_parent))
        if len(self.leaves) > _MAX_LEAVES:
            raise ValueError(f"{len(self.leaves)} leaves exceed the {_MAX_LEAVES}-char budget")
        if not self.leaves:
            raise ValueError("hierarchy has no leaves")
        self.leaf_to_char: dict[str, str] = {
            leaf: chr(_FIRST_CHAR + i) for i, leaf in enumerate(self.leaves)
        }
        self.char_to_leaf: dict[str, str] = {c: leaf for leaf, c in self.leaf_to_char.items()}
        self._colors = self._assign_colors()

    def level1_of(self, leaf: str) -> str:
        return self.group_parent[self.leaf_parent[leaf]]

    def expand_selection(self, picked: AbstractSet[str]) -> frozenset[str]:
        """Union of leaf descendants of the picked node ids (any level)."""
        out: set[str] = set()
        for node in picked:
            if node in self.leaf_parent:
                out.add(node)
            elif node in self.level2:
                out.update(self.level2[node])
            elif node in self.level1:
                for l2 in self.level1[node]:
                    out.update(self.level2[l2])
            else:
                raise UnknownLabel(node)
        return frozenset(out)

    def encode(self, labels: AbstractSet[str]) -> str:
        """Compact ASCII form, characters sorted ascending."""
        try:
            return "".join(sorted(self.leaf_to_char[label] for label in labels))
        except KeyError as exc:
            raise UnknownLabel(exc.args[0]) from None

    def decode(self, encoded: str) -> frozenset[str]:
        try:
            return frozenset(self.char_to_leaf[c] for c in encoded)
        except KeyError as exc:
            raise UnknownLabel(f"unknown label character {exc.args[0]!r}") from None

    def check_labels(self, labels: Iterable[str]) -> None:
        for label in labels:
            if label not in self.leaf_parent:
                raise UnknownLabel(label)

    def _assign_colors(self) -> dict[str, str]:
        by_group: dict[str, list[str]] = {}
        for leaf in self.leaves:
            by_group.setdefault(self.level1_of(leaf), []).append(leaf)
        colors = {}
        l1_order = list(self.level1)
        for group, members in by_group.items():
            if group in _GROUP_HUES:
                hue = _GROUP_HUES[group]
            else:
                hue = (47.0 * l1_order.index(group)) % 360.0
            for rank, leaf in enumerate(members):
                light = 0.35 + 0.3 * (rank / max(1, len(members) - 1)) if len(members) > 1 else 0.5
                r, g, b = colorsys.hls_to_rgb(hue / 360.0, light, 0.65)
                colors[leaf] = "#{:02x}{:02x}{:02x}".format(
                    round(r * 255), round(g * 255), round(b * 255)
                )
        return colors

    def color(self, leaf: str) -> str:
        if leaf not in self._colors:
            raise UnknownLabel(leaf)
        return self._colors[leaf]


# Representative subset of the CORINE 2018 level-1/2/3 nomenclature. Small on
# purpose; full fidelity is a non-goal.
_DEFAULT_TREE: list[tuple[str, list[tuple[str, list[str]]]]] = [
    (
        "Artificial surfaces",
        [
            ("Urban fabric", ["Continuous urban fabric", "Discontinuous urban fabric"]),
            (
                "Industrial, commercial and transport units",
                [
                    "Industrial or commercial units",
                    "Road and rail networks and associated land",
                    "Port areas",
                    "Airports",
                ],
            ),
            (
                "Mine, dump and construction sites",
                ["Mineral extraction sites", "Dump sites", "Construction sites"],
            ),
        ],
    ),
    (
        "Agricultural areas",
        [
            (
                "Arable land",
                ["Non-irrigated arable land", "Permanently irrigated land", "Rice fields"],
            ),
            (
                "Permanent crops",
                ["Vineyards", "Fruit trees and berry plantations", "Olive groves"],
            ),
            ("Pastures", ["Pastures"]),
            (
                "Heterogeneous agricultural areas",
                [
                    "Annual crops associated with permanent crops",
                    "Complex cultivation patterns",
                    "Land principally occupied by agriculture, with significant areas of "
                    "natural vegetation",
                    "Agro-forestry areas",
                ],
            ),
        ],
    ),
    (
        "Forest and semi natural areas",
        [
            ("Forest", ["Broad-leaved forest", "Coniferous forest", "Mixed forest"]),
            (
                "Scrub and/or herbaceous vegetation associations",
                [
                    "Natural grassland",
                    "Moors and heathland",
                    "Sclerophyllous vegetation",
                    "Transitional woodland/shrub",
                ],
            ),
            (
                "Open spaces with little or no vegetation",
                ["Beaches, dunes, sands", "Bare rock", "Sparsely vegetated areas", "Burnt areas"],
            ),
        ],
    ),
    (
        "Wetlands",
        [
            ("Inland wetlands", ["Inland marshes", "Peat bogs"]),
            ("Coastal wetlands", ["Salt marshes", "Salines", "Intertidal flats"]),
        ],
    ),
    (
        "Water bodies",
        [
            ("Inland waters", ["Water courses", "Water bodies"]),
            ("Marine waters", ["Coastal lagoons", "Estuaries", "Sea and ocean"]),
        ],
    ),
]


def default_hierarchy() -> LabelHierarchy:
    return LabelHierarchy(_DEFAULT_TREE)


# --- hierarchy text file ----------------------------------------------------
# One node per line; indentation depth (two spaces per level) gives the level.


def write_hierarchy(hierarchy: LabelHierarchy, path) -> None:
    lines = []
    for l1, l2_names in hierarchy.level1.items():
        lines.append(l1)
        for l2 in l2_names:
            lines.append("  " + l2)
            for leaf in hierarchy.level2[l2]:
                lines.append("    " + leaf)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_hierarchy(path) -> LabelHierarchy:
    tree: list[tuple[str, list[tuple[str, list[str]]]]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            name = line.strip()
            indent = len(line) - len(line.lstrip(" "))
            if indent == 0:
                tree.append((name, []))
            elif indent == 2:
                if not tree:
                    raise ValueError(f"{path}:{lineno}: level-2 node before any level-1 node")
                tree[-1][1].append((name, []))
            elif indent == 4:
                if not tree or not tree[-1][1]:
                    raise ValueError(f"{path}:{lineno}: leaf before any level-2 node")
                tree[-1][1][-1][1].append(name)
            else:
                raise ValueError(f"{path}:{lineno}: bad indentation {indent}")
    return LabelHierarchy(tree)
