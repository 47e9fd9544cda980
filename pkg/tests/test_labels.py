from itertools import chain, combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hashcube.labels import (
    LabelHierarchy,
    LabelPredicate,
    Operator,
    UnknownLabel,
    default_hierarchy,
    matches_labels,
    read_hierarchy,
    write_hierarchy,
)


def _subsets(universe):
    return [
        frozenset(c) for c in chain.from_iterable(
            combinations(universe, k) for k in range(len(universe) + 1)
        )
    ]


class TestExpandSelection:
    def test_forest_group_expands_to_three_leaves(self):
        h = default_hierarchy()
        assert h.expand_selection({"Forest"}) == {
            "Broad-leaved forest",
            "Coniferous forest",
            "Mixed forest",
        }

    def test_leaf_maps_to_itself(self):
        h = default_hierarchy()
        assert h.expand_selection({"Airports"}) == {"Airports"}

    def test_level1_equals_union_of_level2_expansions(self):
        h = default_hierarchy()
        for l1, l2_names in h.level1.items():
            if l1 in h.leaf_parent:  # name shadowed by a leaf resolves to the leaf
                continue
            expect = frozenset()
            for l2 in l2_names:
                expect |= h.expand_selection({l2}) if l2 not in h.leaf_parent else frozenset(
                    h.level2[l2]
                )
            assert h.expand_selection({l1}) == expect

    def test_unknown_id_rejected(self):
        with pytest.raises(UnknownLabel):
            default_hierarchy().expand_selection({"Lava fields"})

    def test_most_specific_level_wins_on_name_collision(self):
        h = default_hierarchy()
        # "Pastures" is both a level-2 group and its only leaf
        assert h.expand_selection({"Pastures"}) == {"Pastures"}
        # "Water bodies" is a level-1 group and a leaf; the leaf wins
        assert h.expand_selection({"Water bodies"}) == {"Water bodies"}


class TestMatchesLabels:
    def test_some_forest_example(self):
        selected = default_hierarchy().expand_selection({"Forest"})
        assert matches_labels(Operator.SOME, selected, {"Coniferous forest", "Pastures"})
        assert not matches_labels(Operator.SOME, selected, {"Pastures"})

    def test_exactly_airports_example(self):
        assert not matches_labels(Operator.EXACTLY, {"Airports"}, {"Airports", "Pastures"})
        assert matches_labels(Operator.EXACTLY, {"Airports"}, {"Airports"})

    def test_at_least_and_more_coastal_example(self):
        selected = {"Coniferous forest", "Beaches, dunes, sands", "Sea and ocean"}
        assert matches_labels(Operator.AT_LEAST_AND_MORE, selected, selected | {"Bare rock"})
        assert not matches_labels(
            Operator.AT_LEAST_AND_MORE, selected, {"Coniferous forest", "Bare rock"}
        )

    def test_none_passes_everything(self):
        assert matches_labels(Operator.NONE, frozenset(), {"Pastures"})
        assert matches_labels(Operator.NONE, frozenset(), frozenset())

    def test_exhaustive_three_leaf_truth_table(self):
        universe = ("x", "y", "z")
        for selected in _subsets(universe):
            for patch in _subsets(universe):
                assert matches_labels(Operator.SOME, selected, patch) == bool(selected & patch)
                assert matches_labels(Operator.EXACTLY, selected, patch) == (selected == patch)
                assert matches_labels(Operator.AT_LEAST_AND_MORE, selected, patch) == (
                    selected <= patch
                )

    @given(
        st.frozensets(st.sampled_from("abcdef"), max_size=6),
        st.frozensets(st.sampled_from("abcdef"), max_size=6),
    )
    def test_operator_implications(self, selected, patch):
        if matches_labels(Operator.EXACTLY, selected, patch):
            assert matches_labels(Operator.AT_LEAST_AND_MORE, selected, patch)
        if selected and matches_labels(Operator.AT_LEAST_AND_MORE, selected, patch):
            assert matches_labels(Operator.SOME, selected, patch)


class TestLabelPredicate:
    def test_non_none_requires_selection(self):
        with pytest.raises(ValueError):
            LabelPredicate(Operator.SOME, frozenset())

    def test_none_requires_no_selection(self):
        pred = LabelPredicate(Operator.NONE)
        assert pred.matches({"anything"})


class TestEncoding:
    def test_empty_set_is_empty_string(self, toy6):
        assert toy6.encode(frozenset()) == ""

    def test_chars_start_at_bang_in_sorted_leaf_order(self, toy6):
        assert toy6.leaf_to_char == {
            "a1": "!",
            "a2": '"',
            "a3": "#",
            "b1": "$",
            "c1": "%",
            "c2": "&",
        }

    def test_injective_over_all_subsets(self, toy6):
        encodings = {toy6.encode(s) for s in _subsets(toy6.leaves)}
        assert len(encodings) == 2 ** len(toy6.leaves)

    @given(st.frozensets(st.sampled_from(["a1", "a2", "a3", "b1", "c1", "c2"])))
    def test_roundtrip_and_order_insensitivity(self, toy6, labels):
        encoded = toy6.encode(labels)
        assert toy6.decode(encoded) == labels
        assert encoded == "".join(sorted(encoded))

    def test_unknown_label_rejected(self, toy6):
        with pytest.raises(UnknownLabel):
            toy6.encode({"nope"})
        with pytest.raises(UnknownLabel):
            toy6.decode("~")


class TestHierarchyStructure:
    def test_default_hierarchy_shape(self):
        h = default_hierarchy()
        assert len(h.level1) == 5
        assert len(h.leaves) <= 94
        for leaf in h.leaves:
            assert h.leaf_parent[leaf] in h.level2
            assert h.group_parent[h.leaf_parent[leaf]] in h.level1

    def test_duplicate_leaves_rejected(self):
        with pytest.raises(ValueError):
            LabelHierarchy([("L1", [("A", ["x"]), ("B", ["x"])])])

    def test_leaf_budget_enforced(self):
        leaves = [f"leaf{i:03d}" for i in range(95)]
        with pytest.raises(ValueError):
            LabelHierarchy([("L1", [("A", leaves)])])

    def test_colors_reflect_land_cover_family(self):
        h = default_hierarchy()

        def rgb(leaf):
            c = h.color(leaf)
            return int(c[1:3], 16), int(c[3:5], 16), int(c[5:7], 16)

        r, g, b = rgb("Coniferous forest")
        assert g > r and g > b  # forests are green
        r, g, b = rgb("Sea and ocean")
        assert b > r and b > g  # water is blue
        r, g, b = rgb("Continuous urban fabric")
        assert r > g and r > b  # urban is red

    def test_every_leaf_has_hex_color(self, toy6):
        for leaf in toy6.leaves:
            color = toy6.color(leaf)
            assert len(color) == 7 and color.startswith("#")


class TestHierarchyFile:
    def test_roundtrip(self, tmp_path):
        h = default_hierarchy()
        path = tmp_path / "hierarchy.txt"
        write_hierarchy(h, path)
        loaded = read_hierarchy(path)
        assert loaded.level1 == h.level1
        assert loaded.level2 == h.level2
        assert loaded.leaf_to_char == h.leaf_to_char

    def test_bad_indentation_cited(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("Top\n   Three spaces\n")
        with pytest.raises(ValueError, match="bad.txt:2"):
            read_hierarchy(path)
