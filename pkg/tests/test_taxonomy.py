import pytest

from hicl.rng import Xorshift64Star
from hicl.taxonomy import (
    LabelPath,
    LabelTextMode,
    ROOT_ID,
    TaxonomyError,
    loads_taxonomy,
)

from conftest import FIG_TAX_TEXT, MINI_TAX_TEXT


def test_three_node_chain():
    tax = loads_taxonomy("A\tROOT\nA1\tA\n")
    assert tax.depth == 2
    a = tax.resolve_path(["A", "A1"]).node_ids[0]
    assert [tax.node(c).name for c in tax.children_of(a)] == ["A1"]


def test_wos_shaped_counts():
    lines = []
    for i in range(7):
        lines.append(f"top{i}\tROOT")
        for j in range(20 if i < 6 else 14):
            lines.append(f"top{i} sub{j}\ttop{i}")
    tax = loads_taxonomy("\n".join(lines) + "\n")
    assert tax.depth == 2
    assert len(tax.children_of(ROOT_ID)) == 7
    assert len(tax.level_nodes(2)) == 134


def test_self_parent_is_cycle():
    with pytest.raises(TaxonomyError, match="cycle"):
        loads_taxonomy("A\tA\n")


def test_leaf_has_no_children(mini_tax):
    leaf = mini_tax.resolve_path(["CS", "Databases"]).leaf
    assert mini_tax.children_of(leaf) == []


def test_unknown_node_id(mini_tax):
    with pytest.raises(TaxonomyError):
        mini_tax.children_of(9999)


def test_orphan_parent_rejected():
    with pytest.raises(TaxonomyError):
        loads_taxonomy("A\tROOT\nB\tnowhere\n")


def test_duplicate_sibling_names_rejected():
    with pytest.raises(TaxonomyError):
        loads_taxonomy("A\tROOT\nB\tA\nB\tA\n")


def test_ragged_depth_rejected():
    with pytest.raises(TaxonomyError):
        loads_taxonomy("A\tROOT\nA1\tA\nB\tROOT\n")


def test_path_text_examples(fig_tax):
    path = fig_tax.resolve_path(["AI", "speech", "speech recognition"])
    assert fig_tax.path_text(path) == "speech recognition of speech of AI"

    one = loads_taxonomy("X\tROOT\n")
    assert one.path_text(one.leaf_paths()[0]) == "X"

    two = loads_taxonomy("A\tROOT\nB\tA\n")
    assert two.path_text(two.resolve_path(["A", "B"])) == "B of A"


def test_label_text_modes(fig_tax):
    path = fig_tax.resolve_path(["AI", "speech", "speech recognition"])
    assert fig_tax.label_text(path, LabelTextMode.ORIGINAL_LEAF) == "speech recognition"
    assert (
        fig_tax.label_text(path, LabelTextMode.PATH_TEXT)
        == "speech recognition of speech of AI"
    )
    with pytest.raises(TaxonomyError):
        fig_tax.label_text(path, LabelTextMode.DESCRIPTION)
    fig_tax.set_description(path.leaf, "transcribing audio into text")
    assert (
        fig_tax.label_text(path, LabelTextMode.DESCRIPTION)
        == "transcribing audio into text"
    )


def test_parent_child_and_level_consistency(mini_tax):
    for level in range(1, mini_tax.depth + 1):
        for nid in mini_tax.level_nodes(level):
            node = mini_tax.node(nid)
            assert node.level == level
            assert nid in mini_tax.children_of(node.parent)
            if node.parent != ROOT_ID:
                assert mini_tax.node(node.parent).level == level - 1


def test_validate_path_rejects_non_edges(mini_tax):
    cs = mini_tax.resolve_path(["CS", "Databases"]).node_ids[0]
    genetics = mini_tax.resolve_path(["Biology", "Genetics"]).leaf
    with pytest.raises(TaxonomyError):
        mini_tax.validate_path(LabelPath((cs, genetics)))
    with pytest.raises(TaxonomyError):
        mini_tax.validate_path(LabelPath((cs,)))  # wrong length


def test_path_text_injective_on_random_trees():
    rng = Xorshift64Star(11)
    for _ in range(20):
        lines = []
        for i in range(rng.randint(2, 4)):
            lines.append(f"n{i}\tROOT")
            for j in range(rng.randint(1, 3)):
                lines.append(f"n{i} c{j}\tn{i}")
        tax = loads_taxonomy("\n".join(lines) + "\n")
        texts = [tax.path_text(p) for p in tax.leaf_paths()]
        assert len(set(texts)) == len(texts)


def test_serialize_round_trip(fig_tax):
    path = fig_tax.resolve_path(["CS", "databases", "relational databases"])
    fig_tax.set_description(path.leaf, "tables with relations")
    reloaded = loads_taxonomy(fig_tax.dumps())
    assert reloaded.dumps() == fig_tax.dumps()
    assert reloaded.depth == fig_tax.depth
    assert [reloaded.node(n).name for n in reloaded.level_nodes(1)] == [
        fig_tax.node(n).name for n in fig_tax.level_nodes(1)
    ]
    re_leaf = reloaded.resolve_path(["CS", "databases", "relational databases"]).leaf
    assert reloaded.description_of(re_leaf) == "tables with relations"


def test_duplicate_leaf_names_allowed_across_branches():
    # sibling names must be unique, but cousins may collide; parents are then
    # referenced by full path
    text = "A\tROOT\nB\tROOT\nsub\tA\nsub\tB\nx\tA/sub\ny\tB/sub\n"
    tax = loads_taxonomy(text)
    assert tax.depth == 3
    assert len(tax.leaf_paths()) == 2


def test_mini_fixtures_parse():
    assert loads_taxonomy(MINI_TAX_TEXT).depth == 2
    assert loads_taxonomy(FIG_TAX_TEXT).depth == 3
