import json
import time

import pytest
from hypothesis import given
from hypothesis import strategies as st

from virtual_boundary.free_words import FreeWord, gen
from virtual_boundary.group_model import (
    MUTATIONS,
    SELF_CLAUSE_NOTE,
    AdmissibilityError,
    EdgeInclusion,
    GraphEdge,
    GraphOfGroups,
    MalformedGraph,
    VertexGroup,
    build_example_graph,
    check_admissible,
    commensurability_subgraph,
    default_spanning_tree,
    edge_core,
    is_saturated,
    is_spanning_tree,
    presentation,
)
from virtual_boundary.lattice_algebra import Lattice, Scalar, canonicalize

x1, x2 = gen(1), gen(2)
ONE = FreeWord()


@pytest.fixture(scope="module")
def example():
    return build_example_graph()


def vertex(label, free=2, a=2):
    return VertexGroup(label, free, Lattice.standard(a))


def edge(label, minus_vertex, minus_imgs, plus_vertex, plus_imgs, rank=None):
    rank = rank or len(minus_imgs)
    return GraphEdge(
        label,
        Lattice.standard(rank),
        EdgeInclusion(label, "-", minus_vertex, tuple(minus_imgs)),
        EdgeInclusion(label, "+", plus_vertex, tuple(plus_imgs)),
    )


def one_edge_graph():
    imgs = [(x1, (0,)), (ONE, (1,))]
    return GraphOfGroups((vertex("A", a=1), vertex("B", a=1)), (edge("e", "A", imgs, "B", imgs),))


def loop_graph():
    imgs = [(x1, (0,)), (ONE, (1,))]
    return GraphOfGroups((vertex("A", a=1),), (edge("e", "A", imgs, "A", [(x2, (0,)), (ONE, (1,))]),))


# --- the example ---------------------------------------------------------------


def test_counts(example):
    assert len(example.vertices) == 8
    assert len(example.edges) == 9


def test_free_ranks(example):
    assert example.vertex("V0-").free_rank == 3
    assert example.vertex("V1-").free_rank == 2
    assert example.vertex("V0+").free_rank == 3
    assert all(v.center.rank == 2 for v in example.vertices)


def test_example_is_admissible_rank_three(example):
    t = time.perf_counter()
    rep = check_admissible(example, 3)
    assert time.perf_counter() - t < 5
    assert rep.passed and rep.failing() == []
    assert SELF_CLAUSE_NOTE in rep.notes


@pytest.mark.parametrize("k", [2, 4])
def test_wrong_rank_fails_rank_conditions(example, k):
    failing = check_admissible(example, k).failing()
    assert "i" in failing and "ii" in failing


@pytest.mark.parametrize("name", sorted(MUTATIONS))
def test_each_mutation_breaks_its_condition(example, name):
    rep = check_admissible(MUTATIONS[name](example), 3)
    assert rep.failing() == [name]
    assert rep.conditions[name].witnesses


def test_edge_cores_are_lines(example):
    r2 = Scalar(0, 1)
    for e in example.edges:
        core = edge_core(example, e.label, strict=True)
        assert core.rank == 1
    assert edge_core(example, "E1-").basis[0] == (Scalar(0), Scalar(0), r2)


def test_edge_core_relabel_invariant(example):
    e = example.edge("E1-")
    b = e.lattice.basis
    # change basis by (b0, b1, b2) -> (b0 + b2, b1, b2) and transport the images
    new_lat = canonicalize([tuple(x + z for x, z in zip(b[0], b[2])), b[1], b[2]], ambient_dim=3)
    assert new_lat == e.lattice

    def moved(inc):
        (w0, v0), rest, (w2, v2) = inc.images[0], inc.images[1], inc.images[2]
        return EdgeInclusion(inc.edge, inc.end, inc.vertex,
                             ((w0 * w2, tuple(p + q for p, q in zip(v0, v2))), rest, (w2, v2)))

    relabeled = GraphEdge("E1-", e.lattice, moved(e.minus), moved(e.plus))
    g2 = GraphOfGroups(example.vertices, tuple(relabeled if x.label == "E1-" else x for x in example.edges))
    assert edge_core(g2, "E1-") == edge_core(example, "E1-")


def test_rank_two_core_flagged():
    a = [(x1, (0, 0, 0)), (ONE, (1, 0, 0)), (ONE, (0, 1, 0)), (ONE, (0, 0, 1))]
    b = [(ONE, (1, 0, 0)), (x1, (0, 0, 0)), (ONE, (0, 1, 0)), (ONE, (0, 0, 1))]
    g = GraphOfGroups((vertex("A", a=3), vertex("B", a=3)), (edge("e", "A", a, "B", b),))
    assert edge_core(g, "e").rank == 2
    with pytest.raises(AdmissibilityError):
        edge_core(g, "e", strict=True)


def test_subgraph_from_minus_side(example):
    sub = commensurability_subgraph(example, "E1-")
    assert sub.vertices == ("V0-", "V1-", "V2-", "V3-")
    assert sub.edges == ("E0-", "E1-", "E2-", "E3-")


def test_subgraph_from_plus_side_is_mirror(example):
    sub = commensurability_subgraph(example, "E1+")
    assert sub.vertices == ("V0+", "V1+", "V2+", "V3+")
    assert sub.edges == ("E0+", "E1+", "E2+", "E3+")


def test_subgraph_of_shared_edge(example):
    sub = commensurability_subgraph(example, "Ex")
    assert "Ex" in sub.edges
    assert set(sub.vertices) == {"V0-", "V0+"}


def test_unknown_seed(example):
    with pytest.raises(KeyError):
        commensurability_subgraph(example, "nope")


# --- presentations ---------------------------------------------------------------


def test_amalgam_has_no_stable_letters():
    p = presentation(one_edge_graph(), ("e",))
    assert p.stable_letters == ()
    assert "A.x1 = B.x1" in p.relations


def test_loop_has_one_stable_letter():
    p = presentation(loop_graph(), ())
    assert p.stable_letters == ("t_e",)
    assert any(r.startswith("t_e (A.x1) t_e^-1") for r in p.relations)


def test_stable_letters_count_cycles(example):
    tree = default_spanning_tree(example)
    assert is_spanning_tree(example, tree)
    p = presentation(example, tree)
    # independent count of cycles: edges minus vertices plus one component
    assert len(p.stable_letters) == len(example.edges) - len(example.vertices) + 1
    assert example.betti_number() == len(p.stable_letters)


def test_bad_tree_rejected(example):
    with pytest.raises(MalformedGraph):
        presentation(example, ("E0-",))


# --- validation and serialization ---------------------------------------------------------------


def test_json_roundtrip(example):
    doc = json.loads(json.dumps(example.to_json()))
    back = GraphOfGroups.from_json(doc)
    assert back == example
    assert check_admissible(back, 3).passed


def test_report_serializes(example):
    doc = json.loads(json.dumps(check_admissible(example, 3).to_json()))
    assert doc["passed"] is True and set(doc["conditions"]) == {"i", "ii", "iii", "iv"}


def test_unknown_vertex_rejected():
    g = GraphOfGroups((vertex("A", a=1),), (edge("e", "A", [(x1, (0,)), (ONE, (1,))], "Z", [(x1, (0,)), (ONE, (1,))]),))
    with pytest.raises(MalformedGraph):
        g.validate()


def test_wrong_vector_length_rejected():
    g = GraphOfGroups((vertex("A", a=1), vertex("B", a=1)),
                      (edge("e", "A", [(x1, (0, 0)), (ONE, (1, 0))], "B", [(x1, (0,)), (ONE, (1,))]),))
    with pytest.raises(MalformedGraph):
        check_admissible(g, 2)


def test_noncommuting_images_rejected():
    g = GraphOfGroups((vertex("A", a=1), vertex("B", a=1)),
                      (edge("e", "A", [(x1, (0,)), (x2, (1,))], "B", [(x1, (0,)), (ONE, (1,))]),))
    with pytest.raises(MalformedGraph):
        g.validate()


def test_letter_beyond_free_rank_rejected():
    g = GraphOfGroups((vertex("A", a=1), vertex("B", a=1)),
                      (edge("e", "A", [(gen(3), (0,)), (ONE, (1,))], "B", [(x1, (0,)), (ONE, (1,))]),))
    with pytest.raises(MalformedGraph):
        g.validate()


def test_non_injective_rejected():
    g = GraphOfGroups((vertex("A", a=1), vertex("B", a=1)),
                      (edge("e", "A", [(x1, (0,)), (x1, (0,))], "B", [(x1, (0,)), (ONE, (1,))]),))
    with pytest.raises(MalformedGraph):
        g.validate()


def test_duplicate_labels_rejected():
    imgs = [(x1, (0,)), (ONE, (1,))]
    g = GraphOfGroups((vertex("A", a=1), vertex("A", a=1)), (edge("e", "A", imgs, "A", imgs),))
    with pytest.raises(MalformedGraph):
        g.validate()


def test_edgeless_graph_fails_structure():
    rep = check_admissible(GraphOfGroups((vertex("A"),), ()), 3)
    assert not rep.structure.passed and not rep.passed


# --- saturation ---------------------------------------------------------------


@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=3),
       st.integers(2, 5))
def test_scaled_span_is_not_saturated(rows, k):
    lat = canonicalize([tuple(Scalar(x) for x in r) for r in rows], ambient_dim=3)
    if lat.rank == 0:
        return
    assert not is_saturated([tuple(k * x for x in r) for r in rows])


def test_saturation_examples():
    assert is_saturated([(1, 0, 0), (0, 1, 0)])
    assert not is_saturated([(2, 0), (0, 1)])
    assert is_saturated([(2, 3)])
