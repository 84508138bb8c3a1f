from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from virtual_boundary.free_words import FreeWord
from virtual_boundary.geometric_data import (
    VERTEX_TAGS,
    GraphEdgeData,
    GraphError,
    GraphWord,
    MetricGraph,
    check_loop,
    compare_data,
    euclidean_data,
    mls,
    recover_coordinates,
    shortest_word,
    translation_vector,
    twisted_fixture,
    vertex_quotient_graph,
)
from virtual_boundary.lattice_algebra import Scalar
from virtual_boundary.oracles import tree_displacement

from strategies import nonzero_rationals, rationals

ONE = Scalar(1)
EMPTY = FreeWord()


def dumbbell(a=ONE, b=ONE, arc=ONE):
    edges = (
        GraphEdgeData("l1", "p", "p", a, 1),
        GraphEdgeData("l2", "q", "q", b, 2),
        GraphEdgeData("arc", "p", "q", arc),
    )
    loops = ((1, GraphWord((("l1", 1),))), (2, GraphWord((("arc", 1), ("l2", 1), ("arc", -1)))))
    return MetricGraph(("p", "q"), edges, "p", loops)


free2 = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8).map(lambda t: FreeWord(tuple(t)))


# --- mls ---------------------------------------------------------------


def test_single_loop_length():
    g = MetricGraph(("p",), (GraphEdgeData("l", "p", "p", Scalar(3, 1), 1),), "p", ((1, GraphWord((("l", 1),))),))
    assert mls(g, GraphWord((("l", 1),))) == Scalar(3, 1)


def test_dumbbell_product_is_four():
    g = dumbbell()
    w = FreeWord((1, 2))
    assert mls(g, w) == 4
    assert tree_displacement(g, g.word_to_loop(w)) == 4


def test_trivial_word_has_zero_length():
    g = dumbbell()
    assert mls(g, EMPTY) == 0
    assert mls(g, FreeWord((1, 2, -2, -1))) == 0


def test_non_loop_rejected():
    g = dumbbell()
    with pytest.raises(GraphError):
        check_loop(g, GraphWord((("arc", 1),)))
    with pytest.raises(GraphError):
        mls(g, GraphWord((("l2", 1),)))


def test_nonpositive_edge_rejected():
    with pytest.raises(GraphError):
        MetricGraph(("p",), (GraphEdgeData("l", "p", "p", Scalar(0), 1),), "p")


@given(free2, free2)
def test_conjugation_invariance(v, u):
    g = dumbbell(Scalar(1), Scalar(Fraction(1, 2)), Scalar(0, 1))
    assert mls(g, u * v * u.inverse()) == mls(g, v)


@given(free2, st.integers(-3, 3))
def test_powers_scale(w, k):
    g = dumbbell(Scalar(2), Scalar(Fraction(1, 3)))
    assert mls(g, w**k) == abs(k) * mls(g, w)


@given(free2)
def test_matches_cover_oracle(w):
    g = dumbbell(Scalar(1), Scalar(Fraction(1, 2)), Scalar(0, 1))
    assume(len(w) <= 4)
    assert mls(g, w) == tree_displacement(g, g.word_to_loop(w), radius=5)


@given(free2)
def test_zero_only_for_trivial(w):
    g = dumbbell()
    assert (mls(g, w) == 0) == (len(w) == 0)


# --- vertex graphs ---------------------------------------------------------------


def test_v1_is_a_dumbbell():
    g = vertex_quotient_graph("V1-", 0)
    circles = sorted(e.length for e in g.edges if e.letter is not None)
    arcs = [e for e in g.edges if e.letter is None]
    assert circles == [Scalar(Fraction(1, 2)), Scalar(1)]
    assert len(arcs) == 1 and arcs[0].tail != arcs[0].head


def test_v0_has_three_loops():
    g = vertex_quotient_graph("V0-", 0)
    assert len(g.generator_loops) == 3


@pytest.mark.parametrize("tag", VERTEX_TAGS)
def test_arcs_have_unit_length(tag):
    for eps in (0, Fraction(1, 2)):
        g = vertex_quotient_graph(tag, eps)
        assert all(e.length == 1 for e in g.edges if e.letter is None)


def test_slabs_recorded_but_dangling():
    g = vertex_quotient_graph("V2-", Fraction(1, 2))
    assert {s["wall"] for s in g.slabs} == {"E2-", "E3-"}
    assert all(s["dangling"] for s in g.slabs)
    assert all(s["thickness"] == 0 for s in vertex_quotient_graph("V2-", 0).slabs)


def test_unknown_vertex():
    with pytest.raises(GraphError):
        vertex_quotient_graph("V9-")


# --- translation vectors ---------------------------------------------------------------


def test_basis_translation():
    data = euclidean_data("V1-")
    assert translation_vector("V1-", (EMPTY, (1, 0)), data) == (1, 0)
    assert translation_vector("V1-", (EMPTY, (-1, 2)), data) == (-1, 2)


@given(free2, free2, st.tuples(st.integers(-5, 5), st.integers(-5, 5)), st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
def test_translation_is_a_homomorphism(u, v, a, b):
    data = euclidean_data("V1-")
    both = translation_vector("V1-", (u * v, tuple(x + y for x, y in zip(a, b))), data)
    apart = [x + y for x, y in zip(translation_vector("V1-", (u, a), data), translation_vector("V1-", (v, b), data))]
    assert list(both) == apart


def test_graph_word_input_matches_free_word():
    g = vertex_quotient_graph("V1-")
    data = euclidean_data("V1-")
    w = FreeWord((2, 2, -1))
    assert translation_vector("V1-", (g.word_to_loop(w), (0, 0)), data) == translation_vector("V1-", (w, (0, 0)), data)


def test_twisted_fixture():
    data = twisted_fixture()
    assert translation_vector("twisted", (FreeWord((1,)), (0,)), data) == (Fraction(1, 2),)
    assert translation_vector("twisted", (FreeWord((2,)), (3,)), data) == (3,)


# --- comparison across thickness ---------------------------------------------------------------


@pytest.mark.parametrize("delta", [Fraction(1, 10), Fraction(1, 2), 1])
def test_compare_data_constant_ratio(delta):
    c = compare_data(delta)
    assert c.passed and c.t_equal
    assert all(v.ratio == 1.0 and v.spread <= 1e-9 and v.exact for v in c.vertices)
    assert all(v.words >= 20 for v in c.vertices)


def test_compare_data_at_zero():
    c = compare_data(0)
    assert c.passed and set(c.lambdas.values()) == {1.0}


def test_compare_data_negative_rejected():
    with pytest.raises(GraphError):
        compare_data(-1)


def test_shortest_word_unchanged_by_thickening():
    for tag in ("V1-", "V2+"):
        assert shortest_word(tag, 0) == shortest_word(tag, Fraction(1, 2))


# --- coordinate recovery ---------------------------------------------------------------


def test_recover_basis_vector():
    assert recover_coordinates((0, 1), (1, 0), (1, 0), (0, 1), (1, 0)) == (1, 0)


@given(rationals, rationals, rationals, rationals, nonzero_rationals, nonzero_rationals, st.integers(-5, 5), st.integers(-5, 5))
def test_recover_round_trip(a, b, c, d, m1, m2, h1, h2):
    assume(a * d - b * c != 0)
    xi1, xi2 = (a, b), (c, d)
    tau1 = (-m1 * b, m1 * a)  # vanishes on xi1
    tau2 = (-m2 * d, m2 * c)
    gamma = tuple(h1 * x + h2 * y for x, y in zip(xi1, xi2))
    assert recover_coordinates(tau1, tau2, xi1, xi2, gamma) == (h1, h2)
    scaled = recover_coordinates(tuple(3 * t for t in tau1), tuple(Fraction(2, 7) * t for t in tau2), xi1, xi2, gamma)
    assert scaled == (h1, h2)


def test_recover_rejects_bad_functionals():
    with pytest.raises(ValueError):
        recover_coordinates((1, 0), (0, 1), (1, 0), (0, 1), (1, 1))
    with pytest.raises(ValueError):
        recover_coordinates((0, 1), (0, 1), (1, 0), (1, 0), (1, 1))
