import json
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from virtual_boundary.lattice_algebra import (
    DimensionMismatch,
    IndexResult,
    Lattice,
    Scalar,
    canonicalize,
    index,
    intersect,
    is_commensurable,
    kernel_sublattice,
    lattice_sum,
)
from virtual_boundary.oracles import ResidueLattice, maximal_minor_gcd, residue_lattices

from strategies import generator_sets, int_vectors, nonzero_scalars, scalars, sqrt2_vectors


def L(*vs, dim=None):
    return canonicalize(vs, ambient_dim=dim)


def ints(v):
    return tuple(int(x.a) for x in v)


# --- Scalar ---------------------------------------------------------------


def test_scalar_sqrt2_squared_is_two():
    r2 = Scalar(0, 1)
    assert r2 * r2 == 2


def test_scalar_sign_opposite_parts():
    assert Scalar(3, -2).sign() == 1  # 3 - 2.83
    assert Scalar(2, -2).sign() == -1
    assert Scalar(-3, 2).sign() == -1


def test_scalar_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        Scalar(0, 0).inverse()


def test_scalar_json_roundtrip():
    x = Scalar(Fraction(-3, 7), Fraction(5, 2))
    assert Scalar.from_json(json.loads(json.dumps(x.to_json()))) == x


@given(scalars, scalars, scalars)
def test_scalar_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + (-x) == 0


@given(nonzero_scalars)
def test_scalar_inverse(x):
    assert x * x.inverse() == 1


@given(scalars, scalars)
def test_scalar_order_matches_float(x, y):
    if abs(float(x) - float(y)) > 1e-12:
        assert (x < y) == (float(x) < float(y))


# --- canonical form ---------------------------------------------------------


def test_canonicalize_echelon_input():
    lat = L((2, 0), (0, 3))
    assert lat.rank == 2
    assert {ints(b) for b in lat.basis} == {(2, 0), (0, 3)}


def test_canonicalize_redundant_generators():
    lat = L((1, 1), (1, -1), (2, 0))
    assert lat == L((1, 1), (1, -1))
    assert lat.rank == 2
    # brute-force membership over small combinations
    for a, b in product(range(-4, 5), repeat=2):
        assert (a + b, a - b) in lat


def test_canonicalize_empty_family():
    assert canonicalize([], ambient_dim=2).rank == 0


def test_canonicalize_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        canonicalize([(1, 0), (1, 0, 0)])


def test_lattice_json_roundtrip():
    r2 = Scalar(0, 1)
    lat = L((r2, 0, 1), (0, r2 + 1, 0))
    assert Lattice.from_json(json.loads(json.dumps(lat.to_json()))) == lat


@given(generator_sets(3, vectors=sqrt2_vectors(3)))
def test_canonicalize_idempotent(gens):
    lat = canonicalize(gens, ambient_dim=3)
    assert canonicalize(lat.basis, ambient_dim=3) == lat


@given(generator_sets(2, vectors=sqrt2_vectors(2)), st.randoms(use_true_random=False))
def test_canonicalize_permutation_invariant(gens, rnd):
    shuffled = list(gens)
    rnd.shuffle(shuffled)
    assert canonicalize(gens, ambient_dim=2) == canonicalize(shuffled, ambient_dim=2)


# --- intersect / sum / index ------------------------------------------------


def test_intersect_cyclic():
    assert intersect(L((2,)), L((3,))) == L((6,))


def test_intersect_independent_lines():
    assert intersect(L((1, 1)), L((1, -1))).rank == 0


def test_sum_cyclic():
    assert lattice_sum(L((2,)), L((3,))) == L((1,))


def test_sum_with_zero():
    lat = L((1, 2), (0, 5))
    assert lattice_sum(lat, Lattice.zero(2)) == lat


def test_index_examples():
    assert index(L((2, 0), (0, 2)), Lattice.standard(2)) == 4
    assert index(L((1, 0)), Lattice.standard(2)) is IndexResult.INFINITE
    assert index(Lattice.standard(2), L((1, 1))) is IndexResult.NOT_SUBLATTICE


def test_commensurable_examples():
    assert is_commensurable(Lattice.standard(2), L((1, 0), (0, 2)))
    assert not is_commensurable(L((1, 1)), L((1, -1)))


def test_operations_reject_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        intersect(Lattice.standard(2), Lattice.standard(3))
    with pytest.raises(DimensionMismatch):
        lattice_sum(Lattice.standard(2), Lattice.standard(3))


def test_kernel_sublattice():
    k = kernel_sublattice(Lattice.standard(3), [(1, 1, 0)])
    assert k == L((1, -1, 0), (0, 0, 1))


def test_sqrt2_lattice_intersection():
    r2 = Scalar(0, 1)
    A = L((r2, 0), (0, 1))
    B = L((1, 0), (0, r2))
    assert intersect(A, B).rank == 0
    C = L((2 * r2, 0), (0, 3))
    assert intersect(A, C) == C


@given(generator_sets(2, vectors=sqrt2_vectors(2)), generator_sets(2, vectors=sqrt2_vectors(2)))
def test_lattice_laws(ga, gb):
    A, B = canonicalize(ga, ambient_dim=2), canonicalize(gb, ambient_dim=2)
    assert intersect(A, B) == intersect(B, A)
    assert lattice_sum(A, B) == lattice_sum(B, A)
    assert intersect(A, A) == A
    assert lattice_sum(A, A) == A
    I, S = intersect(A, B), lattice_sum(A, B)
    assert I.is_sublattice_of(A) and I.is_sublattice_of(B)
    assert A.is_sublattice_of(S) and B.is_sublattice_of(S)


@given(generator_sets(2), generator_sets(2), generator_sets(2))
def test_intersect_and_sum_associative(ga, gb, gc):
    A, B, C = (canonicalize(g, ambient_dim=2) for g in (ga, gb, gc))
    assert intersect(intersect(A, B), C) == intersect(A, intersect(B, C))
    assert lattice_sum(lattice_sum(A, B), C) == lattice_sum(A, lattice_sum(B, C))


@given(generator_sets(2, max_size=3), st.integers(1, 4), st.integers(1, 4))
def test_index_multiplicative(gens, m, k):
    C = canonicalize(gens, ambient_dim=2)
    assume(C.rank == 2)
    B = canonicalize([tuple(m * x for x in b) for b in C.basis], ambient_dim=2)
    A = canonicalize([tuple(k * x for x in b) for b in B.basis] + [tuple(k * m * x for x in C.basis[0])], ambient_dim=2)
    assert index(A, C) == index(A, B) * index(B, C)
    assert index(B, C) == m * m


@given(generator_sets(2, vectors=sqrt2_vectors(2), max_size=3), generator_sets(2, vectors=sqrt2_vectors(2), max_size=3))
def test_intersection_contains_every_enumerated_common_point(ga, gb):
    """Every small combination of A's generators that is also a small combination of B's is in A ∩ B."""
    A, B = canonicalize(ga, ambient_dim=2), canonicalize(gb, ambient_dim=2)
    I = intersect(A, B)

    def combos(gens, R):
        out = set()
        for cs in product(range(-R, R + 1), repeat=len(gens)):
            v = tuple(sum((c * g[i] for c, g in zip(cs, gens)), Scalar(0)) for i in range(2))
            out.add(v)
        return out

    common = combos(ga, 3) & combos(gb, 3)
    for v in common:
        assert v in I


@given(generator_sets(2, max_size=3), generator_sets(2, max_size=3))
def test_lattices_match_residue_oracle(ga, gb):
    pair = residue_lattices(ga, gb, 2, max_modulus=60)
    assume(pair is not None)
    ra, rb = pair
    A, B = canonicalize(ga, ambient_dim=2), canonicalize(gb, ambient_dim=2)
    I, S = intersect(A, B), lattice_sum(A, B)
    mod = ra.modulus
    ri = ResidueLattice([ints(b) for b in I.basis], 2, mod)
    rs = ResidueLattice([ints(b) for b in S.basis], 2, mod)
    assert ri.residues == ra.residues & rb.residues
    assert rs.residues == ResidueLattice(list(ga) + list(gb), 2, mod).residues
    assert index(I, A) == ra.size // ri.size


def test_maximal_minor_gcd_is_covolume():
    assert maximal_minor_gcd([(2, 0), (0, 3), (2, 3)], 2) == 6
    assert maximal_minor_gcd([(1, 1), (2, 2)], 2) == 0


@given(int_vectors(3, -2, 2))
def test_membership_in_standard(v):
    assert v in Lattice.standard(3)
