"""Hypothesis strategies shared by the property suites."""
from fractions import Fraction

from hypothesis import strategies as st

from virtual_boundary.free_words import FreeWord
from virtual_boundary.lattice_algebra import Scalar

small_frac = st.fractions(min_value=-4, max_value=4, max_denominator=4)
scalars = st.builds(Scalar, small_frac, small_frac)
nonzero_scalars = scalars.filter(lambda x: x.sign() != 0)


def int_vectors(dim, lo=-3, hi=3):
    return st.tuples(*[st.integers(lo, hi)] * dim)


def sqrt2_vectors(dim):
    """Coordinates a + b sqrt2 with small integer a, b."""
    coord = st.builds(Scalar, st.integers(-3, 3), st.integers(-3, 3))
    return st.tuples(*[coord] * dim)


def generator_sets(dim, max_size=4, vectors=None):
    return st.lists(int_vectors(dim) if vectors is None else vectors, min_size=0, max_size=max_size)


letters = st.sampled_from([1, -1, 2, -2])
words = st.lists(letters, min_size=0, max_size=6).map(lambda xs: FreeWord(tuple(xs)))
nontrivial_words = st.lists(letters, min_size=1, max_size=6).map(lambda xs: FreeWord(tuple(xs))).filter(bool)
rationals = st.fractions(min_value=-10, max_value=10, max_denominator=12)
nonzero_rationals = rationals.filter(lambda x: x != 0)
positive_rationals = st.fractions(min_value=Fraction(1, 12), max_value=10, max_denominator=12)
