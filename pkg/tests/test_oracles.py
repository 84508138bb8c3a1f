import numpy as np
import pytest

from virtual_boundary.complex_model import Itinerary, develop
from virtual_boundary.free_words import FreeWord
from virtual_boundary.geodesic_engine import shortest_path
from virtual_boundary.oracles import (
    ResidueLattice,
    are_conjugate,
    grid_chain_length,
    maximal_minor_gcd,
    residue_index,
    residue_lattices,
)

SHORT = ("E0-", "C0-", "E1-", "C1-", "E2-")


@pytest.mark.parametrize("eps", [0, 1])
def test_grid_oracle_agrees_on_a_short_chain(eps):
    ch = develop(Itinerary("-", SHORT), eps)
    p, q = (0.3, -0.2, 0.0), (0.1, 0.4, 0.0)
    grid = grid_chain_length(ch, p, q, box=2.0)
    res = shortest_path(ch, p, q)
    assert grid.length == pytest.approx(res.length, abs=1e-6)
    assert grid.length >= res.length - 1e-9  # grid paths are genuine paths
    assert np.allclose(grid.sigmas, res.path.breakpoints, atol=1e-3)


def test_grid_oracle_single_piece():
    ch = develop(Itinerary("-", ("E1-",)), 0)
    assert grid_chain_length(ch, (0, 0, 0), (3, 4, 0)).length == pytest.approx(5.0)


def test_residue_lattice_basics():
    lat = ResidueLattice([(2, 0), (0, 3)], 2, 6)
    assert lat.size == 6
    assert (2, 3) in lat and (1, 0) not in lat
    assert maximal_minor_gcd([(2, 0), (0, 3)], 2) == 6


def test_residue_lattices_reject_low_rank_and_large_moduli():
    assert residue_lattices([(1, 1)], [(1, 0), (0, 1)], 2) is None
    assert residue_lattices([(97, 0), (0, 89)], [(1, 0), (0, 1)], 2, max_modulus=64) is None


def test_residue_index_of_sublattice():
    a, b = residue_lattices([(2, 0), (0, 2)], [(1, 0), (0, 1)], 2)
    assert residue_index(b, a) == 4
    assert residue_index(a, b) is None


def test_conjugator_found_and_absent():
    u = FreeWord((1, 2, 2))
    v = u.conjugate_by(FreeWord((-2, 1)))
    c = are_conjugate(u, v)
    assert c is not None and u.conjugate_by(c) == v
    assert are_conjugate(FreeWord((1,)), FreeWord((2,))) is None
