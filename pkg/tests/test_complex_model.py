import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from virtual_boundary.complex_model import (
    ChainPoint,
    ComplexError,
    FringeDescriptor,
    Itinerary,
    Wall,
    build_complex,
    develop,
    fringe_angle,
    fringe_pairs,
    fringe_plane_angle,
    gluing_lattice_compatible,
    period_itinerary,
    phi_map,
    reduce,
    roundtrip_sigma,
)
from virtual_boundary.lattice_algebra import Lattice, Scalar

HALF = Fraction(1, 2)


@pytest.fixture(scope="module")
def spec0():
    return build_complex(0)


def test_piece_counts(spec0):
    assert len(spec0.walls) == 9
    assert len(spec0.strips) == 10


def test_thick_walls():
    spec = build_complex(1)
    assert sorted(t for t, w in spec.walls.items() if w.thickness) == ["E2+", "E2-", "E3+", "E3-"]


def test_unthickened_at_zero(spec0):
    assert all(w.thickness == 0 for w in spec0.walls.values())


def test_negative_thickness_rejected():
    with pytest.raises(ComplexError):
        build_complex(-1)


def test_gluings_are_lattice_compatible(spec0):
    assert all(gluing_lattice_compatible(spec0).values())


def test_spec_serializes(spec0):
    doc = json.loads(json.dumps(spec0.to_json()))
    assert len(doc["walls"]) == 9


@pytest.mark.parametrize("side", ["-", "+"])
def test_reduction_counts(spec0, side):
    red = reduce(spec0, side)
    assert len(red.walls) == 5 and len(red.strips) == 5
    assert len(red.graph_vertices) == 4 and len(red.graph_edges) == 4
    assert all(w.dim == 2 for w in red.walls.values())


def test_reduce_rejects_bad_side(spec0):
    with pytest.raises(ComplexError):
        reduce(spec0, "x")


@pytest.mark.parametrize("eps", [0, Fraction(1, 10), 1])
@pytest.mark.parametrize("side", ["-", "+"])
def test_all_fringe_pairs_quarter_turn(eps, side):
    red = reduce(build_complex(eps), side)
    pairs = fringe_pairs(red)
    assert len(pairs) == 5
    for wall, a, b in pairs:
        ang = fringe_angle(red.walls[wall], a, b)
        assert ang.cos_sq == Scalar(HALF)


def test_first_wall_fringe_directions(spec0):
    w = reduce(spec0, "-").walls["E1-"]
    dirs = {f.strip: f.directions[0] for f in w.fringes}
    a, b = dirs["C0-"], dirs["C1-"]
    # one family along (1, -1), the other along (1, 0)
    assert a[0] == -a[1] and b[1] == 0


def test_thick_wall_faces():
    w = reduce(build_complex(1), "-").walls["E2-"]
    faces = {f.strip: f.face for f in w.fringes}
    assert faces["C1-"] == 0
    assert faces["C2-"] == 1


def test_shared_wall_fringes_orthogonal(spec0):
    assert fringe_plane_angle(spec0.walls["Ex"], "Cx-", "Cx+").is_right_angle()


def test_parallel_mock_is_degenerate():
    f = FringeDescriptor("A", 0, ((Scalar(1), Scalar(0)),), (Scalar(0), Scalar(0)), Scalar(0), Scalar(1),
                         (Scalar(1), Scalar(0)))
    g = FringeDescriptor("B", 0, ((Scalar(2), Scalar(0)),), (Scalar(0), Scalar(0)), Scalar(0), Scalar(1),
                         (Scalar(1), Scalar(0)))
    w = Wall("mock", Lattice.standard(2), Scalar(0), (f, g), reduced=True)
    ang = fringe_angle(w)
    assert ang.degenerate and ang.radians == 0.0


def test_single_fringe_wall_rejected():
    f = FringeDescriptor("A", 0, ((Scalar(1), Scalar(0)),), (Scalar(0), Scalar(0)), Scalar(0), Scalar(1),
                         (Scalar(1), Scalar(0)))
    with pytest.raises(ComplexError):
        fringe_angle(Wall("mock", Lattice.standard(2), Scalar(0), (f,), reduced=True))


@pytest.mark.parametrize("eps", [0, Fraction(1, 10), 1])
def test_period_itinerary_develops(eps):
    ch = develop(period_itinerary("-", 1), eps)
    assert [p.tag for p in ch.pieces] == ["E0-", "C0-", "E1-", "C1-", "E2-", "C2-", "E3-", "C3-", "E0-"]
    assert ch.marked_walls() == [0, 2, 4, 6, 8]


def test_single_piece_itinerary():
    ch = develop(Itinerary("-", ("E0-",)), 0)
    assert len(ch.pieces) == 1 and ch.transitions == ()


def test_invalid_adjacency_rejected():
    with pytest.raises(ComplexError):
        develop(Itinerary("-", ("E0-", "C1-", "E1-")), 0)
    with pytest.raises(ComplexError):
        develop(Itinerary("-", ("E0-", "E1-")), 0)


def test_develop_deterministic():
    a = develop(period_itinerary("+", 2), Fraction(1, 2))
    b = develop(period_itinerary("+", 2), Fraction(1, 2))
    assert a == b


@given(st.fractions(-5, 5, max_denominator=9), st.integers(-3, 3))
def test_roundtrip_identity(a, b):
    ch = develop(period_itinerary("-", 1), 0)
    x = Scalar(a, b)
    assert roundtrip_sigma(ch, x) == x


def test_marked_points_continuous_in_eps():
    base = develop(period_itinerary("-", 1), 0)
    for eps in (Fraction(1, 1000), Fraction(1, 100)):
        ch = develop(period_itinerary("-", 1), eps)
        for p0, p1 in zip(base.pieces, ch.pieces):
            if p0.marked_in is None:
                continue
            # only the slab face moves, by at most eps
            for x0, x1 in zip(p0.marked_in, p1.marked_in):
                assert abs(float(x0) - float(x1)) <= float(eps) + 1e-15


# --- stretch map ---------------------------------------------------------------


def _chains(delta):
    return develop(period_itinerary("-", 1), 0), develop(period_itinerary("-", 1), delta)


def test_phi_identity_on_walls():
    c0, cd = _chains(Fraction(1, 2))
    p = ChainPoint(0, (0.3, -0.2, 0.0))
    assert phi_map(p, c0, cd) == p


def test_phi_zero_delta_is_identity():
    c0, _ = _chains(0)
    p = ChainPoint(5, (0.4, 0.25))
    assert phi_map(p, c0, c0) == p


def test_phi_strip_boundary_goes_to_slab():
    c0, cd = _chains(Fraction(1, 2))
    idx = [p.tag for p in c0.pieces].index("C2-")
    img = phi_map(ChainPoint(idx, (0.7, 0.0)), c0, cd)
    assert img.piece == idx - 1 and img.coords[2] == pytest.approx(0.0)
    img = phi_map(ChainPoint(idx, (0.7, 1.0)), c0, cd)
    assert img.piece == idx + 1 and img.coords[2] == pytest.approx(0.0)


def test_phi_stretches_interval_coordinate():
    delta = 0.5
    c0, cd = _chains(Fraction(1, 2))
    idx = [p.tag for p in c0.pieces].index("C2-")
    a = phi_map(ChainPoint(idx, (0.1, 0.4)), c0, cd)
    b = phi_map(ChainPoint(idx, (0.1, 0.6)), c0, cd)
    assert a.piece == b.piece == idx
    assert abs(b.coords[1] - a.coords[1]) == pytest.approx((1 + 2 * delta) * 0.2)


def test_phi_isometric_on_unstretched_strips():
    c0, cd = _chains(Fraction(1, 2))
    idx = [p.tag for p in c0.pieces].index("C1-")
    p = ChainPoint(idx, (0.9, 0.3))
    assert phi_map(p, c0, cd) == p


def test_phi_rejects_points_outside():
    c0, cd = _chains(Fraction(1, 2))
    with pytest.raises(ComplexError):
        phi_map(ChainPoint(99, (0.0, 0.0)), c0, cd)
    with pytest.raises(ComplexError):
        phi_map(ChainPoint(1, (0.0, 2.0)), c0, cd)
