"""Flat tori, gluing cylinders and developed chains of walls and strips.

Every wall is a (possibly thickened) flat 3-torus with coordinates
``(r, s, t; u)``; every cylinder has coordinates ``(s, t; u)`` with
``u in [0, 1]``.  An attachment row says that the cylinder end ``u = end``
is glued to the wall by ``(s, t) -> s * col_s + t * col_t`` on the face
``u = face``.  Cylinder coordinates are arclength, so ``col_s`` and
``col_t`` are orthonormal and every gluing is an isometry.

Reducing a side deletes the direction that generates the common circle
factor (the wall ``t`` axis, or for the shared wall ``Ex`` the axis of that
side's circle), leaving planar walls with line fringes.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import acos, sqrt
from typing import Sequence

from .lattice_algebra import (
    SQRT2,
    Lattice,
    Scalar,
    canonicalize,
    dot,
    kernel_sublattice,
    vec,
)

Vec = tuple[Scalar, ...]

ZERO = Scalar(0)
ONE = Scalar(1)
HALF_SQRT2 = SQRT2 / 2  # 1/sqrt(2)

SIDES = ("-", "+")


class ComplexError(ValueError):
    pass


# ---------------------------------------------------------------------------
# small exact vector helpers
# ---------------------------------------------------------------------------


def vadd(a: Sequence[Scalar], b: Sequence[Scalar]) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence[Scalar], b: Sequence[Scalar]) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a: Sequence[Scalar]) -> Vec:
    c = Scalar.of(c)
    return tuple(c * x for x in a)


def cross3(a: Sequence[Scalar], b: Sequence[Scalar]) -> Vec:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def sqrt_scalar(x: Scalar) -> Scalar:
    """Exact square root inside Q(sqrt 2); raises if it does not exist there."""
    if x.sign() < 0:
        raise ValueError("negative radicand")
    if not x:
        return ZERO
    root = sqrt(float(x))
    conj = float(x.conjugate())
    # p + q r2 = root and p - q r2 = +-sqrt(conjugate)
    rcs = [sqrt(conj), -sqrt(conj)] if conj >= 0 else []
    for rc in rcs:
        p = Fraction((root + rc) / 2).limit_denominator(10**6)
        q = Fraction((root - rc) / (2 * sqrt(2.0))).limit_denominator(10**6)
        cand = Scalar(p, q)
        if cand.sign() > 0 and cand * cand == x:
            return cand
    raise ValueError(f"{x!r} has no square root in Q(sqrt2)")


def unit(v: Sequence[Scalar]) -> Vec:
    return vscale(sqrt_scalar(dot(v, v)).inverse(), v)


# ---------------------------------------------------------------------------
# the gluing table
# ---------------------------------------------------------------------------

E1_ = vec(1, 0, 0)
E2_ = vec(0, 1, 0)
E3_ = vec(0, 0, 1)
DIAG_DOWN = unit(vec(1, -1, 0))
DIAG_UP = unit(vec(1, 1, 0))
ANTI_DIAG = unit(vec(-1, 1, 0))


def wall_lattice(tag: str) -> Lattice:
    """Translation lattice of a wall, from the radii of its torus."""
    idx = tag[1]
    if idx in "23":
        h = HALF_SQRT2
        return canonicalize([(h, ZERO, ZERO), (ZERO, h, ZERO), (ZERO, ZERO, SQRT2)])
    if idx in "01":
        return canonicalize([(ONE, ZERO, ZERO), (ZERO, ONE, ZERO), (ZERO, ZERO, SQRT2)])
    if idx == "x":
        return canonicalize([(SQRT2, ZERO, ZERO), (ZERO, SQRT2, ZERO), (ZERO, ZERO, SQRT2)])
    raise ComplexError(f"unknown wall tag {tag!r}")


def is_thick(tag: str) -> bool:
    return tag[1] in "23"


@dataclass(frozen=True)
class Attachment:
    """One identification row: cylinder end glued onto a wall face."""

    strip: str
    end: int
    wall: str
    col_s: Vec
    col_t: Vec
    thick_face: bool  # True when the face is u = thickness, False for u = 0


def attachment_rows() -> list[Attachment]:
    rows: list[Attachment] = []
    for sd in SIDES:
        rows += [
            Attachment(f"C0{sd}", 0, f"E0{sd}", DIAG_DOWN, E3_, False),
            Attachment(f"C0{sd}", 1, f"E1{sd}", DIAG_DOWN, E3_, False),
            Attachment(f"C1{sd}", 0, f"E1{sd}", E1_, E3_, False),
            Attachment(f"C1{sd}", 1, f"E2{sd}", DIAG_UP, E3_, False),
            Attachment(f"C2{sd}", 0, f"E2{sd}", E2_, E3_, True),
            Attachment(f"C2{sd}", 1, f"E3{sd}", E2_, E3_, True),
            Attachment(f"C3{sd}", 0, f"E3{sd}", DIAG_UP, E3_, False),
            Attachment(f"C3{sd}", 1, f"E0{sd}", E1_, E3_, False),
        ]
    rows += [
        Attachment("Cx-", 0, "E0-", DIAG_DOWN, E3_, False),
        Attachment("Cx-", 1, "Ex", E1_, E3_, False),
        Attachment("Cx+", 0, "Ex", E1_, E2_, False),
        Attachment("Cx+", 1, "E0+", ANTI_DIAG, E3_, False),
    ]
    return rows


WALL_TAGS = tuple(f"E{i}{sd}" for sd in SIDES for i in range(4)) + ("Ex",)
STRIP_TAGS = tuple(f"C{i}{sd}" for sd in SIDES for i in range(4)) + ("Cx-", "Cx+")


# ---------------------------------------------------------------------------
# 3-dimensional complex
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FringeDescriptor:
    strip: str
    end: int
    directions: tuple[Vec, ...]
    base_point: Vec
    face: Scalar
    spacing: Scalar
    orientation: Vec

    def to_json(self) -> dict:
        return {
            "strip": self.strip,
            "end": self.end,
            "directions": [[float(x) for x in d] for d in self.directions],
            "base_point": [float(x) for x in self.base_point],
            "face": float(self.face),
            "spacing": float(self.spacing),
            "orientation": [float(x) for x in self.orientation],
        }


@dataclass(frozen=True)
class Wall:
    type_tag: str
    lattice: Lattice
    thickness: Scalar
    fringes: tuple[FringeDescriptor, ...]
    reduced: bool = False

    @property
    def dim(self) -> int:
        return self.lattice.ambient_dim

    def to_json(self) -> dict:
        return {
            "type_tag": self.type_tag,
            "reduced": self.reduced,
            "lattice": self.lattice.to_json(),
            "thickness": self.thickness.to_json(),
            "fringes": [f.to_json() for f in self.fringes],
        }


@dataclass(frozen=True)
class Strip:
    type_tag: str
    lattice: Lattice  # in cylinder (s, t) coordinates, or (s,) once reduced
    width: Scalar
    end_gluings: tuple[Attachment, Attachment]

    def to_json(self) -> dict:
        return {
            "type_tag": self.type_tag,
            "lattice": self.lattice.to_json(),
            "width": self.width.to_json(),
            "ends": [g.wall for g in self.end_gluings],
        }


@dataclass(frozen=True)
class ComplexSpec:
    eps: Scalar
    walls: dict[str, Wall]
    strips: dict[str, Strip]
    rows: tuple[Attachment, ...]

    def to_json(self) -> dict:
        return {
            "eps": self.eps.to_json(),
            "walls": [w.to_json() for w in self.walls.values()],
            "strips": [s.to_json() for s in self.strips.values()],
        }


def _fringe_lattice(wall_lat: Lattice, col_s: Vec, col_t: Vec) -> Lattice:
    """Wall lattice vectors lying in the fringe plane, in cylinder (s,t) coordinates."""
    normal = cross3(col_s, col_t)
    inplane = kernel_sublattice(wall_lat, [normal])
    return canonicalize([(dot(v, col_s), dot(v, col_t)) for v in inplane.basis], ambient_dim=2)


def _gram_det(vectors: Sequence[Vec]) -> Scalar:
    g = [[dot(a, b) for b in vectors] for a in vectors]
    if len(g) == 1:
        return g[0][0]
    if len(g) == 2:
        return g[0][0] * g[1][1] - g[0][1] * g[1][0]
    if len(g) == 3:
        return (
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
            - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        )
    raise ValueError("gram determinant only for up to 3 vectors")


def covolume(lat: Lattice) -> Scalar:
    return sqrt_scalar(_gram_det(lat.basis))


def _check_isometry(row: Attachment) -> None:
    s, t = row.col_s, row.col_t
    if dot(s, s) != ONE or dot(t, t) != ONE or dot(s, t) != ZERO:
        raise ComplexError(f"gluing {row.strip}/{row.end} is not an isometry")


def build_complex(eps) -> ComplexSpec:
    eps = Scalar.of(eps)
    if eps.sign() < 0:
        raise ComplexError("thickness parameter must be nonnegative")
    rows = attachment_rows()
    for r in rows:
        _check_isometry(r)
    walls: dict[str, Wall] = {}
    for tag in WALL_TAGS:
        lat = wall_lattice(tag)
        thick = eps if is_thick(tag) else ZERO
        fr = []
        for r in rows:
            if r.wall != tag:
                continue
            flat = _fringe_lattice(lat, r.col_s, r.col_t)
            spacing = covolume(lat) / covolume(flat)
            s_period = _period_along(flat, 0)
            fr.append(
                FringeDescriptor(
                    strip=r.strip,
                    end=r.end,
                    directions=(r.col_s, r.col_t),
                    base_point=(ZERO, ZERO, ZERO),
                    face=thick if r.thick_face else ZERO,
                    spacing=spacing,
                    orientation=vscale(s_period, r.col_s),
                )
            )
        walls[tag] = Wall(tag, lat, thick, tuple(fr))
    strips: dict[str, Strip] = {}
    for tag in STRIP_TAGS:
        ends = sorted((r for r in rows if r.strip == tag), key=lambda r: r.end)
        if len(ends) != 2:
            raise ComplexError(f"cylinder {tag} must have exactly two ends")
        lats = [_fringe_lattice(walls[r.wall].lattice, r.col_s, r.col_t) for r in ends]
        if lats[0] != lats[1]:
            raise ComplexError(f"cylinder {tag}: end lattices differ {lats[0]} vs {lats[1]}")
        strips[tag] = Strip(tag, lats[0], ONE, (ends[0], ends[1]))
    return ComplexSpec(eps, walls, strips, tuple(rows))


def _period_along(flat: Lattice, axis: int) -> Scalar:
    """Positive generator of the flat lattice along one cylinder axis."""
    other = 1 - axis
    sub = kernel_sublattice(flat, [[ONE if i == other else ZERO for i in range(2)]])
    if sub.rank != 1:
        raise ComplexError("fringe lattice is not a product along the cylinder axes")
    return abs(sub.basis[0][axis])


def gluing_lattice_compatible(spec: ComplexSpec) -> dict[str, bool]:
    """Per cylinder: do both end gluings carry the wall lattices onto one cylinder lattice?"""
    out = {}
    for tag, strip in spec.strips.items():
        a, b = strip.end_gluings
        la = _fringe_lattice(spec.walls[a.wall].lattice, a.col_s, a.col_t)
        lb = _fringe_lattice(spec.walls[b.wall].lattice, b.col_s, b.col_t)
        out[tag] = la == lb == strip.lattice
    return out


def fringe_plane_angle(wall: Wall, strip_a: str, strip_b: str) -> "FringeAngle":
    """Angle between the normals of two fringe planes of a 3-dimensional wall."""
    fa = _find_fringe(wall, strip_a)
    fb = _find_fringe(wall, strip_b)
    na = cross3(*fa.directions)
    nb = cross3(*fb.directions)
    return _angle(na, nb)


def _find_fringe(wall: Wall, strip: str) -> FringeDescriptor:
    for f in wall.fringes:
        if f.strip == strip:
            return f
    raise ComplexError(f"wall {wall.type_tag} has no fringe of {strip}")


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------


def circle_axis(wall_tag: str, side: str) -> int:
    """Index of the coordinate removed when reducing ``side``."""
    if wall_tag == "Ex":
        return 2 if side == "-" else 1
    return 2


@dataclass(frozen=True)
class ReducedSpec:
    side: str
    eps: Scalar
    walls: dict[str, Wall]
    strips: dict[str, Strip]
    graph_vertices: tuple[str, ...]
    graph_edges: tuple[tuple[str, str, str], ...]  # (edge tag, vertex, vertex)

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "eps": self.eps.to_json(),
            "walls": [w.to_json() for w in self.walls.values()],
            "strips": [s.to_json() for s in self.strips.values()],
            "graph": {"vertices": list(self.graph_vertices), "edges": [list(e) for e in self.graph_edges]},
        }


def _drop(v: Sequence[Scalar], axis: int) -> Vec:
    return tuple(x for i, x in enumerate(v) if i != axis)


def reduce(spec: ComplexSpec, side: str) -> ReducedSpec:
    if side not in SIDES:
        raise ComplexError(f"side must be '-' or '+', got {side!r}")
    wall_tags = [f"E{i}{side}" for i in range(4)] + ["Ex"]
    strip_tags = [f"C{i}{side}" for i in range(4)] + [f"Cx{side}"]
    walls: dict[str, Wall] = {}
    for tag in wall_tags:
        w = spec.walls[tag]
        ax = circle_axis(tag, side)
        basis = [b for b in w.lattice.basis]
        lat2 = canonicalize([_drop(b, ax) for b in basis], ambient_dim=2)
        fr = []
        for f in w.fringes:
            if f.strip not in strip_tags:
                continue
            col_s, col_t = f.directions
            if any(x for i, x in enumerate(col_t) if i != ax) or col_t[ax] != ONE:
                raise ComplexError(f"{f.strip} at {tag}: circle factor is not the deleted axis")
            if col_s[ax]:
                raise ComplexError(f"{f.strip} at {tag}: fringe direction has a circle component")
            d = _drop(col_s, ax)
            fr.append(
                FringeDescriptor(
                    strip=f.strip,
                    end=f.end,
                    directions=(d,),
                    base_point=(ZERO, ZERO),
                    face=f.face,
                    spacing=f.spacing,
                    orientation=_drop(f.orientation, ax),
                )
            )
        walls[tag] = Wall(tag, lat2, w.thickness, tuple(fr), reduced=True)
    strips = {}
    for tag in strip_tags:
        st = spec.strips[tag]
        lat1 = canonicalize([(b[0],) for b in st.lattice.basis if b[0]], ambient_dim=1)
        strips[tag] = Strip(tag, lat1, st.width, st.end_gluings)
    verts = tuple(f"V{i}{side}" for i in range(4))
    edges = tuple((f"E{i}{side}", f"V{(i - 1) % 4}{side}", f"V{i}{side}") for i in range(4))
    return ReducedSpec(side, spec.eps, walls, strips, verts, edges)


@dataclass(frozen=True)
class FringeAngle:
    cos_sq: Scalar
    radians: float
    degenerate: bool

    def is_quarter_turn(self) -> bool:
        return self.cos_sq == Scalar(Fraction(1, 2))

    def is_right_angle(self) -> bool:
        return self.cos_sq == ZERO


def _angle(a: Vec, b: Vec) -> FringeAngle:
    c2 = dot(a, b) * dot(a, b) / (dot(a, a) * dot(b, b))
    rad = acos(min(1.0, sqrt(max(float(c2), 0.0))))
    return FringeAngle(c2, rad, c2 == ONE)


def fringe_families(wall: Wall) -> list[list[FringeDescriptor]]:
    """Group the fringes of a reduced wall by parallel direction."""
    fams: list[list[FringeDescriptor]] = []
    for f in wall.fringes:
        d = f.directions[0]
        for fam in fams:
            e = fam[0].directions[0]
            if d[0] * e[1] - d[1] * e[0] == ZERO:
                fam.append(f)
                break
        else:
            fams.append([f])
    return fams


def fringe_angle(wall: Wall, strip_a: str | None = None, strip_b: str | None = None) -> FringeAngle:
    """Unsigned angle between two fringe directions of a reduced wall.

    Directions of thickened walls are already projections along the interval
    factor.  Parallel fringes give angle 0 with ``degenerate`` set.
    """
    if strip_a is None or strip_b is None:
        fams = fringe_families(wall)
        if len(wall.fringes) < 2:
            raise ComplexError(f"wall {wall.type_tag} has fewer than two fringes")
        if len(fams) < 2:
            f = wall.fringes
            return _angle(f[0].directions[0], f[1].directions[0])
        return _angle(fams[0][0].directions[0], fams[1][0].directions[0])
    return _angle(_find_fringe(wall, strip_a).directions[0], _find_fringe(wall, strip_b).directions[0])


def fringe_pairs(red: ReducedSpec) -> list[tuple[str, str, str]]:
    """All (wall, strip, strip) pairs of non-parallel fringes in a reduction."""
    out = []
    for tag, w in red.walls.items():
        fr = w.fringes
        for i in range(len(fr)):
            for j in range(i + 1, len(fr)):
                a, b = fr[i].directions[0], fr[j].directions[0]
                if a[0] * b[1] - a[1] * b[0] != ZERO:
                    out.append((tag, fr[i].strip, fr[j].strip))
    return out


# ---------------------------------------------------------------------------
# itineraries and developed chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Itinerary:
    """Alternating wall/strip tags on one reduced side.

    ``shifts`` assigns to wall positions a lattice vector: the exit fringe
    of that wall passes through the shifted point (a loop inside the torus
    before leaving it).
    """

    side: str
    tags: tuple[str, ...]
    shifts: tuple[tuple[int, Vec], ...] = ()

    def __len__(self):
        return len(self.tags)

    def shift_at(self, i: int) -> Vec:
        for k, v in self.shifts:
            if k == i:
                return v
        return (ZERO, ZERO)

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "tags": list(self.tags),
            "shifts": [[k, [x.to_json() for x in v]] for k, v in self.shifts],
        }


SHIFT_UP = (SQRT2, SQRT2)  # twice the diagonal generator of E2
SHIFT_DOWN = (-SQRT2, -SQRT2)


def period_itinerary(side: str = "-", periods: int = 1, tail: bool = False) -> Itinerary:
    """``periods`` cycles E0,C0,E1,C1,E2,C2,E3,C3 ending in E0.

    With ``tail`` the chain continues through the Cx cylinder into Ex.
    """
    if periods < 0:
        raise ComplexError("periods must be nonnegative")
    tags: list[str] = []
    shifts = []
    for _ in range(periods):
        base = len(tags)
        for i in range(4):
            tags += [f"E{i}{side}", f"C{i}{side}"]
        shifts += [(base + 4, SHIFT_UP), (base + 6, SHIFT_DOWN)]
    tags.append(f"E0{side}")
    if tail:
        tags += [f"Cx{side}", "Ex"]
    return Itinerary(side, tuple(tags), tuple(shifts))


@dataclass(frozen=True)
class FringeLine:
    """A line fringe in piece-local coordinates: ``base + sigma * direction``."""

    base: Vec
    direction: Vec

    def point(self, sigma) -> Vec:
        return vadd(self.base, vscale(sigma, self.direction))


@dataclass(frozen=True)
class Piece:
    kind: str  # "wall" or "strip"
    tag: str
    dim: int
    thickness: Scalar  # walls: interval factor; strips: width
    entry: FringeLine | None
    exit: FringeLine | None
    marked_in: Vec | None = None
    marked_out: Vec | None = None
    anchor_in: Scalar | None = None  # entry sigma of the marked point
    anchor_out: Scalar | None = None
    forward: bool = True  # strips: traversed from end 0 to end 1
    lattice: Lattice | None = None

    def to_json(self) -> dict:
        def fl(line):
            if line is None:
                return None
            return {"base": [float(x) for x in line.base], "direction": [float(x) for x in line.direction]}

        return {
            "kind": self.kind,
            "tag": self.tag,
            "dim": self.dim,
            "thickness": float(self.thickness),
            "entry": fl(self.entry),
            "exit": fl(self.exit),
            "marked_in": None if self.marked_in is None else [float(x) for x in self.marked_in],
            "marked_out": None if self.marked_out is None else [float(x) for x in self.marked_out],
        }


@dataclass(frozen=True)
class Transition:
    """Affine identification ``sigma_entry = sign * sigma_exit + offset``."""

    sign: int = 1
    offset: Scalar = ZERO

    def apply(self, sigma):
        return self.sign * sigma + self.offset

    def invert(self, sigma):
        return self.sign * (sigma - self.offset)


@dataclass(frozen=True)
class ChainGeometry:
    eps: Scalar
    itinerary: Itinerary
    pieces: tuple[Piece, ...]
    transitions: tuple[Transition, ...]

    def __len__(self):
        return len(self.pieces)

    def marked_walls(self) -> list[int]:
        return [i for i, p in enumerate(self.pieces) if p.kind == "wall" and p.marked_in is not None]

    def to_json(self) -> dict:
        return {
            "eps": self.eps.to_json(),
            "itinerary": self.itinerary.to_json(),
            "pieces": [p.to_json() for p in self.pieces],
            "transitions": [{"sign": t.sign, "offset": float(t.offset)} for t in self.transitions],
        }


def _line_intersection(p: Vec, d: Vec, q: Vec, e: Vec) -> tuple[Scalar, Scalar] | None:
    """Parameters (a, b) with p + a d = q + b e in the plane, or None if parallel."""
    det = d[0] * (-e[1]) - d[1] * (-e[0])
    if not det:
        return None
    rx, ry = q[0] - p[0], q[1] - p[1]
    a = (rx * (-e[1]) - ry * (-e[0])) / det
    b = (d[0] * ry - d[1] * rx) / det
    return a, b


def _strip_end(red: ReducedSpec, strip: str, wall: str) -> Attachment:
    ends = red.strips[strip].end_gluings
    hits = [g for g in ends if g.wall == wall]
    if not hits:
        raise ComplexError(f"cylinder {strip} is not attached to {wall}")
    return hits[0]


def develop(itinerary: Itinerary, eps) -> ChainGeometry:
    """Local coordinates and exact transitions for every piece of the itinerary.

    Walls use ``(r, s, u)``; the entry fringe passes through the origin and
    the exit fringe through the itinerary's shift vector (origin otherwise),
    each with its sigma-origin there.  Strips use ``(sigma, v)`` with
    ``v = 0`` at the entry.  Sigma is cylinder arclength, so every
    transition is the identity.
    """
    eps = Scalar.of(eps)
    side = itinerary.side
    spec = build_complex(eps)
    red = reduce(spec, side)
    tags = itinerary.tags
    if not tags:
        raise ComplexError("empty itinerary")
    for i, t in enumerate(tags):
        want = red.walls if i % 2 == 0 else red.strips
        if t not in want:
            kind = "wall" if i % 2 == 0 else "cylinder"
            raise ComplexError(f"position {i}: {t!r} is not a {kind} of side {side}")
    pieces: list[Piece] = []
    for i, tag in enumerate(tags):
        if i % 2 == 0:
            w = red.walls[tag]
            entry = exit_ = None
            face_in = face_out = ZERO
            if i > 0:
                g = _strip_end(red, tags[i - 1], tag)
                f = next(x for x in w.fringes if x.strip == g.strip and x.end == g.end)
                face_in = f.face
                entry = FringeLine((ZERO, ZERO, face_in), f.directions[0] + (ZERO,))
            if i + 1 < len(tags):
                g = _strip_end(red, tags[i + 1], tag)
                f = next(x for x in w.fringes if x.strip == g.strip and x.end == g.end)
                face_out = f.face
                sh = itinerary.shift_at(i)
                if sh not in w.lattice:
                    raise ComplexError(f"shift {sh} is not a lattice vector of {tag}")
                exit_ = FringeLine((sh[0], sh[1], face_out), f.directions[0] + (ZERO,))
            m_in = m_out = a_in = a_out = None
            if entry is not None and exit_ is not None:
                hit = _line_intersection(entry.base, entry.direction, exit_.base, exit_.direction)
                if hit is not None:
                    a_in, a_out = hit
                    pt = entry.point(a_in)
                    m_in = (pt[0], pt[1], face_in)
                    m_out = (pt[0], pt[1], face_out)
            elif exit_ is not None:
                m_out = exit_.base
                m_in = (exit_.base[0], exit_.base[1], ZERO)
                a_out = ZERO
            elif entry is not None:
                m_in = entry.base
                m_out = entry.base
                a_in = ZERO
            else:
                m_in = m_out = (ZERO, ZERO, ZERO)
            pieces.append(
                Piece("wall", tag, 3, w.thickness, entry, exit_, m_in, m_out, a_in, a_out, True, w.lattice)
            )
        else:
            prev_wall, next_wall = tags[i - 1], tags[i + 1] if i + 1 < len(tags) else None
            g_in = _strip_end(red, tag, prev_wall)
            if next_wall is not None:
                g_out = _strip_end(red, tag, next_wall)
                if g_out.end == g_in.end:
                    raise ComplexError(f"cylinder {tag} enters and leaves through the same end")
            forward = g_in.end == 0
            st = red.strips[tag]
            entry = FringeLine((ZERO, ZERO), (ONE, ZERO))
            exit_ = FringeLine((ZERO, st.width), (ONE, ZERO)) if next_wall is not None else None
            pieces.append(Piece("strip", tag, 2, st.width, entry, exit_, None, None, None, None, forward, st.lattice))
    transitions = tuple(Transition() for _ in range(len(pieces) - 1))
    return ChainGeometry(eps, itinerary, tuple(pieces), transitions)


def roundtrip_sigma(chain: ChainGeometry, sigma) -> Scalar:
    """Carry a sigma value forward through every transition and back."""
    x = Scalar.of(sigma)
    for t in chain.transitions:
        x = t.apply(x)
    for t in reversed(chain.transitions):
        x = t.invert(x)
    return x


# ---------------------------------------------------------------------------
# the stretching map between chains over 0 and over delta
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainPoint:
    piece: int
    coords: tuple  # wall: (r, s, u); strip: (sigma, v)


def _stretched_strip(tag: str) -> bool:
    return tag[:2] == "C2"


def phi_map(p: ChainPoint, chain0: ChainGeometry, chain_d: ChainGeometry) -> ChainPoint:
    """Image of a point of the chain over 0 in the chain over delta.

    Identity on walls (thickened walls receive the u = 0 fiber) and on
    unstretched strips; the stretched cylinder's interval is scaled by
    ``1 + 2 delta`` and spills into the slabs of the two adjacent walls.
    """
    if chain0.itinerary != chain_d.itinerary:
        raise ComplexError("chains have different itineraries")
    if not 0 <= p.piece < len(chain0.pieces):
        raise ComplexError("point outside chain")
    delta = float(chain_d.eps)
    piece = chain0.pieces[p.piece]
    if piece.kind == "wall":
        r, s, u = p.coords
        if abs(u) > float(piece.thickness) + 1e-15:
            raise ComplexError("point outside wall slab")
        return ChainPoint(p.piece, (r, s, 0.0))
    sigma, v = p.coords
    if not -1e-15 <= v <= float(piece.thickness) + 1e-15:
        raise ComplexError("point outside strip")
    if not _stretched_strip(piece.tag) or delta == 0:
        return ChainPoint(p.piece, (sigma, v))
    big_v = (1 + 2 * delta) * v if piece.forward else (1 + 2 * delta) * (1 - v)
    if big_v <= delta:
        wall_idx = p.piece - 1 if piece.forward else p.piece + 1
        return _slab_point(chain_d, wall_idx, sigma, big_v, entering=piece.forward)
    if big_v >= 1 + delta:
        wall_idx = p.piece + 1 if piece.forward else p.piece - 1
        return _slab_point(chain_d, wall_idx, sigma, delta - (big_v - 1 - delta), entering=not piece.forward)
    vv = big_v - delta
    return ChainPoint(p.piece, (sigma, vv if piece.forward else 1 - vv))


def _slab_point(chain: ChainGeometry, idx: int, sigma: float, u: float, entering: bool) -> ChainPoint:
    if not 0 <= idx < len(chain.pieces):
        raise ComplexError("stretched cylinder spills past the end of the chain")
    w = chain.pieces[idx]
    line = w.exit if entering else w.entry
    r = float(line.base[0]) + sigma * float(line.direction[0])
    s = float(line.base[1]) + sigma * float(line.direction[1])
    return ChainPoint(idx, (r, s, u))
