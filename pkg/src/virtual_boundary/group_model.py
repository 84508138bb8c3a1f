"""Graphs of groups with vertex groups ``F_m x Z^a`` and free abelian edge groups.

An edge group is a lattice with an explicit basis.  Each end of an edge
sends every basis vector to a vertex group element ``(word, vector)``; the
words of one end must commute, so they are powers of one primitive word.
Inside ``<root> x Z^a`` such an image is just an integer lattice, which is
what makes the admissibility conditions decidable on this class.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import gcd
from typing import Iterable, Sequence

from .complex_model import (
    ComplexSpec,
    build_complex,
    cross3,
    _period_along,
)
from .free_words import FreeWord, conjugate_commensurable_cyclic, gen
from .lattice_algebra import (
    Lattice,
    Scalar,
    canonicalize,
    dot,
    integer_kernel,
    intersect,
)

Element = tuple[FreeWord, tuple[int, ...]]


class MalformedGraph(ValueError):
    pass


class AdmissibilityError(ValueError):
    pass


@dataclass(frozen=True)
class VertexGroup:
    """``F_m x Z^a``; ``center`` is the designated free abelian subgroup inside ``Z^a``."""

    label: str
    free_rank: int
    center: Lattice

    @property
    def abelian_rank(self) -> int:
        return self.center.ambient_dim

    def to_json(self) -> dict:
        return {"label": self.label, "free_rank": self.free_rank, "center": self.center.to_json()}

    @classmethod
    def from_json(cls, d: dict) -> "VertexGroup":
        return cls(d["label"], int(d["free_rank"]), Lattice.from_json(d["center"]))


@dataclass(frozen=True)
class EdgeInclusion:
    edge: str
    end: str  # "-" or "+"
    vertex: str
    images: tuple[Element, ...]

    def to_json(self) -> dict:
        return {
            "edge": self.edge,
            "end": self.end,
            "vertex": self.vertex,
            "images": [{"word": w.to_json(), "vector": list(v)} for w, v in self.images],
        }

    @classmethod
    def from_json(cls, d: dict) -> "EdgeInclusion":
        imgs = tuple((FreeWord.from_json(i["word"]), tuple(int(x) for x in i["vector"])) for i in d["images"])
        return cls(d["edge"], d["end"], d["vertex"], imgs)


@dataclass(frozen=True)
class GraphEdge:
    label: str
    lattice: Lattice
    minus: EdgeInclusion
    plus: EdgeInclusion

    def inclusion(self, end: str) -> EdgeInclusion:
        return self.minus if end == "-" else self.plus

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "lattice": self.lattice.to_json(),
            "minus": self.minus.to_json(),
            "plus": self.plus.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "GraphEdge":
        return cls(
            d["label"],
            Lattice.from_json(d["lattice"]),
            EdgeInclusion.from_json(d["minus"]),
            EdgeInclusion.from_json(d["plus"]),
        )


@dataclass(frozen=True)
class GraphOfGroups:
    vertices: tuple[VertexGroup, ...]
    edges: tuple[GraphEdge, ...]

    def vertex(self, label: str) -> VertexGroup:
        for v in self.vertices:
            if v.label == label:
                return v
        raise KeyError(label)

    def edge(self, label: str) -> GraphEdge:
        for e in self.edges:
            if e.label == label:
                return e
        raise KeyError(label)

    def incident(self, vertex: str) -> list[tuple[str, str]]:
        """(edge label, end) pairs whose end sits at ``vertex``."""
        out = []
        for e in self.edges:
            for end in "-+":
                if e.inclusion(end).vertex == vertex:
                    out.append((e.label, end))
        return out

    def endpoints(self, label: str) -> tuple[str, str]:
        e = self.edge(label)
        return e.minus.vertex, e.plus.vertex

    def is_connected(self, edge_labels: Iterable[str] | None = None, vertex_labels=None) -> bool:
        edges = [self.edge(l) for l in (edge_labels if edge_labels is not None else [e.label for e in self.edges])]
        verts = set(vertex_labels) if vertex_labels is not None else {v.label for v in self.vertices}
        verts |= {e.minus.vertex for e in edges} | {e.plus.vertex for e in edges}
        if not verts:
            return True
        adj: dict[str, set[str]] = {v: set() for v in verts}
        for e in edges:
            adj[e.minus.vertex].add(e.plus.vertex)
            adj[e.plus.vertex].add(e.minus.vertex)
        start = next(iter(sorted(verts)))
        seen = {start}
        todo = [start]
        while todo:
            for w in adj[todo.pop()]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return seen == verts

    def betti_number(self) -> int:
        comps = 1 if self.is_connected() else _component_count(self)
        return len(self.edges) - len(self.vertices) + comps

    def validate(self) -> None:
        labels = [v.label for v in self.vertices]
        if len(set(labels)) != len(labels):
            raise MalformedGraph("duplicate vertex labels")
        if len({e.label for e in self.edges}) != len(self.edges):
            raise MalformedGraph("duplicate edge labels")
        for e in self.edges:
            for end in "-+":
                inc = e.inclusion(end)
                if inc.vertex not in labels:
                    raise MalformedGraph(f"{e.label}{end}: unknown vertex {inc.vertex}")
                abelian_image(self, e.label, end)

    def to_json(self) -> dict:
        return {"vertices": [v.to_json() for v in self.vertices], "edges": [e.to_json() for e in self.edges]}

    @classmethod
    def from_json(cls, d: dict) -> "GraphOfGroups":
        return cls(
            tuple(VertexGroup.from_json(v) for v in d["vertices"]),
            tuple(GraphEdge.from_json(e) for e in d["edges"]),
        )


def _component_count(g: GraphOfGroups) -> int:
    parent = {v.label: v.label for v in g.vertices}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in g.edges:
        parent[find(e.minus.vertex)] = find(e.plus.vertex)
    return len({find(v) for v in parent})


# ---------------------------------------------------------------------------
# abelian images
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AbelianImage:
    """An edge image inside ``<root> x Z^a``; rows are the basis images."""

    root: FreeWord | None
    rows: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return _int_lattice(self.rows, 1 + self.abelian_rank).rank

    @property
    def abelian_rank(self) -> int:
        return len(self.rows[0]) - 1 if self.rows else 0


def _int_lattice(rows: Iterable[Sequence[int]], dim: int) -> Lattice:
    return canonicalize([tuple(Scalar(x) for x in r) for r in rows], ambient_dim=dim)


def _power_of(word: FreeWord, root: FreeWord) -> int | None:
    if not word:
        return 0
    n = len(word) // len(root)
    if n and root ** n == word:
        return n
    if n and root ** (-n) == word:
        return -n
    return None


def abelian_image(g: GraphOfGroups, edge: str, end: str) -> AbelianImage:
    e = g.edge(edge)
    inc = e.inclusion(end)
    vg = g.vertex(inc.vertex)
    if len(inc.images) != e.lattice.rank:
        raise MalformedGraph(f"{edge}{end}: {len(inc.images)} images for a rank {e.lattice.rank} lattice")
    a = vg.abelian_rank
    root = None
    for w, v in inc.images:
        if len(v) != a:
            raise MalformedGraph(f"{edge}{end}: vector {v} not in Z^{a}")
        if w.max_generator() > vg.free_rank:
            raise MalformedGraph(f"{edge}{end}: word {w} uses a letter beyond x{vg.free_rank}")
        if w and root is None:
            r = w.primitive_root()
            # prefer the orientation with positive first letter for determinism
            root = r if r.letters[0] > 0 else r.inverse()
    rows = []
    for w, v in inc.images:
        k = _power_of(w, root) if root is not None else 0
        if k is None:
            raise MalformedGraph(f"{edge}{end}: image words do not commute")
        rows.append((k,) + tuple(int(x) for x in v))
    img = AbelianImage(root, tuple(rows))
    if img.rank != e.lattice.rank:
        raise MalformedGraph(f"{edge}{end}: inclusion is not injective")
    return img


def _gcd_of_minors(rows: Sequence[Sequence[int]], r: int) -> int:
    from .lattice_algebra import _det

    cols = len(rows[0])
    g = 0
    for rs in combinations(range(len(rows)), r):
        for cs in combinations(range(cols), r):
            d = _det([[Fraction(rows[i][j]) for j in cs] for i in rs])
            g = gcd(g, abs(int(d)))
            if g == 1:
                return 1
    return g


def is_saturated(rows: Sequence[Sequence[int]]) -> bool:
    """Is the integer span of ``rows`` a direct summand of ``Z^n``?"""
    lat = _int_lattice(rows, len(rows[0]))
    if lat.rank == 0:
        return True
    basis = [[int(x.a) for x in b] for b in lat.basis]
    return _gcd_of_minors(basis, lat.rank) == 1


def _aligned(a: AbelianImage, b: AbelianImage) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]], int]:
    """Put two images into a common ``Z^n`` after the best conjugation."""
    if a.root is not None and b.root is not None and not conjugate_commensurable_cyclic(a.root, b.root):
        ra = [(r[0], 0) + r[1:] for r in a.rows]
        rb = [(0, r[0]) + r[1:] for r in b.rows]
        return ra, rb, len(ra[0])
    sign = 1
    if a.root is not None and b.root is not None:
        same = a.root.cyclic_reduce() == b.root.cyclic_reduce()
        sign = 1 if same else -1
    ra = list(a.rows)
    rb = [(sign * r[0],) + r[1:] for r in b.rows]
    return ra, rb, len(ra[0])


def conjugate_commensurable_images(a: AbelianImage, b: AbelianImage) -> bool:
    ra, rb, dim = _aligned(a, b)
    la, lb = _int_lattice(ra, dim), _int_lattice(rb, dim)
    return la.rank == lb.rank == intersect(la, lb).rank


# ---------------------------------------------------------------------------
# preimages of centers, cores
# ---------------------------------------------------------------------------


def center_preimage(g: GraphOfGroups, edge: str, end: str) -> Lattice:
    """Preimage of the vertex center in the edge lattice (edge lattice coordinates)."""
    e = g.edge(edge)
    img = abelian_image(g, edge, end)
    center = g.vertex(e.inclusion(end).vertex).center
    n = len(img.rows)
    gens = [[Fraction(x) for x in r] for r in img.rows]
    for c in center.basis:
        gens.append([Fraction(0)] + [-x.a for x in c])
    kern = integer_kernel(gens)
    coeffs = [tuple(Scalar(x) for x in k[:n]) for k in kern]
    return canonicalize(coeffs, ambient_dim=n) if coeffs else Lattice.zero(n)


def _to_geometric(e: GraphEdge, coeff_lat: Lattice) -> Lattice:
    vecs = []
    for c in coeff_lat.basis:
        v = [Scalar(0)] * e.lattice.ambient_dim
        for k, b in zip(c, e.lattice.basis):
            v = [x + k * y for x, y in zip(v, b)]
        vecs.append(tuple(v))
    return canonicalize(vecs, ambient_dim=e.lattice.ambient_dim)


def edge_core(g: GraphOfGroups, edge: str, strict: bool = False) -> Lattice:
    """Intersection of the two center preimages, in the edge's own coordinates."""
    e = g.edge(edge)
    core = intersect(center_preimage(g, edge, "-"), center_preimage(g, edge, "+"))
    if strict and core.rank != 1:
        raise AdmissibilityError(f"core of {edge} has rank {core.rank}, expected 1")
    return _to_geometric(e, core)


def _core_coefficients(g: GraphOfGroups, edge: str) -> Lattice:
    return intersect(center_preimage(g, edge, "-"), center_preimage(g, edge, "+"))


def transported_core(g: GraphOfGroups, edge: str, end: str) -> Lattice:
    """Core pushed into the center coordinates ``Z^a`` of the vertex at ``end``."""
    img = abelian_image(g, edge, end)
    core = _core_coefficients(g, edge)
    a = img.abelian_rank
    vecs = []
    for c in core.basis:
        v = [0] * a
        for k, row in zip(c, img.rows):
            if row[0] and k:
                raise AdmissibilityError("core element with nontrivial free part")
            v = [x + int(k.a) * y for x, y in zip(v, row[1:])]
        vecs.append(tuple(Scalar(x) for x in v))
    return canonicalize(vecs, ambient_dim=a) if vecs else Lattice.zero(a)


def _commensurable(a: Lattice, b: Lattice) -> bool:
    return a.rank == b.rank == intersect(a, b).rank


@dataclass(frozen=True)
class Subgraph:
    vertices: tuple[str, ...]
    edges: tuple[str, ...]

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "edges": list(self.edges)}


def commensurability_subgraph(g: GraphOfGroups, seed: str) -> Subgraph:
    """Edges reachable from ``seed`` through vertices where consecutive cores agree up to finite index."""
    g.edge(seed)
    found = {seed}
    todo = deque([seed])
    while todo:
        e = todo.popleft()
        for end in "-+":
            v = g.edge(e).inclusion(end).vertex
            here = transported_core(g, e, end)
            for other, oend in g.incident(v):
                if other in found:
                    continue
                if _commensurable(here, transported_core(g, other, oend)):
                    found.add(other)
                    todo.append(other)
    verts = sorted({x for e in found for x in g.endpoints(e)})
    edges = tuple(e.label for e in g.edges if e.label in found)
    if not g.is_connected(edges, verts):
        raise AdmissibilityError("commensurability subgraph is disconnected")
    return Subgraph(tuple(verts), edges)


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

SELF_CLAUSE_NOTE = (
    "self-conjugation clause decided as: the edge image is a direct summand of "
    "<primitive root> x Z^a; conjugators centralizing the image are not searched"
)


@dataclass
class ConditionVerdict:
    passed: bool = True
    witnesses: list[str] = field(default_factory=list)

    def fail(self, msg: str) -> None:
        self.passed = False
        self.witnesses.append(msg)

    def to_json(self) -> dict:
        return {"passed": self.passed, "witnesses": list(self.witnesses)}


@dataclass
class AdmissibilityReport:
    rank: int
    structure: ConditionVerdict
    conditions: dict[str, ConditionVerdict]
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.structure.passed and all(c.passed for c in self.conditions.values())

    def failing(self) -> list[str]:
        return [k for k, c in self.conditions.items() if not c.passed]

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "passed": self.passed,
            "structure": self.structure.to_json(),
            "conditions": {k: c.to_json() for k, c in self.conditions.items()},
            "notes": list(self.notes),
        }


def check_admissible(g: GraphOfGroups, k: int) -> AdmissibilityReport:
    g.validate()
    structure = ConditionVerdict()
    if not g.edges:
        structure.fail("graph has no edge")
    if not g.is_connected():
        structure.fail("graph is disconnected")
    cond = {name: ConditionVerdict() for name in ("i", "ii", "iii", "iv")}

    for v in g.vertices:
        if v.center.rank != k - 1:
            cond["i"].fail(f"{v.label}: center rank {v.center.rank} != {k - 1}")
        if v.free_rank < 2:
            cond["i"].fail(f"{v.label}: free rank {v.free_rank} < 2, quotient is elementary")

    for e in g.edges:
        if e.lattice.rank != k:
            cond["ii"].fail(f"{e.label}: edge lattice rank {e.lattice.rank} != {k}")

    for v in g.vertices:
        ends = g.incident(v.label)
        imgs = {(e, end): abelian_image(g, e, end) for e, end in ends}
        for (e, end), img in imgs.items():
            if img.root is None:
                cond["iii"].fail(f"{v.label}: image of {e} is central")
            elif not is_saturated(img.rows):
                cond["iii"].fail(f"{v.label}: image of {e} is not a direct summand of <{img.root}> x Z^a")
        for (a, ea), (b, eb) in combinations(ends, 2):
            if conjugate_commensurable_images(imgs[(a, ea)], imgs[(b, eb)]):
                cond["iii"].fail(f"{v.label}: images of {a} and {b} are conjugate commensurable")

    for e in g.edges:
        pm, pp = center_preimage(g, e.label, "-"), center_preimage(g, e.label, "+")
        total = canonicalize(pm.basis + pp.basis, ambient_dim=e.lattice.rank)
        if total.rank != e.lattice.rank:
            cond["iv"].fail(f"{e.label}: center preimages span rank {total.rank} < {e.lattice.rank}")

    return AdmissibilityReport(k, structure, cond, [SELF_CLAUSE_NOTE])


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relations: tuple[str, ...]
    stable_letters: tuple[str, ...]

    def to_json(self) -> dict:
        return {"generators": list(self.generators), "relations": list(self.relations),
                "stable_letters": list(self.stable_letters)}


def _element_text(vertex: str, el: Element) -> str:
    w, v = el
    parts = []
    for a in w.letters:
        parts.append(f"{vertex}.x{abs(a)}" + ("" if a > 0 else "^-1"))
    for i, c in enumerate(v, start=1):
        if c:
            parts.append(f"{vertex}.z{i}" + ("" if c == 1 else f"^{c}"))
    return " ".join(parts) if parts else "1"


def is_spanning_tree(g: GraphOfGroups, tree: Iterable[str]) -> bool:
    tree = list(tree)
    if len(set(tree)) != len(tree) or len(tree) != len(g.vertices) - 1:
        return False
    try:
        for t in tree:
            g.edge(t)
    except KeyError:
        return False
    return g.is_connected(tree, [v.label for v in g.vertices])


def default_spanning_tree(g: GraphOfGroups) -> tuple[str, ...]:
    seen = {g.vertices[0].label}
    tree = []
    changed = True
    while changed:
        changed = False
        for e in g.edges:
            a, b = e.minus.vertex, e.plus.vertex
            if (a in seen) != (b in seen):
                seen |= {a, b}
                tree.append(e.label)
                changed = True
    return tuple(tree)


def presentation(g: GraphOfGroups, spanning_tree: Iterable[str]) -> Presentation:
    tree = tuple(spanning_tree)
    if not is_spanning_tree(g, tree):
        raise MalformedGraph("not a spanning tree")
    gens: list[str] = []
    rels: list[str] = []
    for v in g.vertices:
        xs = [f"{v.label}.x{i}" for i in range(1, v.free_rank + 1)]
        zs = [f"{v.label}.z{i}" for i in range(1, v.abelian_rank + 1)]
        gens += xs + zs
        for z in zs:
            for x in xs:
                rels.append(f"[{x}, {z}]")
        for z1, z2 in combinations(zs, 2):
            rels.append(f"[{z1}, {z2}]")
    stable = []
    for e in g.edges:
        t = None if e.label in tree else f"t_{e.label}"
        if t:
            stable.append(t)
        for lo, hi in zip(e.minus.images, e.plus.images):
            left = _element_text(e.minus.vertex, lo)
            right = _element_text(e.plus.vertex, hi)
            if t:
                rels.append(f"{t} ({left}) {t}^-1 = {right}")
            else:
                rels.append(f"{left} = {right}")
    return Presentation(tuple(gens + stable), tuple(rels), tuple(stable))


# ---------------------------------------------------------------------------
# the example graph, derived from the gluing table
# ---------------------------------------------------------------------------

SIDES = ("-", "+")


def _vertex_cylinders(sd: str) -> dict[str, tuple[str, ...]]:
    return {
        f"V0{sd}": (f"C0{sd}", f"Cx{sd}"),
        f"V1{sd}": (f"C1{sd}",),
        f"V2{sd}": (f"C2{sd}",),
        f"V3{sd}": (f"C3{sd}",),
    }


def _edge_ends() -> list[tuple[str, tuple[str, str, int, int], tuple[str, str, int, int]]]:
    """(edge, (vertex, cylinder, cylinder end, letter) for each of the two ends)."""
    out = []
    for sd in SIDES:
        for i in range(4):
            prev = (i - 1) % 4
            # letter 1 is the wall at the cylinder's start, letter 2 its far wall
            out.append((f"E{i}{sd}", (f"V{prev}{sd}", f"C{prev}{sd}", 1, 2), (f"V{i}{sd}", f"C{i}{sd}", 0, 1)))
    out.append(("Ex", ("V0-", "Cx-", 1, 3), ("V0+", "Cx+", 0, 3)))
    return out


@dataclass(frozen=True)
class EdgeFrame:
    """How one wall sits in one vertex space.

    ``zeta`` are the vertex's center generators as wall translations;
    ``free`` completes them to a basis of the wall lattice and represents
    the free letter ``letter``.
    """

    edge: str
    vertex: str
    cylinder: str
    letter: int
    zeta: tuple[tuple[Scalar, ...], tuple[Scalar, ...]]
    free: tuple[Scalar, ...]


def _cylinder_zeta(spec: ComplexSpec, vertex: str, cylinder: str):
    """Center generators of ``vertex`` in the (s, t) coordinates of ``cylinder``."""
    ref = _vertex_cylinders(vertex[-1])[vertex][0]
    lat = spec.strips[ref].lattice
    z_ref = ((_period_along(lat, 0), Scalar(0)), (Scalar(0), _period_along(lat, 1)))
    if cylinder == ref:
        return z_ref
    rows_ref = {r.wall: r for r in spec.rows if r.strip == ref}
    for r in spec.rows:
        if r.strip == cylinder and r.wall in rows_ref:
            a = rows_ref[r.wall]
            out = []
            for s, t in z_ref:
                w = tuple(s * x + t * y for x, y in zip(a.col_s, a.col_t))
                out.append((dot(w, r.col_s), dot(w, r.col_t)))
            return tuple(out)
    raise MalformedGraph(f"{cylinder} shares no wall with {ref}")


def _complement(lat: Lattice, zeta, normal) -> tuple[Scalar, ...]:
    from .lattice_algebra import _det

    zc = [lat.coefficients(z) for z in zeta]
    if any(c is None for c in zc):
        raise MalformedGraph("center generators are not wall translations")
    best = None
    for c in product((-1, 0, 1), repeat=lat.rank):
        det = _det([[Fraction(x) for x in row] for row in zc + [list(c)]])
        if abs(det) != 1:
            continue
        v = tuple(sum((k * b[i] for k, b in zip(c, lat.basis)), Scalar(0)) for i in range(lat.ambient_dim))
        if dot(v, normal).sign() <= 0:
            continue
        key = (float(dot(v, v)), tuple(-x for x in c))
        if best is None or key < best[0]:
            best = (key, v)
    if best is None:
        raise MalformedGraph("no unimodular completion of the center")
    return best[1]


def example_frames(spec: ComplexSpec | None = None) -> dict[tuple[str, str], EdgeFrame]:
    spec = spec or build_complex(0)
    frames = {}
    for edge, *ends in _edge_ends():
        wall = edge if edge == "Ex" else edge
        lat = spec.walls[wall].lattice
        for end, (vertex, cyl, cend, letter) in zip("-+", ends):
            row = next(r for r in spec.rows if r.strip == cyl and r.end == cend)
            zc = _cylinder_zeta(spec, vertex, cyl)
            zeta = tuple(
                tuple(s * x + t * y for x, y in zip(row.col_s, row.col_t)) for s, t in zc
            )
            free = _complement(lat, zeta, cross3(row.col_s, row.col_t))
            frames[(edge, end)] = EdgeFrame(edge, vertex, cyl, letter, zeta, free)
    return frames


def frame_image(lat: Lattice, frame: EdgeFrame, v) -> Element:
    """Vertex group element of a wall translation ``v``."""
    coeffs = canonicalize([frame.zeta[0], frame.zeta[1], frame.free], ambient_dim=lat.ambient_dim)
    if coeffs.rank != lat.rank:
        raise MalformedGraph("frame does not span the wall lattice")
    basis = [frame.zeta[0], frame.zeta[1], frame.free]
    c = _solve_in(basis, v)
    return gen(frame.letter) ** c[2], (c[0], c[1])


def _solve_in(basis, v) -> list[int]:
    """Integer coordinates of ``v`` in a basis of three vectors (exact)."""
    from .lattice_algebra import _double

    rows = [_double(b) for b in basis] + [[-x for x in _double(v)]]
    kern = integer_kernel(rows)
    for k in kern:
        if abs(k[-1]) == 1:
            return [k[-1] * x for x in k[:-1]]
    raise MalformedGraph(f"{v} is not in the span of the frame")


def build_example_graph() -> GraphOfGroups:
    spec = build_complex(0)
    frames = example_frames(spec)
    verts = []
    for sd in SIDES:
        for i in range(4):
            verts.append(VertexGroup(f"V{i}{sd}", 3 if i == 0 else 2, Lattice.standard(2)))
    edges = []
    for edge, *_ in _edge_ends():
        lat = spec.walls[edge].lattice
        incs = []
        for end in "-+":
            fr = frames[(edge, end)]
            incs.append(EdgeInclusion(edge, end, fr.vertex, tuple(frame_image(lat, fr, b) for b in lat.basis)))
        edges.append(GraphEdge(edge, lat, incs[0], incs[1]))
    return GraphOfGroups(tuple(verts), tuple(edges))


# ---------------------------------------------------------------------------
# targeted mutations
# ---------------------------------------------------------------------------


def _replace_edge(g: GraphOfGroups, new: GraphEdge) -> GraphOfGroups:
    return GraphOfGroups(g.vertices, tuple(new if e.label == new.label else e for e in g.edges))


def mutate_center_rank(g: GraphOfGroups, vertex: str = "V1-") -> GraphOfGroups:
    """Shrink one designated center to rank 1."""
    vs = tuple(
        VertexGroup(v.label, v.free_rank, canonicalize([(Scalar(1), Scalar(0))], ambient_dim=2))
        if v.label == vertex
        else v
        for v in g.vertices
    )
    return GraphOfGroups(vs, g.edges)


def mutate_edge_rank(g: GraphOfGroups, edge: str = "E1-") -> GraphOfGroups:
    """Drop the last basis vector of one edge lattice together with its images."""
    e = g.edge(edge)
    lat = canonicalize(e.lattice.basis[:-1], ambient_dim=e.lattice.ambient_dim)
    if lat.basis != e.lattice.basis[:-1]:
        raise MalformedGraph("dropping a basis vector changed the remaining basis")
    m = EdgeInclusion(e.minus.edge, "-", e.minus.vertex, e.minus.images[:-1])
    p = EdgeInclusion(e.plus.edge, "+", e.plus.vertex, e.plus.images[:-1])
    return _replace_edge(g, GraphEdge(edge, lat, m, p))


def mutate_shared_letter(g: GraphOfGroups, vertex: str = "V1-") -> GraphOfGroups:
    """Make the second incident edge at ``vertex`` use the first edge's free letter."""
    ends = g.incident(vertex)
    (e0, end0), (e1, end1) = ends[0], ends[1]
    target = abelian_image(g, e0, end0).root
    inc = g.edge(e1).inclusion(end1)
    new_imgs = tuple((target ** _power_of(w, w.primitive_root()) if w else w, v) for w, v in inc.images)
    new_inc = EdgeInclusion(inc.edge, end1, inc.vertex, new_imgs)
    e = g.edge(e1)
    return _replace_edge(g, GraphEdge(e1, e.lattice, new_inc if end1 == "-" else e.minus,
                                      new_inc if end1 == "+" else e.plus))


def mutate_center_sum(g: GraphOfGroups, edge: str = "E1-") -> GraphOfGroups:
    """Re-glue the ``+`` end so both center preimages coincide (infinite index sum)."""
    e = g.edge(edge)
    pre = center_preimage(g, edge, "-")
    n = e.lattice.rank
    if pre.rank != n - 1:
        raise MalformedGraph("mutation needs a corank one center preimage")
    units = [tuple(Scalar(int(i == j)) for j in range(n)) for i in range(n)]
    comp = next(u for u in units if _solve_unimodular(pre.basis + (u,)))
    frame = [[int(x.a) for x in b] for b in pre.basis + (comp,)]
    imgs = []
    for i in range(n):
        c = _coords_in(frame, [int(i == j) for j in range(n)])
        imgs.append((gen(1) ** c[-1], tuple(c[:-1])))
    new_inc = EdgeInclusion(edge, "+", e.plus.vertex, tuple(imgs))
    return _replace_edge(g, GraphEdge(edge, e.lattice, e.minus, new_inc))


def _solve_unimodular(rows) -> bool:
    from .lattice_algebra import _det

    return abs(_det([[Fraction(x.a) for x in r] for r in rows])) == 1


def _coords_in(basis: list[list[int]], v: list[int]) -> list[int]:
    rows = [[Fraction(x) for x in b] for b in basis] + [[Fraction(-x) for x in v]]
    for k in integer_kernel(rows):
        if abs(k[-1]) == 1:
            return [k[-1] * x for x in k[:-1]]
    raise MalformedGraph("vector outside the lattice")


MUTATIONS = {
    "i": mutate_center_rank,
    "ii": mutate_edge_rank,
    "iii": mutate_shared_letter,
    "iv": mutate_center_sum,
}
