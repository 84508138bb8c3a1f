"""Marked length spectra on vertex quotient graphs and Euclidean translation vectors.

Dividing a vertex space by its center leaves a graph: one circle per wall
(its length is the spacing between parallel fringe planes) and one arc per
gluing cylinder.  A free-group element acts on the universal cover tree with
translation length equal to the length of its cyclically reduced loop.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .complex_model import ComplexSpec, build_complex, is_thick
from .free_words import FreeWord
from .group_model import EdgeFrame, _vertex_cylinders, example_frames
from .lattice_algebra import ONE, ZERO, Scalar, dot

VERTEX_TAGS = tuple(f"V{i}{sd}" for sd in "-+" for i in range(4))


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GraphEdgeData:
    label: str
    tail: str
    head: str
    length: Scalar
    letter: int | None = None  # free generator carried by a circle


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple[str, ...]
    edges: tuple[GraphEdgeData, ...]
    base: str
    generator_loops: tuple[tuple[int, "GraphWord"], ...] = ()
    slabs: tuple[dict, ...] = ()

    def __post_init__(self):
        for e in self.edges:
            if e.length.sign() <= 0:
                raise GraphError(f"edge {e.label} has nonpositive length")
            if e.tail not in self.vertices or e.head not in self.vertices:
                raise GraphError(f"edge {e.label} has an unknown endpoint")
        if self.base not in self.vertices:
            raise GraphError("base vertex missing")

    def edge(self, label: str) -> GraphEdgeData:
        for e in self.edges:
            if e.label == label:
                return e
        raise KeyError(label)

    def loop_for(self, letter: int) -> "GraphWord":
        return dict(self.generator_loops)[letter]

    def word_to_loop(self, w: FreeWord) -> "GraphWord":
        steps: list[tuple[str, int]] = []
        for a in w.letters:
            loop = self.loop_for(abs(a))
            steps += list(loop.steps if a > 0 else loop.inverse().steps)
        return GraphWord(tuple(steps))

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "base": self.base,
            "edges": [
                {"label": e.label, "tail": e.tail, "head": e.head, "length": e.length.to_json(), "letter": e.letter}
                for e in self.edges
            ],
            "slabs": list(self.slabs),
        }


@dataclass(frozen=True)
class GraphWord:
    """Directed edge steps ``(label, +1/-1)``; stored without backtracking."""

    steps: tuple[tuple[str, int], ...]

    def __post_init__(self):
        out: list[tuple[str, int]] = []
        for lab, d in self.steps:
            if d not in (1, -1):
                raise GraphError("direction must be +1 or -1")
            if out and out[-1] == (lab, -d):
                out.pop()
            else:
                out.append((lab, d))
        object.__setattr__(self, "steps", tuple(out))

    def inverse(self) -> "GraphWord":
        return GraphWord(tuple((lab, -d) for lab, d in reversed(self.steps)))

    def __mul__(self, other: "GraphWord") -> "GraphWord":
        return GraphWord(self.steps + other.steps)

    def __pow__(self, n: int) -> "GraphWord":
        if n < 0:
            return self.inverse() ** (-n)
        return GraphWord(self.steps * n)

    def cyclically_reduced(self) -> "GraphWord":
        s = list(self.steps)
        while len(s) >= 2 and s[0] == (s[-1][0], -s[-1][1]):
            s = s[1:-1]
        return GraphWord(tuple(s))


def _endpoints(g: MetricGraph, step: tuple[str, int]) -> tuple[str, str]:
    e = g.edge(step[0])
    return (e.tail, e.head) if step[1] > 0 else (e.head, e.tail)


def check_loop(g: MetricGraph, w: GraphWord) -> None:
    at = g.base
    for st in w.steps:
        a, b = _endpoints(g, st)
        if a != at:
            raise GraphError(f"step {st} does not start at {at}")
        at = b
    if at != g.base:
        raise GraphError("word is not a loop at the base vertex")


def mls(g: MetricGraph, w) -> Scalar:
    """Translation length on the universal cover tree (exact)."""
    if isinstance(w, FreeWord):
        w = g.word_to_loop(w)
    check_loop(g, w)
    total = ZERO
    for lab, _ in w.cyclically_reduced().steps:
        total = total + g.edge(lab).length
    return total


# ---------------------------------------------------------------------------
# vertex quotient graphs of the example
# ---------------------------------------------------------------------------


def _frames_at(vertex: str) -> list[EdgeFrame]:
    frames = [f for f in _frames().values() if f.vertex == vertex]
    return sorted(frames, key=lambda f: f.letter)


@lru_cache(maxsize=None)
def _frames() -> dict:
    return example_frames()


@lru_cache(maxsize=None)
def _spec(eps: Scalar) -> ComplexSpec:
    return build_complex(eps)


def _wall_of(frame: EdgeFrame) -> str:
    return frame.edge


def vertex_quotient_graph(vertex: str, eps=0) -> MetricGraph:
    if vertex not in VERTEX_TAGS:
        raise GraphError(f"unknown vertex {vertex!r}")
    eps = Scalar.of(eps)
    spec = _spec(eps)
    frames = _frames_at(vertex)
    cylinders = _vertex_cylinders(vertex[-1])[vertex]
    walls = {_wall_of(f): f for f in frames}
    rows = [r for r in spec.rows if r.strip in cylinders and r.wall in walls]

    nodes: dict[str, str] = {}
    slabs = []
    for w in walls:
        faces = {spec.walls[w].thickness if r.thick_face else ZERO for r in rows if r.wall == w}
        if len(faces) != 1:
            raise GraphError(f"{vertex}: slab {w} is attached on both faces and does not dangle")
        nodes[w] = f"p_{w}"
        if is_thick(w):
            slabs.append({"wall": w, "thickness": float(spec.walls[w].thickness),
                          "face": float(next(iter(faces))), "dangling": True})

    edges = []
    for w, fr in walls.items():
        row = next(r for r in rows if r.wall == w)
        desc = next(d for d in spec.walls[w].fringes if d.strip == row.strip and d.end == row.end)
        edges.append(GraphEdgeData(f"circle_{w}", nodes[w], nodes[w], desc.spacing, fr.letter))
    for cyl in cylinders:
        ends = sorted((r for r in spec.rows if r.strip == cyl), key=lambda r: r.end)
        if not all(r.wall in walls for r in ends):
            raise GraphError(f"{vertex}: cylinder {cyl} leaves the vertex")
        edges.append(GraphEdgeData(f"arc_{cyl}", nodes[ends[0].wall], nodes[ends[1].wall],
                                   spec.strips[cyl].width))

    base = nodes[_wall_of(frames[0])]
    g0 = MetricGraph(tuple(nodes.values()), tuple(edges), base, (), tuple(slabs))
    loops = []
    for w, fr in walls.items():
        path = _arc_path(g0, base, nodes[w])
        loops.append((fr.letter, path * GraphWord(((f"circle_{w}", 1),)) * path.inverse()))
    return MetricGraph(g0.vertices, g0.edges, base, tuple(sorted(loops, key=lambda t: t[0])), tuple(slabs))


def _arc_path(g: MetricGraph, start: str, goal: str) -> GraphWord:
    prev: dict[str, tuple[str, tuple[str, int]] | None] = {start: None}
    todo = [start]
    while todo:
        at = todo.pop(0)
        if at == goal:
            break
        for e in g.edges:
            if e.letter is not None:
                continue
            for st in ((e.label, 1), (e.label, -1)):
                a, b = _endpoints(g, st)
                if a == at and b not in prev:
                    prev[b] = (at, st)
                    todo.append(b)
    if goal not in prev:
        raise GraphError(f"{goal} unreachable from {start}")
    steps = []
    at = goal
    while prev[at] is not None:
        at, st = prev[at]
        steps.append(st)
    return GraphWord(tuple(reversed(steps)))


# ---------------------------------------------------------------------------
# Euclidean factor
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EuclideanFactorData:
    """Center generators, their Gram matrix, and the Euclidean shift of each free letter."""

    vertex: str
    zeta: tuple[tuple[Scalar, ...], ...]
    gram: tuple[tuple[Scalar, ...], ...]
    letter_shift: tuple[tuple[int, tuple[Fraction, ...]], ...]

    def __post_init__(self):
        n = len(self.gram)
        for i in range(n):
            for j in range(n):
                if self.gram[i][j] != self.gram[j][i]:
                    raise GraphError("gram matrix is not symmetric")
        if n >= 1 and self.gram[0][0].sign() <= 0:
            raise GraphError("gram matrix is not positive definite")
        if n == 2 and (self.gram[0][0] * self.gram[1][1] - self.gram[0][1] ** 2).sign() <= 0:
            raise GraphError("gram matrix is not positive definite")

    def shift(self, letter: int) -> tuple[Fraction, ...]:
        return dict(self.letter_shift)[letter]

    def to_json(self) -> dict:
        return {
            "vertex": self.vertex,
            "gram": [[float(x) for x in r] for r in self.gram],
            "letter_shift": {str(k): [str(x) for x in v] for k, v in self.letter_shift},
        }


def _rational(x: Scalar) -> Fraction:
    if not x.is_rational():
        raise GraphError(f"{x} is not rational")
    return x.a


def euclidean_data(vertex: str, eps=0) -> EuclideanFactorData:
    """Projection of each free letter's translation onto the center plane, in center coordinates."""
    frames = _frames_at(vertex)
    ref = frames[0]
    zeta = ref.zeta
    gram = tuple(tuple(dot(a, b) for b in zeta) for a in zeta)
    shifts = []
    for fr in frames:
        g = tuple(tuple(dot(a, b) for b in fr.zeta) for a in fr.zeta)
        rhs = [dot(fr.free, z) for z in fr.zeta]
        det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        c1 = (rhs[0] * g[1][1] - rhs[1] * g[0][1]) / det
        c2 = (g[0][0] * rhs[1] - g[1][0] * rhs[0]) / det
        shifts.append((fr.letter, (_rational(c1), _rational(c2))))
        if g != gram:
            raise GraphError(f"{vertex}: center generators change length between walls")
    return EuclideanFactorData(vertex, zeta, gram, tuple(shifts))


def translation_vector(vertex: str, gamma, data: EuclideanFactorData) -> tuple[Fraction, ...]:
    """Euclidean translation of ``gamma = (word, center vector)`` in the center basis."""
    word, k = gamma
    out = [Fraction(x) for x in k]
    if isinstance(word, GraphWord):
        letters = []
        for lab, d in word.steps:
            if lab.startswith("circle_"):
                letters.append(d * _letter_of_circle(vertex, lab))
        word = FreeWord(tuple(letters))
    for a in word.letters:
        sh = data.shift(abs(a))
        sgn = 1 if a > 0 else -1
        out = [x + sgn * y for x, y in zip(out, sh)]
    return tuple(out)


def _letter_of_circle(vertex: str, label: str) -> int:
    wall = label[len("circle_"):]
    for fr in _frames_at(vertex):
        if _wall_of(fr) == wall:
            return fr.letter
    raise GraphError(f"{label} is not a circle of {vertex}")


def twisted_fixture(t: Fraction = Fraction(1, 2)) -> EuclideanFactorData:
    """``F_2 x Z`` acting with ``T(g, k) = k + t * (exponent sum of x1 in g)``."""
    return EuclideanFactorData("twisted", ((ONE,),), ((ONE,),), ((1, (Fraction(t),)), (2, (Fraction(0),))))


# ---------------------------------------------------------------------------
# comparison across thickness
# ---------------------------------------------------------------------------


def random_words(rng: random.Random, free_rank: int, count: int, max_len: int = 8) -> list[FreeWord]:
    out: list[FreeWord] = []
    while len(out) < count:
        n = rng.randint(1, max_len)
        w = FreeWord(tuple(rng.choice([1, -1]) * rng.randint(1, free_rank) for _ in range(n)))
        if w.cyclic_core()[1]:
            out.append(w)
    return out


@dataclass
class VertexComparison:
    vertex: str
    ratio: float
    spread: float
    exact: bool
    t_equal: bool
    words: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class GeometricDataComparison:
    delta: float
    vertices: list[VertexComparison] = field(default_factory=list)
    witnesses: list[str] = field(default_factory=list)

    @property
    def lambdas(self) -> dict[str, float]:
        return {v.vertex: v.ratio for v in self.vertices}

    @property
    def t_equal(self) -> bool:
        return all(v.t_equal for v in self.vertices)

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def to_json(self) -> dict:
        return {"delta": self.delta, "passed": self.passed, "vertices": [v.to_json() for v in self.vertices],
                "witnesses": list(self.witnesses)}

    def table(self) -> str:
        lines = [f"{'vertex':8} {'lambda':>14} {'spread':>10} T-check"]
        for v in self.vertices:
            lines.append(f"{v.vertex:8} {v.ratio:14.12g} {v.spread:10.2e} {'ok' if v.t_equal else 'FAIL'}")
        return "\n".join(lines)


def compare_data(delta, seed: int = 0, n_random: int = 20, tol: float = 1e-9) -> GeometricDataComparison:
    delta = Scalar.of(delta)
    if delta.sign() < 0:
        raise GraphError("delta must be nonnegative")
    rng = random.Random(seed)
    out = GeometricDataComparison(float(delta))
    for v in VERTEX_TAGS:
        g0 = vertex_quotient_graph(v, 0)
        gd = vertex_quotient_graph(v, delta)
        m = len(g0.generator_loops)
        words = [FreeWord((k,)) for k in range(1, m + 1)] + random_words(rng, m, n_random)
        ratios = []
        for w in words:
            a, b = mls(g0, w), mls(gd, w)
            ratios.append(b / a)
        exact = all(r == ratios[0] for r in ratios)
        fl = [float(r) for r in ratios]
        spread = max(fl) - min(fl)
        if spread > tol:
            out.witnesses.append(f"{v}: length ratio spread {spread:.3e}")
        d0, dd = euclidean_data(v, 0), euclidean_data(v, delta)
        t_eq = d0.letter_shift == dd.letter_shift and d0.gram == dd.gram
        samples = [(w, (rng.randint(-3, 3), rng.randint(-3, 3))) for w in words]
        t_eq = t_eq and all(translation_vector(v, s, d0) == translation_vector(v, s, dd) for s in samples)
        if not t_eq:
            out.witnesses.append(f"{v}: translation vectors differ")
        out.vertices.append(VertexComparison(v, fl[0], spread, exact, t_eq, len(words)))
    return out


def shortest_word(vertex: str, eps=0, max_len: int = 6) -> tuple[FreeWord, Scalar]:
    """Word of length <= max_len with the smallest nonzero translation length.

    Ties go to the shorter word, then shortlex with x1 < x1^-1 < x2 < ...
    """
    g = vertex_quotient_graph(vertex, eps)
    m = len(g.generator_loops)
    best = None
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for a in [x for k in range(1, m + 1) for x in (k, -k)]:
                if w and w[-1] == -a:
                    continue
                nxt.append(w + (a,))
        for t in nxt:
            fw = FreeWord(t)
            L = mls(g, fw)
            if L.sign() > 0:
                key = (L, len(t), tuple(2 * abs(a) - (a > 0) for a in t))
                if best is None or key < best[0]:
                    best = (key, fw)
        frontier = nxt
    return best[1], best[0][0]


def recover_coordinates(
    tau1: Sequence, tau2: Sequence, xi1: Sequence, xi2: Sequence, gamma: Sequence
) -> tuple[Fraction, Fraction]:
    """Coordinates of ``gamma`` in the basis ``(xi1, xi2)`` from two functionals.

    ``tau_i`` must vanish on ``xi_i`` and not on the other basis vector.
    """
    def ev(t, v):
        return sum((Fraction(a) * Fraction(b) for a, b in zip(t, v)), Fraction(0))

    if ev(tau1, xi1) != 0 or ev(tau2, xi2) != 0:
        raise ValueError("each functional must vanish on its own basis vector")
    d1, d2 = ev(tau2, xi1), ev(tau1, xi2)
    if d1 == 0 or d2 == 0:
        raise ValueError("functional vanishes on both basis vectors")
    return ev(tau2, gamma) / d1, ev(tau1, gamma) / d2
