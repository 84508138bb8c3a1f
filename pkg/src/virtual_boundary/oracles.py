"""Slow, independent reference computations used to cross-check the fast code.

* ``grid_chain_length``: exact dynamic programming over discretised fringe
  parameters, refined in shrinking windows.  Shares only the piece geometry
  with the solver.
* ``ResidueLattice``: full-rank integer lattices as subgroups of
  ``(Z/D)^d`` enumerated by closure, with ``D`` the gcd of maximal minors.
* ``brute_conjugate_commensurable``: exponent search plus explicit
  conjugator verification by free reduction.
* ``tree_displacement``: translation length of a loop as the least
  displacement over a ball of vertices in the universal cover tree.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import gcd

import numpy as np

from .complex_model import ChainGeometry
from .free_words import FreeWord

# ---------------------------------------------------------------------------
# geodesic length by grid dynamic programming
# ---------------------------------------------------------------------------


def _vec(v) -> np.ndarray:
    return np.array([float(x) for x in v])


def _crossing_centre(chain: ChainGeometry, k: int) -> float:
    left, right = chain.pieces[k], chain.pieces[k + 1]
    if left.anchor_out is not None:
        return float(left.anchor_out)
    if right.anchor_in is not None:
        return float(right.anchor_in)
    return 0.0


@dataclass
class GridResult:
    length: float
    sigmas: np.ndarray


def _dp(chain: ChainGeometry, start: np.ndarray, end: np.ndarray, grids: list[np.ndarray], chunk: int = 256):
    """Minimum over the product grid of the broken-path length, with argmins."""
    pieces = chain.pieces
    m = len(pieces)
    if m == 1:
        return float(np.linalg.norm(end - start)), np.zeros(0)
    # value at the first crossing
    p0 = pieces[0]
    pts = _vec(p0.exit.base)[None, :] + grids[0][:, None] * _vec(p0.exit.direction)[None, :]
    value = np.linalg.norm(pts - start[None, :], axis=1)
    back: list[np.ndarray] = []
    for k in range(1, m - 1):
        pc = pieces[k]
        tr = chain.transitions[k - 1]
        prev_sig = tr.sign * grids[k - 1] + float(tr.offset)
        entry = _vec(pc.entry.base)[None, :] + prev_sig[:, None] * _vec(pc.entry.direction)[None, :]
        exit_ = _vec(pc.exit.base)[None, :] + grids[k][:, None] * _vec(pc.exit.direction)[None, :]
        new_val = np.empty(len(grids[k]))
        arg = np.empty(len(grids[k]), dtype=int)
        for lo in range(0, len(grids[k]), chunk):
            blk = exit_[lo : lo + chunk]
            d = np.linalg.norm(blk[:, None, :] - entry[None, :, :], axis=2) + value[None, :]
            j = np.argmin(d, axis=1)
            arg[lo : lo + chunk] = j
            new_val[lo : lo + chunk] = d[np.arange(len(j)), j]
        back.append(arg)
        value = new_val
    last = pieces[-1]
    tr = chain.transitions[-1]
    prev_sig = tr.sign * grids[-1] + float(tr.offset)
    entry = _vec(last.entry.base)[None, :] + prev_sig[:, None] * _vec(last.entry.direction)[None, :]
    total = value + np.linalg.norm(end[None, :] - entry, axis=1)
    j = int(np.argmin(total))
    idx = [j]
    for arg in reversed(back):
        idx.append(int(arg[idx[-1]]))
    idx.reverse()
    sig = np.array([grids[k][i] for k, i in enumerate(idx)])
    return float(total[j]), sig


def grid_chain_length(
    chain: ChainGeometry,
    start,
    end,
    box: float = 3.0,
    step: float = 1e-3,
    refine=((5e-3, 1e-5), (5e-5, 1e-7)),
) -> GridResult:
    """Shortest broken path through the chain, searched on fringe-parameter grids."""
    start, end = _vec(start), _vec(end)
    m = len(chain.pieces)
    centres = [_crossing_centre(chain, k) for k in range(m - 1)]
    grids = [c + np.arange(-box, box + step / 2, step) for c in centres]
    length, sig = _dp(chain, start, end, grids)
    for half, h in refine:
        grids = [s + np.arange(-half, half + h / 2, h) for s in sig]
        length, sig = _dp(chain, start, end, grids)
    return GridResult(length, sig)


# ---------------------------------------------------------------------------
# lattices by residue enumeration
# ---------------------------------------------------------------------------


def _det_int(m: list[list[int]]) -> int:
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return int(det)


def maximal_minor_gcd(gens: list[tuple[int, ...]], dim: int) -> int:
    g = 0
    for rows in combinations(gens, dim):
        g = gcd(g, _det_int([list(r) for r in rows]))
    return g


class ResidueLattice:
    """A full-rank lattice ``L`` in ``Z^d`` stored as ``L / D Z^d`` for a ``D`` with ``D Z^d <= L``."""

    def __init__(self, gens, dim: int, modulus: int):
        self.dim = dim
        self.modulus = modulus
        shifts = [tuple(int(x) % modulus for x in g) for g in gens]
        mask = np.zeros((modulus,) * dim, dtype=bool)
        mask[(0,) * dim] = True
        changed = True
        while changed:
            changed = False
            for g in shifts:
                while True:
                    grown = mask | np.roll(mask, g, axis=tuple(range(dim)))
                    if grown.sum() == mask.sum():
                        break
                    mask, changed = grown, True
        self.residues = frozenset(tuple(int(i) for i in ix) for ix in np.argwhere(mask))

    def __contains__(self, v) -> bool:
        return tuple(int(x) % self.modulus for x in v) in self.residues

    @property
    def size(self) -> int:
        return len(self.residues)


def residue_lattices(gens_a, gens_b, dim: int, max_modulus: int = 64):
    """Both lattices modulo a common ``D``; None when either is not full rank or ``D`` is too large."""
    da = maximal_minor_gcd(gens_a, dim)
    db = maximal_minor_gcd(gens_b, dim)
    if da == 0 or db == 0:
        return None
    mod = da * db // gcd(da, db)
    if mod > max_modulus:
        return None
    return ResidueLattice(gens_a, dim, mod), ResidueLattice(gens_b, dim, mod)


def residue_index(a: ResidueLattice, b: ResidueLattice) -> int | None:
    """``[A : B]`` when ``B <= A``, else None."""
    if not b.residues <= a.residues:
        return None
    return a.size // b.size


def residue_intersection(a: ResidueLattice, b: ResidueLattice) -> frozenset:
    return a.residues & b.residues


def residue_sum_size(gens_a, gens_b, dim: int, modulus: int) -> int:
    return ResidueLattice(list(gens_a) + list(gens_b), dim, modulus).size


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


def _all_rotations_conjugators(u: FreeWord) -> list[FreeWord]:
    """Conjugators ``c`` taking ``u`` to each rotation of its cyclic core."""
    head, core = u.cyclic_core()
    out = []
    letters = core.letters
    for k in range(max(len(letters), 1)):
        prefix = FreeWord(letters[:k])
        out.append(prefix.inverse() * head.inverse())
    return out


def are_conjugate(u: FreeWord, v: FreeWord) -> FreeWord | None:
    """A ``c`` with ``c u c^-1 = v``, checked by free reduction, or None."""
    if not u and not v:
        return FreeWord()
    if len(u.cyclic_core()[1]) != len(v.cyclic_core()[1]):
        return None
    hv, _ = v.cyclic_core()
    for c in _all_rotations_conjugators(u):
        cand = hv * c
        if u.conjugate_by(cand) == v:
            return cand
    return None


def brute_conjugate_commensurable(w1: FreeWord, w2: FreeWord, max_exp: int = 6) -> bool:
    """Search ``p, q`` with ``|p|, |q| <= max_exp`` and a conjugator with ``c w1^p c^-1 = w2^q``."""
    for p, q in product(range(1, max_exp + 1), range(-max_exp, max_exp + 1)):
        if q == 0:
            continue
        if are_conjugate(w1**p, w2**q) is not None:
            return True
    return False


# ---------------------------------------------------------------------------
# metric graphs: displacement in the universal cover
# ---------------------------------------------------------------------------


def tree_displacement(graph, loop, radius: int = 4):
    """min over cover vertices x within ``radius`` steps of d(x, loop . x).

    Vertices of the cover are reduced edge paths from the base; the path from
    x to loop.x is x^-1 loop x, whose reduced length is the distance.
    """
    from .geometric_data import GraphWord, _endpoints

    ball = [GraphWord(())]
    frontier = [(GraphWord(()), graph.base)]
    for _ in range(radius):
        nxt = []
        for path, at in frontier:
            for e in graph.edges:
                for step in ((e.label, 1), (e.label, -1)):
                    a, b = _endpoints(graph, step)
                    if a != at or (path.steps and path.steps[-1] == (e.label, -step[1])):
                        continue
                    nxt.append((path * GraphWord((step,)), b))
        ball += [p for p, _ in nxt]
        frontier = nxt
    best = None
    for x in ball:
        d = x.inverse() * loop * x
        total = sum((graph.edge(lab).length for lab, _ in d.steps), graph.edges[0].length * 0)
        if best is None or total < best:
            best = total
    return best
