"""Special segments through the shared wall and the divergence of the stretch map.

Coordinates in the shared wall are ``(r, s, t)``: ``r`` runs along the
common circle, ``t`` is the line factor of the ``-`` side and ``s`` the line
factor of the ``+`` side.  The ``-`` fringe is the plane ``s = 0``; fringes of
the ``+`` cylinder are the planes ``t = k sqrt2``.  On either side a special
segment is a constant-velocity product of a reduced geodesic of length ``D``
with a line segment of the same length, so it has length ``sqrt2 * D``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .complex_model import ChainPoint, phi_map
from .geodesic_engine import (
    DEFAULT_TOL,
    SolveResult,
    _f,
    period_chain,
    period_length,
    shortest_path,
)

SQRT2 = math.sqrt(2.0)
IDENTITY_TOL = 1e-6


class VerificationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# reduced geodesics
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def reduced_run(eps: float, side: str, n: int, tol: float = DEFAULT_TOL) -> SolveResult:
    """Geodesic from the first marked corner through ``n`` periods and the Cx strip."""
    ch = period_chain(eps, side, n, tail=True)
    target = tuple(_f(ch.pieces[-1].entry.base))
    return shortest_path(ch, ch.pieces[0].marked_out, target, tol)


@lru_cache(maxsize=None)
def period(eps: float, tol: float = DEFAULT_TOL) -> float:
    return period_length(eps, tol, check=False)


def prefix_length(res: SolveResult, piece: int) -> float:
    """Arclength of a solved path up to its entry into ``piece``."""
    total = 0.0
    for k, a, b in res.path.points():
        if k >= piece:
            break
        total += float(np.linalg.norm(b - a))
    return total


def _entry_point(res: SolveResult, piece: int) -> np.ndarray:
    for k, a, _ in res.path.points():
        if k == piece:
            return a
    raise VerificationError(f"path has no piece {piece}")


# ---------------------------------------------------------------------------
# special segments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    label: str
    start: tuple[float, ...]
    end: tuple[float, ...]
    frame: str
    length: float

    def to_json(self) -> dict:
        return {"label": self.label, "start": list(self.start), "end": list(self.end),
                "frame": self.frame, "length": self.length}


@dataclass(frozen=True)
class SpecialSegment:
    eps: float
    n: int
    reduced_minus: float  # D on the - side
    reduced_plus: float
    fringe_index: int  # the + fringe is the plane t = fringe_index * sqrt2
    q_minus: tuple[float, float, float]
    q_plus: tuple[float, float, float]
    segments: tuple[Segment, Segment, Segment]

    @property
    def fringe_level(self) -> float:
        return self.fringe_index * SQRT2

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def middle(self) -> Segment:
        return self.segments[1]

    def midpoint(self) -> np.ndarray:
        return 0.5 * (np.array(self.q_minus) + np.array(self.q_plus))

    def middle_angles(self) -> tuple[float, float, float]:
        """Angles (radians) of the middle segment with the r, s and t axes."""
        d = np.array(self.q_plus) - np.array(self.q_minus)
        d = d / np.linalg.norm(d)
        return tuple(float(np.arccos(np.clip(abs(x), 0.0, 1.0))) for x in d)

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "n": self.n,
            "reduced_minus": self.reduced_minus,
            "reduced_plus": self.reduced_plus,
            "fringe_index": self.fringe_index,
            "q_minus": list(self.q_minus),
            "q_plus": list(self.q_plus),
            "length": self.length,
            "segments": [s.to_json() for s in self.segments],
        }


def choose_fringe(height: float) -> int:
    """Index of the unique + fringe whose level lies in ``[height, height + sqrt2)``."""
    k = math.ceil(height / SQRT2 - 1e-12)
    if not height - 1e-12 <= k * SQRT2 < height + SQRT2:
        raise VerificationError("fringe choice infeasible")
    return k


def _assemble(eps: float, n: int, d_minus: float, d_plus: float, q_minus, q_plus, k: int) -> SpecialSegment:
    qm, qp = np.array(q_minus, float), np.array(q_plus, float)
    outer_m = Segment("minus", (0.0, 0.0), (d_minus, d_minus), "reduced x line", SQRT2 * d_minus)
    mid = Segment("wall", tuple(qm), tuple(qp), "shared wall", float(np.linalg.norm(qp - qm)))
    outer_p = Segment("plus", (d_plus, d_plus), (0.0, 0.0), "reduced x line", SQRT2 * d_plus)
    return SpecialSegment(eps, n, d_minus, d_plus, k, tuple(qm), tuple(qp), (outer_m, mid, outer_p))


def build_segment(eps: float, n: int, fringe_index: int | None = None, tol: float = DEFAULT_TOL) -> SpecialSegment:
    """The segment for one thickness; the + fringe defaults to the one chosen from its own height."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    dm = reduced_run(float(eps), "-", n, tol).length
    dp = reduced_run(float(eps), "+", n, tol).length
    k = choose_fringe(dm) if fringe_index is None else fringe_index
    level = k * SQRT2
    a = level - dm
    if a < -1e-12:
        raise VerificationError("chosen fringe lies below the entry point")
    return _assemble(float(eps), n, dm, dp, (0.0, 0.0, dm), (0.0, a, level), k)


def build_pair(delta: float, n: int, tol: float = DEFAULT_TOL) -> tuple[SpecialSegment, SpecialSegment, dict]:
    """Segments over 0 and over delta sharing the + fringe chosen above ``q^-`` over delta.

    The one over 0 is returned in shared-wall coordinates already pushed
    forward by the stretch map, which is an isometry on the shared wall.
    """
    seg_d = build_segment(delta, n, tol=tol)
    d0 = reduced_run(0.0, "-", n, tol).length
    d0p = reduced_run(0.0, "+", n, tol).length
    level = seg_d.fringe_level
    # the stretch map is the identity on walls and on the line factor
    img_qm = np.array([0.0, 0.0, d0])
    img_qp = np.array([0.0, level - d0, level])
    seg_0 = _assemble(0.0, n, d0, d0p, tuple(img_qm), tuple(img_qp), seg_d.fringe_index)
    info = {"phi_q_minus": img_qm.tolist(), "phi_q_plus": img_qp.tolist()}
    return seg_0, seg_d, info


def junction_minimal(before, at, after, plane_normal, h: float = 1e-4) -> bool:
    """Does moving the junction inside its fringe plane never shorten the two adjacent pieces?"""
    before, at, after = (np.asarray(x, float) for x in (before, at, after))
    n = np.asarray(plane_normal, float)
    n = n / np.linalg.norm(n)
    basis = [v - np.dot(v, n) * n for v in np.eye(3)]
    basis = [v / np.linalg.norm(v) for v in basis if np.linalg.norm(v) > 1e-9][:2]
    base = np.linalg.norm(at - before) + np.linalg.norm(after - at)
    for v in basis:
        for sgn in (-1, 1):
            p = at + sgn * h * v
            if np.linalg.norm(p - before) + np.linalg.norm(after - p) < base - 1e-12:
                return False
    return True


def check_junctions(seg: SpecialSegment) -> bool:
    """Straightness across both fringes of the shared wall.

    The incoming product path crosses the strip orthogonally to the fringe
    with equal reduced and line speed, i.e. along ``(0, 1, 1)/sqrt2`` in wall
    coordinates; the outgoing + path does the same mirrored.
    """
    qm, qp = np.array(seg.q_minus), np.array(seg.q_plus)
    incoming = np.array([0.0, -1.0, -1.0]) / SQRT2
    outgoing = np.array([0.0, 1.0, 1.0]) / SQRT2
    ok = junction_minimal(qm + incoming, qm, qp if np.linalg.norm(qp - qm) > 0 else qm + outgoing, (0, 1, 0))
    ok = ok and junction_minimal(qm if np.linalg.norm(qp - qm) > 0 else qp - outgoing, qp, qp + outgoing, (0, 0, 1))
    return ok


def check_fringe_geometry(seg: SpecialSegment) -> bool:
    """Middle segment makes pi/4 with both line axes and is orthogonal to the circle axis."""
    if seg.middle.length < 1e-12:
        return True
    ar, as_, at = seg.middle_angles()
    return abs(ar - math.pi / 2) < 1e-9 and abs(as_ - math.pi / 4) < 1e-9 and abs(at - math.pi / 4) < 1e-9


# ---------------------------------------------------------------------------
# divergence quantities
# ---------------------------------------------------------------------------


def _point_segment_distance(p, a, b) -> tuple[float, np.ndarray]:
    p, a, b = (np.asarray(x, float) for x in (p, a, b))
    ab = b - a
    L2 = float(np.dot(ab, ab))
    t = 0.0 if L2 == 0 else float(np.clip(np.dot(p - a, ab) / L2, 0.0, 1.0))
    foot = a + t * ab
    return float(np.linalg.norm(p - foot)), foot


def midpoint_divergence(delta: float, n: int, tol: float = DEFAULT_TOL, enforce: bool = True) -> float:
    """Distance from the image of the midpoint over 0 to the segment over delta."""
    if n == 0:
        return 0.0
    seg0, segd, _ = build_pair(delta, n, tol)
    d, foot = _point_segment_distance(seg0.midpoint(), segd.q_minus, segd.q_plus)
    if enforce:
        closed = n / SQRT2 * (period(delta, tol) - period(0.0, tol))
        if abs(d - closed) > IDENTITY_TOL * n:
            raise VerificationError(f"midpoint divergence {d} differs from closed form {closed}")
        if np.linalg.norm(foot - segd.midpoint()) > IDENTITY_TOL * max(n, 1):
            raise VerificationError("projection of the image midpoint is not the midpoint")
    return d


def ratio_bound(delta: float, tol: float = DEFAULT_TOL) -> float:
    ld, l0 = period(delta, tol), period(0.0, tol)
    return (ld - l0) / (ld + l0 + 5)


def sublinearity_ratio(delta: float, n: int, tol: float = DEFAULT_TOL, enforce: bool = True) -> float:
    seg0, _, _ = build_pair(delta, n, tol)
    d = midpoint_divergence(delta, n, tol, enforce=enforce)
    r = d / (1 + 0.5 * seg0.length)
    if enforce and n >= 1 and r < ratio_bound(delta, tol) - 1e-12:
        raise VerificationError(f"ratio {r} below the bound {ratio_bound(delta, tol)}")
    return r


def boundary_witness(delta: float, n: int, n_total: int | None = None, tol: float = DEFAULT_TOL,
                     enforce: bool = True) -> float:
    """Distance between the ray point over delta and the image of the ray point over 0 after n periods."""
    if n < 1:
        raise ValueError("n must be at least 1")
    N = max(n, n_total or n)
    run_d = reduced_run(float(delta), "-", N, tol)
    run_0 = reduced_run(0.0, "-", N, tol)
    piece = 8 * n
    line_d = prefix_length(run_d, piece)
    line_0 = prefix_length(run_0, piece)
    ch0 = run_0.path.problem.chain
    chd = run_d.path.problem.chain
    marked0 = tuple(float(x) for x in ch0.pieces[piece].marked_in)
    img = phi_map(ChainPoint(piece, marked0), ch0, chd)
    x_red = _entry_point(run_d, piece)
    gap = float(np.linalg.norm(x_red[:2] - np.array(img.coords[:2])))
    w = math.hypot(gap, line_d - line_0)
    if enforce:
        closed = n * (period(delta, tol) - period(0.0, tol))
        if abs(w - closed) > IDENTITY_TOL * n:
            raise VerificationError(f"boundary witness {w} differs from {closed}")
    return w


def parallel_offsets(delta: float, n: int, samples: int = 9, tol: float = DEFAULT_TOL) -> list[float]:
    """Distances between matched points of the two paths near the shared wall.

    Points are matched by their reduced coordinate: across the ``-`` strip by
    the crossing parameter, inside the wall by ``s``, and on the ``+`` side
    by ``t``.  Parallel paths give a constant list.
    """
    seg0, segd, _ = build_pair(delta, n, tol)
    out = []
    # - strip: reduced coordinate u in [0, 1] before the fringe, line coordinate D - 1 + u
    for u in np.linspace(0.0, 1.0, samples):
        p_d = np.array([0.0, u - 1.0, segd.reduced_minus - 1.0 + u])
        p_0 = np.array([0.0, u - 1.0, seg0.reduced_minus - 1.0 + u])
        out.append(float(np.linalg.norm(p_d - p_0)))
    # wall: c over delta runs t = s + D_delta, the image of c over 0 runs t = s + D_0
    a = segd.q_plus[1]
    for s in np.linspace(0.0, a, samples):
        p_d = np.array(segd.q_minus) + s * np.array([0.0, 1.0, 1.0])
        p_0 = np.array(seg0.q_minus) + s * np.array([0.0, 1.0, 1.0])
        out.append(float(np.linalg.norm(p_d - p_0)))
    # + side: matched at equal t, i.e. along the s axis
    level = segd.fringe_level
    for u in np.linspace(0.0, 1.0, samples):
        p_d = np.array([0.0, segd.q_plus[1] + u, level + u])
        p_0 = np.array([0.0, seg0.q_plus[1] + u, level + u])
        out.append(float(np.linalg.norm(p_d - p_0)))
    return out


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def default_n_values(n_max: int) -> list[int]:
    out, n = [], 1
    while n <= n_max:
        out.append(n)
        n *= 2
    return out


@dataclass
class DivergenceRow:
    n: int
    length_0: float
    length_delta: float
    divergence: float
    divergence_closed: float
    ratio: float
    witness: float
    witness_closed: float
    length_bound_delta: float
    length_bound_0: float
    parallel_spread: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class DivergenceReport:
    delta: float
    period_0: float
    period_delta: float
    bound: float
    rows: list[DivergenceRow] = field(default_factory=list)
    verdicts: dict[str, bool] = field(default_factory=dict)
    witnesses: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values()) and not self.witnesses

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "period_0": self.period_0,
            "period_delta": self.period_delta,
            "bound": self.bound,
            "passed": self.passed,
            "verdicts": dict(self.verdicts),
            "witnesses": list(self.witnesses),
            "rows": [r.to_json() for r in self.rows],
        }


def divergence_report(delta: float, n_values, tol: float = DEFAULT_TOL) -> DivergenceReport:
    l0, ld = period(0.0, tol), period(float(delta), tol)
    rep = DivergenceReport(float(delta), l0, ld, ratio_bound(delta, tol))
    n_total = max(n_values)
    for n in n_values:
        seg0, segd, _ = build_pair(delta, n, tol)
        d = midpoint_divergence(delta, n, tol, enforce=False)
        r = d / (1 + 0.5 * seg0.length)
        w = boundary_witness(delta, n, n_total, tol, enforce=False)
        offs = parallel_offsets(delta, n, tol=tol)
        rep.rows.append(DivergenceRow(
            n, seg0.length, segd.length, d, n / SQRT2 * (ld - l0), r, w, n * (ld - l0),
            2 * SQRT2 * (n * ld + 1) + 2, n * SQRT2 * (ld + l0) + 2 * (1 + SQRT2),
            max(offs) - min(offs),
        ))
        if not (check_junctions(segd) and check_fringe_geometry(segd) and check_fringe_geometry(seg0)):
            rep.witnesses.append(f"n={n}: special segment is not straight across the shared wall")
    rows = rep.rows
    rep.verdicts["divergence_identity"] = all(abs(x.divergence - x.divergence_closed) <= IDENTITY_TOL * x.n for x in rows)
    rep.verdicts["witness_identity"] = all(abs(x.witness - x.witness_closed) <= IDENTITY_TOL * x.n for x in rows)
    rep.verdicts["ratio_bound"] = all(x.ratio >= rep.bound - 1e-12 for x in rows)
    rep.verdicts["length_bounds"] = all(
        x.length_delta <= x.length_bound_delta + 1e-9 and x.length_0 <= x.length_bound_0 + 1e-9 for x in rows
    )
    rep.verdicts["parallel"] = all(x.parallel_spread <= IDENTITY_TOL for x in rows)
    divs = [x.divergence for x in rows]
    rep.verdicts["monotone"] = all(b >= a - 1e-12 for a, b in zip(divs, divs[1:]))
    if delta > 0:
        rep.verdicts["positive_gap"] = ld - l0 > 0
    for k, ok in rep.verdicts.items():
        if not ok:
            rep.witnesses.append(f"check {k} failed")
    return rep


CSV_FIELDS = ["delta", "n", "length_0", "length_delta", "divergence", "divergence_closed", "ratio", "bound",
              "witness", "witness_closed", "parallel_spread"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _round_json(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_json(v) for v in obj]
    return obj


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rep in reports:
        for r in rep.rows:
            w.writerow([_fmt(v) for v in (rep.delta, r.n, r.length_0, r.length_delta, r.divergence,
                                          r.divergence_closed, r.ratio, rep.bound, r.witness, r.witness_closed,
                                          r.parallel_spread)])
    return buf.getvalue()


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_report(deltas, n_max: int, tol: float = DEFAULT_TOL, formats=("json", "csv"), out_dir="out",
               svg: bool = False, pinned: dict | None = None) -> tuple[int, list[Path], list[DivergenceReport]]:
    """Compute, check and write the divergence reports; returns (exit code, files, reports)."""
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise ValueError("at least one delta is required")
    if any(d <= 0 for d in deltas):
        raise ValueError("deltas must be positive")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"{out} is not writable")
    n_values = default_n_values(n_max)
    reports = [divergence_report(d, n_values, tol) for d in deltas]
    if pinned:
        for rep in reports:
            for key, val in ((0.0, rep.period_0), (rep.delta, rep.period_delta)):
                ref = pinned.get(_fmt(key))
                if ref is not None and abs(ref - val) > 1e-5:
                    rep.witnesses.append(f"period at {key} is {val}, pinned {ref}")
    files: list[Path] = []
    if "json" in formats:
        p = out / "divergence.json"
        doc = {"tolerance": tol, "n_values": n_values, "reports": [r.to_json() for r in reports]}
        atomic_write(p, json.dumps(_round_json(doc), indent=2) + "\n")
        files.append(p)
    if "csv" in formats:
        p = out / "divergence.csv"
        atomic_write(p, reports_to_csv(reports))
        files.append(p)
    if svg:
        from .svg import chain_svg, wall_svg

        p = out / "period_chain.svg"
        atomic_write(p, chain_svg(deltas[0]))
        files.append(p)
        p = out / "shared_wall.svg"
        atomic_write(p, wall_svg(deltas[0], n_values[-1]))
        files.append(p)
    code = 0 if all(r.passed for r in reports) else 1
    return code, files, reports
