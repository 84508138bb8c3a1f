"""Small hand-written SVG diagrams (no plotting dependency)."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .counterexample import SQRT2, build_pair
from .geodesic_engine import period_geodesic


def _doc(width: int, height: int, body: list[str], title: str) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">'
    )
    return "\n".join([head, f"<title>{escape(title)}</title>", '<rect width="100%" height="100%" fill="white"/>',
                      *body, "</svg>"]) + "\n"


def _line(x1, y1, x2, y2, stroke="black", width=1.0, dash=None) -> str:
    d = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{stroke}" stroke-width="{width}"{d}/>')


def _text(x, y, s, anchor="middle", fill="black") -> str:
    return f'<text x="{x:.2f}" y="{y:.2f}" text-anchor="{anchor}" fill="{fill}">{escape(s)}</text>'


def chain_svg(delta: float, eps_values=(0.0,)) -> str:
    """Unfolded period chain: one column per piece, path drawn by fringe parameter.

    Columns have width proportional to the Euclidean length of the path in
    that piece; the vertical axis is the fringe parameter at each crossing.
    """
    runs = {e: period_geodesic(e) for e in (*eps_values, delta)}
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    W, H, pad = 900, 320, 40
    all_x = []
    for res in runs.values():
        pts = res.path.points()
        all_x.append(sum(float(np.linalg.norm(b - a)) for _, a, b in pts))
    sx = (W - 2 * pad) / max(all_x)
    sig_all = np.concatenate([r.path.breakpoints for r in runs.values()])
    lo, hi = float(sig_all.min()) - 0.5, float(sig_all.max()) + 0.5
    sy = (H - 2 * pad) / (hi - lo)
    body = []
    for i, (eps, res) in enumerate(runs.items()):
        col = colors[i % len(colors)]
        pts = res.path.points()
        sig = [float(lo + (hi - lo) / 2)] + res.path.breakpoints.tolist() + [float(lo + (hi - lo) / 2)]
        x = pad
        chain = res.path.problem.chain
        for j, (k, a, b) in enumerate(pts):
            dx = float(np.linalg.norm(b - a)) * sx
            y1 = H - pad - (sig[j] - lo) * sy
            y2 = H - pad - (sig[j + 1] - lo) * sy
            body.append(_line(x, y1, x + dx, y2, col, 2.0))
            if i == 0:
                body.append(_line(x, pad, x, H - pad, "#bbbbbb", 0.5, "3,3"))
                body.append(_text(x + dx / 2, pad - 8, chain.pieces[k].tag.rstrip("+-")))
            x += dx
        body.append(_text(W - pad, H - 12 - 14 * i, f"eps={eps:g}  length={res.length:.9f}", "end", col))
    return _doc(W, H, body, f"period chain unfolding, delta={delta}")


def wall_svg(delta: float, n: int) -> str:
    """The shared wall in (s, t) coordinates with both fringes and the two crossings."""
    seg0, segd, _ = build_pair(delta, n)
    qm_d, qp_d = np.array(segd.q_minus), np.array(segd.q_plus)
    qm_0, qp_0 = np.array(seg0.q_minus), np.array(seg0.q_plus)
    t_lo = min(qm_0[2], qm_d[2]) - 1.0
    t_hi = segd.fringe_level + 1.0
    s_lo, s_hi = -1.0, max(qp_0[1], qp_d[1]) + 1.0
    W, H, pad = 520, 520, 40
    scale = (W - 2 * pad) / max(s_hi - s_lo, t_hi - t_lo)

    def P(s, t):
        return pad + (s - s_lo) * scale, H - pad - (t - t_lo) * scale

    body = []
    x1, y1 = P(0.0, t_lo)
    x2, y2 = P(0.0, t_hi)
    body.append(_line(x1, y1, x2, y2, "#444444", 1.5))
    body.append(_text(x1 + 4, y1 - 4, "minus fringe", "start"))
    k = int(np.floor(t_lo / SQRT2))
    while k * SQRT2 <= t_hi:
        x1, y1 = P(s_lo, k * SQRT2)
        x2, y2 = P(s_hi, k * SQRT2)
        chosen = k == segd.fringe_index
        body.append(_line(x1, y1, x2, y2, "#444444" if chosen else "#cccccc", 1.5 if chosen else 0.7))
        k += 1
    for (a, b), col, lab in (((qm_d, qp_d), "#d62728", f"delta={delta:g}"), ((qm_0, qp_0), "#1f77b4", "image of 0")):
        xa, ya = P(a[1], a[2])
        xb, yb = P(b[1], b[2])
        body.append(_line(xa, ya, xb, yb, col, 2.0))
        xm, ym = P((a[1] + b[1]) / 2, (a[2] + b[2]) / 2)
        body.append(f'<circle cx="{xm:.2f}" cy="{ym:.2f}" r="3" fill="{col}"/>')
        body.append(_text(xb + 4, yb - 4, lab, "start", col))
    body.append(_text(W / 2, H - 10, f"shared wall, n={n}: s horizontal, t vertical"))
    return _doc(W, H, body, f"shared wall crossing, delta={delta}, n={n}")
