"""Regenerate src/virtual_boundary/data/fixtures.json from the grid oracle.

Usage: python3 scripts/pin_fixtures.py
"""
import json
import time
from pathlib import Path

from virtual_boundary.fixtures import FIXTURE_VERSION
from virtual_boundary.geodesic_engine import period_chain
from virtual_boundary.oracles import grid_chain_length

EPS = (0.0, 0.1, 0.5, 1.0)
TARGET = Path(__file__).resolve().parents[1] / "src" / "virtual_boundary" / "data" / "fixtures.json"


def main() -> None:
    periods = {}
    for eps in EPS:
        t0 = time.time()
        ch = period_chain(eps, "-", 1)
        res = grid_chain_length(ch, ch.pieces[0].marked_out, ch.pieces[-1].marked_in)
        periods[f"{eps:.12g}"] = {"period": round(res.length, 12), "oracle": "grid dp 1e-3 / 1e-5 / 1e-7"}
        print(f"eps={eps:g}  period={res.length:.12f}  ({time.time() - t0:.1f}s)")
    doc = {"version": FIXTURE_VERSION, "periods": periods}
    TARGET.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {TARGET}")


if __name__ == "__main__":
    main()
