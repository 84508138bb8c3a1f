"""Full run: admissibility, geometric data, divergence reports and diagrams into one directory.

Usage: python3 scripts/run_experiment.py [--out DIR] [--n-max N] [--delta 0.1,0.5,1]
Exit code is the worst of the individual steps.
"""
import argparse
import sys
import time

from virtual_boundary.cli import main as cli_main


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="out/experiment")
    p.add_argument("--n-max", default="64")
    p.add_argument("--delta", default="0.1,0.5,1")
    args = p.parse_args(argv)
    common = ["--out", args.out, "--delta", args.delta, "--n-max", args.n_max]
    worst = 0
    for step in (["admissible"], ["data"], ["verify", "--svg"], ["plot"], ["geodesic", "--eps", "0.5"]):
        t0 = time.time()
        code = cli_main(step + common)
        print(f"[{step[0]}] exit {code} in {time.time() - t0:.1f}s", flush=True)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
