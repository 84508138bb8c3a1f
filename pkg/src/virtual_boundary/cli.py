"""Command-line entry point: ``virtual-boundary <subcommand> [flags]``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 already; keep the message terse
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    p.add_argument("--delta", help="comma-separated list of positive thickenings")
    p.add_argument("--n-max", type=int, dest="n_max")
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv", "both"])
    p.add_argument("--svg", action="store_true", default=None)
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="virtual-boundary", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("verify", "divergence reports over the requested thickenings"),
        ("admissible", "admissibility checks on the example graph of groups"),
        ("data", "geometric data comparison between thickness 0 and delta"),
        ("plot", "write SVG diagrams"),
    ):
        _common(sub.add_parser(name, help=help_))
    g = sub.add_parser("geodesic", help="one shortest-path query on a period chain")
    _common(g)
    g.add_argument("--eps", type=float, default=0.0)
    g.add_argument("--side", choices=["-", "+"], default="-")
    g.add_argument("--periods", type=int, default=1)
    g.add_argument("--tail", action="store_true", help="continue through the shared cylinder")
    return parser


def _config(args) -> RunConfig:
    keys = ("delta", "n_max", "tol", "out", "format", "svg", "seed")
    return load_config(args.config, **{k: getattr(args, k, None) for k in keys})


def _write(out: Path, name: str, doc: dict) -> Path:
    from .counterexample import _round_json, atomic_write

    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    atomic_write(path, json.dumps(_round_json(doc), indent=2) + "\n")
    return path


def cmd_verify(cfg: RunConfig) -> int:
    from .counterexample import run_report
    from .fixtures import pinned_periods

    code, files, reports = run_report(cfg.delta, cfg.n_max, cfg.tol, cfg.formats, cfg.out, cfg.svg,
                                      pinned=pinned_periods())
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        print(f"delta={rep.delta:g}  gap={rep.period_delta - rep.period_0:.12g}  bound={rep.bound:.12g}  {status}")
        for w in rep.witnesses:
            print(f"  witness: {w}")
    for f in files:
        print(f"wrote {f}")
    return code


def cmd_admissible(cfg: RunConfig) -> int:
    from .group_model import build_example_graph, check_admissible

    rep = check_admissible(build_example_graph(), 3)
    for name, c in rep.conditions.items():
        print(f"condition ({name}): {'PASS' if c.passed else 'FAIL'}")
        for w in c.witnesses:
            print(f"  {w}")
    print(f"wrote {_write(Path(cfg.out), 'admissibility.json', rep.to_json())}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_data(cfg: RunConfig) -> int:
    from fractions import Fraction

    from .geometric_data import compare_data

    ok, docs = True, []
    for d in cfg.delta:
        cmp_ = compare_data(Fraction(repr(d)), seed=cfg.seed)
        print(f"delta={d:g}")
        print(cmp_.table())
        ok &= cmp_.passed
        docs.append(cmp_.to_json())
    print(f"wrote {_write(Path(cfg.out), 'geometric_data.json', {'comparisons': docs})}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_geodesic(cfg: RunConfig, args) -> int:
    from .geodesic_engine import _f, period_chain, shortest_path

    if args.periods < 0:
        raise ConfigError("periods must be nonnegative")
    if args.eps < 0:
        raise ConfigError("eps must be nonnegative")
    ch = period_chain(args.eps, args.side, args.periods, tail=args.tail)
    end = tuple(_f(ch.pieces[-1].entry.base)) if args.tail else ch.pieces[-1].marked_in
    res = shortest_path(ch, ch.pieces[0].marked_out, end, cfg.tol)
    doc = {
        "eps": args.eps,
        "side": args.side,
        "periods": args.periods,
        "tail": args.tail,
        "pieces": [p.tag for p in ch.pieces],
        "length": res.length,
        "certified_gap": res.certified_gap,
        "breakpoints": res.path.breakpoints.tolist(),
    }
    print(json.dumps({k: doc[k] for k in ("eps", "side", "periods", "length", "certified_gap")}))
    print(f"wrote {_write(Path(cfg.out), 'geodesic.json', doc)}")
    return EXIT_OK


def cmd_plot(cfg: RunConfig) -> int:
    from .counterexample import atomic_write
    from .svg import chain_svg, wall_svg

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for d in cfg.delta:
        for name, text in ((f"period_chain_{d:g}.svg", chain_svg(d)), (f"shared_wall_{d:g}.svg", wall_svg(d, cfg.n_max))):
            atomic_write(out / name, text)
            print(f"wrote {out / name}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "admissible":
            return cmd_admissible(cfg)
        if args.command == "data":
            return cmd_data(cfg)
        if args.command == "geodesic":
            return cmd_geodesic(cfg, args)
        return cmd_plot(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
