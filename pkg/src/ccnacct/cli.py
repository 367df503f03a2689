"""Command-line entry point: ``ccnacct <command> ...``.

Every command writes CSV to stdout or to files and is a pure function of
its arguments. Configuration errors exit with status 2 after printing a
single line ``error<TAB><kind><TAB><message>`` to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import random
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .analytic import Scheme, message_counts, overhead_series
from .core import Name
from .crsd import collision_probability, collision_probability_exact
from .errors import CcnError, ConfigError
from .keys import KeyRegistry
from .sim.engine import run_seeds
from .sim.metrics import summarize
from .sim.scenario import Scenario, load_topology
from .sim.topology import build_fibs, hop_distances

EXIT_CONFIG = 2


def int_range(text: str) -> list[int]:
    """``5``, ``1..10``, ``1..100:10`` (step) or comma-separated mixes."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        step = 1
        if ":" in part:
            part, step_text = part.split(":", 1)
            step = int(step_text)
            if step < 1:
                raise argparse.ArgumentTypeError(f"step must be positive in {text!r}")
        if ".." in part:
            lo_text, hi_text = part.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1, step))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"no values in {text!r}")
    return out


def _range_arg(text: str) -> list[int]:
    try:
        return int_range(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


# -- commands --------------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = Scenario.from_file(args.scenario)
    if args.seed is not None:
        scenario.seeds = [args.seed]
    if args.out is not None:
        scenario.output = str(Path(args.out).resolve())
    scenario.check()
    topo = scenario.load_topology()
    keys = scenario.load_keys()
    out_dir = scenario.output_dir()
    reports = run_seeds(topo, scenario.traffic, scenario.seeds, scenario.adversary, keys, args.workers)
    for report in reports:
        _write_atomic(out_dir / f"report_seed{report.seed}.csv", report.to_csv())
    rows = [(m, _fmt(mean), lo, hi) for m, mean, lo, hi in summarize(reports)]
    _write_atomic(out_dir / "summary.csv", _csv(rows, ("metric", "mean", "min", "max")))
    for report in reports:
        ok = "ok" if report.conservation_holds() else "VIOLATED"
        print(f"seed {report.seed}: {report.summary['consumer_interests']} interests, conservation {ok}")
    print(f"wrote {len(reports)} report(s) to {out_dir}")
    return 0


def cmd_analytic_counts(args: argparse.Namespace) -> int:
    schemes = list(Scheme) if args.scheme == "all" else [Scheme(args.scheme.upper())]
    rows = []
    for scheme in schemes:
        for g in args.gamma:
            c = message_counts(scheme, g)
            rows.append((scheme.value, g, c.p_l, c.p_r) if len(schemes) > 1 else (g, c.p_l, c.p_r))
    header = ("scheme", "gamma", "p_l", "p_r") if len(schemes) > 1 else ("gamma", "p_l", "p_r")
    sys.stdout.write(_csv(rows, header))
    return 0


def cmd_analytic_overhead(args: argparse.Namespace) -> int:
    rows = [(n, i, p, _fmt(r)) for n, i, p, r in overhead_series(args.links, args.payloads, args.name_bytes)]
    sys.stdout.write(_csv(rows, ("links", "link_index", "payload", "ratio")))
    return 0


def cmd_collision(args: argparse.Namespace) -> int:
    if args.exact and args.bits > 64:
        raise ConfigError("exact mode supports at most 64 bits")
    rows = []
    for s in args.s:
        if s < 1:
            raise ConfigError("s must be at least 1")
        if args.exact:
            p = collision_probability_exact(args.bits, s)
            rows.append((args.bits, s, _fmt(float(p)), f"{p.numerator}/{p.denominator}"))
        else:
            rows.append((args.bits, s, _fmt(collision_probability(args.bits, s))))
    header = ("bits", "s", "probability") + (("fraction",) if args.exact else ())
    sys.stdout.write(_csv(rows, header))
    return 0


def cmd_topo_check(args: argparse.Namespace) -> int:
    topo = load_topology(args.topology)
    fibs = build_fibs(topo)
    dist = hop_distances(topo, topo.producers)
    depth = max(dist[c] for c in topo.consumers) if topo.consumers else 0
    print(f"topology {topo.label or args.topology}: ok")
    print(f"routers={len(topo.routers)} consumers={len(topo.consumers)} "
          f"producers={len(topo.producers)} links={len(topo.links)} max_consumer_hops={depth}")
    if args.fib:
        for node in sorted(fibs, key=lambda n: (dist.get(n, 0), n)):
            for entry in fibs[node]:
                print(f"fib {node} {entry.prefix.uri()} {' '.join(entry.next_hops)}")
    return 0


def cmd_keys_generate(args: argparse.Namespace) -> int:
    prefixes = [Name.parse(p) for p in args.prefix]
    consumers = [c for arg in args.consumers for c in arg.split(",") if c]
    reg = KeyRegistry.generate(prefixes, consumers, random.Random(args.seed), args.style)
    text = reg.to_text()
    if args.out:
        _write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ccnacct", description="Accounting for cached CCN content: "
                                "simulation, analytic model and collision tables.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario file, one CSV per seed")
    s.add_argument("scenario", help="scenario file (key = value lines)")
    s.add_argument("--seed", type=int, help="run only this seed, overriding the scenario")
    s.add_argument("--out", help="output directory (default: scenario 'output' key)")
    s.add_argument("--workers", type=int, default=1, help="parallel processes for seed repetitions")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analytic", help="closed-form message counts and overhead ratios")
    asub = a.add_subparsers(dest="what", required=True)
    c = asub.add_parser("counts", help="(p_l, p_r) per gamma")
    c.add_argument("--scheme", default="all", choices=["all"] + [x.value for x in Scheme] +
                   [x.value.lower() for x in Scheme])
    c.add_argument("--gamma", type=_range_arg, default=[1, 10, 100], help="e.g. 1..3 or 1,10,100")
    c.set_defaults(func=cmd_analytic_counts)
    o = asub.add_parser("overhead", help="per-link pInt/content byte ratio")
    o.add_argument("--links", type=_range_arg, default=[2, 3, 4])
    o.add_argument("--payloads", type=_range_arg, default=[10, 100, 1000, 10_000, 100_000, 1_000_000])
    o.add_argument("--name-bytes", type=int, default=40)
    o.set_defaults(func=cmd_analytic_overhead)

    k = sub.add_parser("collision", help="nonce collision probability table")
    k.add_argument("--bits", type=int, required=True, help="nonce size N in bits")
    k.add_argument("--s", type=_range_arg, required=True, help="numbers of nonces, e.g. 1..100")
    k.add_argument("--exact", action="store_true", help="exact rational arithmetic (N <= 64)")
    k.set_defaults(func=cmd_collision)

    t = sub.add_parser("topo", help="topology utilities")
    tsub = t.add_subparsers(dest="what", required=True)
    tc = tsub.add_parser("check", help="validate a topology file and print a summary")
    tc.add_argument("topology", help="topology file or builtin:<name>")
    tc.add_argument("--fib", action="store_true", help="also print every FIB entry")
    tc.set_defaults(func=cmd_topo_check)

    ks = sub.add_parser("keys", help="key file utilities")
    ksub = ks.add_subparsers(dest="what", required=True)
    kg = ksub.add_parser("generate", help="write a key file for producers and consumers")
    kg.add_argument("--prefix", action="append", required=True, help="producer prefix (repeatable)")
    kg.add_argument("--consumers", action="append", default=[], help="comma-separated consumer ids")
    kg.add_argument("--style", choices=["mac", "sign"], default="mac")
    kg.add_argument("--seed", type=int, default=0)
    kg.add_argument("--out", help="output file (default stdout)")
    kg.set_defaults(func=cmd_keys_generate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CcnError as exc:
        msg = str(exc).replace("\t", " ").replace("\n", " ")
        print(f"error\t{type(exc).__name__}\t{msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
