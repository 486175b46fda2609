"""Command-line interface: ``tropical-moduli <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .complexes import cellular_complex, parse_selector
from .enumeration import CapacityError, DomainError, enumerate_all, max_edges, StratumKey
from .genus_one import cell_action_character, induced_character
from .graphs import dumps
from .linalg import BudgetError, betti
from .transfer import verify_transfer_identity
from .verify import SUITES, run_suite


def cmd_betti(args) -> int:
    sel = parse_selector(args.selector)
    try:
        table = betti(cellular_complex(args.g, args.n, sel))
    except (CapacityError, BudgetError) as exc:
        print(f"skipped: {exc}")
        return 2
    vector = table.vector(0, 3 * args.g - 4 + args.n)
    flag = "empty" if table.empty else ("acyclic" if table.acyclic else "nonzero")
    print(f"Delta_{{{args.g},{args.n}}} [{sel.name}] reduced Betti: {vector}  ({flag})")
    if not table.certified:
        print("warning: ranks are modular lower bounds only (not certified)")
    if args.json:
        payload = {
            "g": args.g,
            "n": args.n,
            "selector": sel.name,
            "betti": list(vector),
            "status": flag,
            "certified": table.certified,
        }
        with open(args.json, "w") as fh:
            json.dump(payload, fh, indent=1)
    return 0


def cmd_verify(args) -> int:
    failed = 0
    for report in run_suite(args.suite, long=args.long):
        print(report.line(), flush=True)
        if not report.ok:
            failed += 1
            print(f"    reproduce with: {json.dumps(report.params)}")
    print(f"{args.suite}: {'all targets matched' if not failed else f'{failed} mismatches'}")
    return 1 if failed else 0


def cmd_enumerate(args) -> int:
    strata = enumerate_all(args.g, args.n)
    if args.edges is not None:
        key = StratumKey(args.g, args.n, args.edges)
        key.check()
        chosen = [strata[key]]
    else:
        chosen = [strata[StratumKey(args.g, args.n, e)] for e in range(1, max_edges(args.g, args.n) + 1)]
    for stratum in chosen:
        for G in stratum.graphs:
            print(dumps(G))
    return 0


def cmd_transfer(args) -> int:
    report = verify_transfer_identity(args.g)
    print(f"t is a chain map:      {report.t_chain_map}")
    print(f"pi is a chain map:     {report.pi_chain_map}")
    print(f"pi t = {2 * args.g - 2} id:          {report.identity_holds}")
    print(f"Betti unmarked/marked: {report.betti_unmarked} / {report.betti_marked}")
    for line in report.failures:
        print("  " + line)
    return 0 if report.ok else 1


def cmd_character(args) -> int:
    induced = induced_character(args.n)
    cells = cell_action_character(args.n)
    if args.json:
        print(cells.to_json())
    else:
        print("partition  character")
        print(cells.table())
        print(f"agrees with induced character: {induced.values == cells.values}")
    return 0 if induced.values == cells.values else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tropical-moduli", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("betti", help="reduced rational Betti numbers")
    p.add_argument("g", type=int)
    p.add_argument("n", type=int)
    p.add_argument("--selector", default="full", help="full, w, lw, rep, br; combine with | and &")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--long", action="store_true", help="include the slow rows")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("enumerate", help="dump isomorphism classes as JSON lines")
    p.add_argument("g", type=int)
    p.add_argument("n", type=int)
    p.add_argument("edges", type=int, nargs="?")
    p.add_argument("--format", choices=["jsonl"], default="jsonl")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("transfer-check", help="check the transfer identities")
    p.add_argument("g", type=int)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("character", help="genus-one top homology character")
    p.add_argument("n", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_character)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
