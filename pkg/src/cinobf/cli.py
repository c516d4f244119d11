"""Command line interface.

Subcommands: ``validate``, ``obfuscate``, ``attack`` and ``experiment``.
Exit codes: 0 success, 2 validation error, 3 restoration non-convergence
(only with ``--strict``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .attacks import STRATEGIES, AttackConfig, run_experiment
from .errors import CinError
from .io import load_network, save_network
from .network import PrivacyParams, diameter
from .pipeline import CONVEX, EXACT_SP, PipelineConfig, release, resolve_alpha_loc, run_pipeline
from .report import emit_report

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3


def _privacy_args(p):
    p.add_argument("--epsilon", type=float, default=1.0)
    loc = p.add_mutually_exclusive_group()
    loc.add_argument("--alpha-loc", type=float, default=1.0, help="location radius in hops")
    loc.add_argument("--alpha-loc-pct", type=float, help="location radius as a percentage of the diameter")
    p.add_argument("--alpha-val", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restore", choices=(CONVEX, EXACT_SP), default=CONVEX)
    p.add_argument("--strict", action="store_true", help="exit 3 if any restoration fails to converge")


def _attack_args(p):
    p.add_argument("--budget", type=float, action="append", help="attack budget in percent (repeatable)")
    p.add_argument("--strategy", choices=STRATEGIES, action="append", help="attack strategy (repeatable)")
    p.add_argument("--runs", type=int, default=50)


def build_parser():
    parser = argparse.ArgumentParser(prog="cinobf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a network file")
    p.add_argument("network")

    p = sub.add_parser("obfuscate", help="release one obfuscated network")
    p.add_argument("network")
    _privacy_args(p)
    p.add_argument("--out", required=True, help="path of the released network file")

    p = sub.add_parser("attack", help="attack a true network guided by a released one")
    p.add_argument("network")
    p.add_argument("released")
    p.add_argument("--seed", type=int, default=0)
    _attack_args(p)
    p.add_argument("--out", help="report directory")

    p = sub.add_parser("experiment", help="repeated release + attack simulation")
    p.add_argument("network")
    _privacy_args(p)
    _attack_args(p)
    p.add_argument("--out", required=True, help="report directory")
    return parser


def _params(args):
    return PrivacyParams(args.epsilon, args.alpha_loc, args.alpha_val, args.beta, args.seed)


def _validate(args):
    G, inst = load_network(args.network)
    print(json.dumps({"valid": True, "nodes": G.n_nodes, "edges": G.n_edges,
                      "elements": G.n_elements, "kind": G.kind, "diameter": diameter(G)}))
    return EXIT_OK


def _obfuscate(args):
    G, inst = load_network(args.network)
    params = _params(args)
    alpha_loc = resolve_alpha_loc(G, params, args.alpha_loc_pct)
    rel = release(G, inst, params, np.random.default_rng(params.seed), args.restore, alpha_loc)
    save_network(rel.released, inst.rebind(rel.released), args.out)
    res = rel.restoration
    print(json.dumps({"out": args.out, "converged": res.converged, "gap": res.gap,
                      "phase2_feasible": rel.phase2_feasible}))
    return EXIT_NONCONVERGED if args.strict and not res.converged else EXIT_OK


def _attack(args):
    G, inst = load_network(args.network)
    released, _ = load_network(args.released)
    budgets = args.budget or [10.0]
    strategies = tuple(args.strategy or STRATEGIES)
    report = run_experiment(G, released, inst, AttackConfig(strategies[0], budgets[0], args.seed),
                            args.runs, budgets=budgets, strategies=strategies)
    if args.out:
        emit_report(report, args.out)
    print(json.dumps(report.to_dict()["aggregates"]["damage"], sort_keys=True))
    return EXIT_OK


def _experiment(args):
    config = PipelineConfig(
        input_path=args.network,
        privacy=_params(args),
        budgets=tuple(args.budget or (10.0, 20.0, 30.0)),
        strategies=tuple(args.strategy or STRATEGIES),
        runs=args.runs,
        out_dir=args.out,
        restore=args.restore,
        alpha_loc_pct=args.alpha_loc_pct,
    )
    report = run_pipeline(config)
    agg = report.aggregates()
    print(json.dumps({"out": args.out, "runs": report.runs, "convergence_rate": agg["convergence_rate"],
                      "feasibility_rate": agg["feasibility_rate"]}))
    if args.strict and report.runs and agg["convergence_rate"] < 1.0:
        return EXIT_NONCONVERGED
    return EXIT_OK


COMMANDS = {"validate": _validate, "obfuscate": _obfuscate, "attack": _attack, "experiment": _experiment}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except CinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
