"""Operator command line: simulate, bound, attack, sweep, sum, dump.

Every command is deterministic given its arguments and seed, and JSON
artifacts are serialized with sorted keys so reruns are bitwise
identical.  Exit codes: 0 success (a protocol abort is a reported
outcome, not a failure), 2 invalid configuration or violated
precondition, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict

from . import costs
from .accountant import (
    DomainError,
    PreconditionViolated,
    PrivacyBound,
    TooManyCorruptions,
    attack_no_strong_amp,
    attack_not_do,
    eps_clones,
    eps_sampling,
    weak_amp,
    weak_amp_corrupted,
)
from .ikos import Infeasible, NotSquare, dp_sum, summation_report
from .scenario import ScenarioError, load_scenario
from .seeds import make_rng
from .shuffler import enumerate_distribution, tvd_to_uniform
from .sim import ConfigError, run_protocol

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

_CONFIG_ERRORS = (
    ScenarioError,
    ConfigError,
    DomainError,
    PreconditionViolated,
    TooManyCorruptions,
    Infeasible,
    NotSquare,
    ValueError,
)


def _dump_json(obj, stream) -> None:
    stream.write(json.dumps(obj, sort_keys=True, indent=2))
    stream.write("\n")


def _write_json(obj, path: str | None) -> None:
    if path is None:
        _dump_json(obj, sys.stdout)
        return
    with open(path, "w", encoding="utf-8") as fh:
        _dump_json(obj, fh)


# -- simulate -----------------------------------------------------------


def _run_dict(seed: int, result) -> dict:
    doc = {
        "seed": seed,
        "status": result.status,
        "outputs": result.outputs,
        "rounds": result.rounds,
        "pk": result.pk,
        "dropped": result.dropped,
        "missing_inputs": result.missing_inputs,
        "padded": result.padded,
        "bytes_sent": result.bytes_sent,
        "bytes_received": result.bytes_received,
        "discarded_bytes": result.discarded_bytes,
        "exps": result.exps,
        "events": result.events,
    }
    return doc


def cmd_simulate(args) -> int:
    scn = load_scenario(args.scenario)
    runs = []
    transcript_lines = []
    for seed in scn.seeds:
        result = run_protocol(scn.config, scn.adversary, scn.dropouts,
                              seed=seed)
        runs.append(_run_dict(seed, result))
        for msg in result.transcript:
            transcript_lines.append(
                json.dumps({"seed": seed, **asdict(msg)}, sort_keys=True)
            )
    doc = {"runs": runs}
    _write_json(doc, args.out or scn.outputs.get("result"))
    transcript_path = args.transcript or scn.outputs.get("transcript")
    if transcript_path:
        with open(transcript_path, "w", encoding="utf-8") as fh:
            for line in transcript_lines:
                fh.write(line)
                fh.write("\n")
    return EXIT_OK


# -- bounds -------------------------------------------------------------


def cmd_bounds(args) -> int:
    kind = args.kind
    if kind == "sampling":
        eps = eps_sampling(args.eps0, args.gamma)
        doc = {
            "kind": kind,
            "params": {"eps0": args.eps0, "gamma": args.gamma},
            "bound": PrivacyBound(eps, 0.0, "subsampled randomizer").as_dict(),
            "audit": {"formula": "log1p(gamma * expm1(eps0))"},
        }
    elif kind == "clones":
        eps = eps_clones(args.eps0, args.delta, args.n)
        doc = {
            "kind": kind,
            "params": {"eps0": args.eps0, "delta": args.delta, "n": args.n},
            "bound": PrivacyBound(eps, args.delta, "shuffled randomizer").as_dict(),
            "audit": {"formula": "uniform-shuffling amplification"},
        }
    elif kind in ("weak_amp", "weak_amp_corrupted"):
        if kind == "weak_amp":
            bound, chain = weak_amp(
                args.eps0, args.delta, args.delta_prime, args.h, args.w
            )
            params = {"eps0": args.eps0, "delta": args.delta,
                      "delta_prime": args.delta_prime,
                      "h": args.h, "w": args.w}
        else:
            bound, chain = weak_amp_corrupted(
                args.eps0, args.delta, args.delta_w, args.delta_h,
                args.delta_prime, args.h, args.w, args.gamma,
            )
            params = {"eps0": args.eps0, "delta": args.delta,
                      "delta_w": args.delta_w, "delta_h": args.delta_h,
                      "delta_prime": args.delta_prime,
                      "h": args.h, "w": args.w, "gamma": args.gamma}
        doc = {
            "kind": kind,
            "params": params,
            "bound": bound.as_dict(),
            "audit": chain.as_dict(),
        }
    elif kind in ("ikos", "ikos_corrupted"):
        gamma = args.gamma if kind == "ikos_corrupted" else 0.0
        report = summation_report(args.n, args.m, args.q, gamma)
        doc = {
            "kind": kind,
            "params": {"n": args.n, "m": args.m, "q": args.q, "gamma": gamma},
            "report": report,
        }
    else:  # pragma: no cover - argparse restricts choices
        raise DomainError(f"unknown bound kind {kind!r}")
    _write_json(doc, args.out)
    return EXIT_OK


# -- attacks ------------------------------------------------------------


def cmd_attack(args) -> int:
    if args.kind == "not_do":
        rng = make_rng(args.seed, "attack/not_do")
        rate = attack_not_do(args.n, args.trials, rng,
                             mechanism=args.mechanism)
        stderr = math.sqrt(rate * (1.0 - rate) / args.trials)
        doc = {
            "kind": args.kind,
            "mechanism": args.mechanism,
            "n": args.n,
            "trials": args.trials,
            "seed": args.seed,
            "success_rate": rate,
            "stderr": stderr,
            "reference_rate": (args.n - 1) / (args.n + 1),
        }
    elif args.kind == "no_strong_amp":
        rng = make_rng(args.seed, "attack/no_strong_amp")
        p0, p1 = attack_no_strong_amp(args.k, args.eps0, args.trials, rng)
        doc = {
            "kind": args.kind,
            "k": args.k,
            "eps0": args.eps0,
            "trials": args.trials,
            "seed": args.seed,
            "p_event_world0": p0,
            "p_event_world1": p1,
            "gap": p0 - p1,
        }
    else:  # pragma: no cover - argparse restricts choices
        raise DomainError(f"unknown attack kind {args.kind!r}")
    _write_json(doc, args.out)
    return EXIT_OK


# -- costs --------------------------------------------------------------


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise DomainError(f"{what} must be comma-separated integers, got {text!r}")
    if not values:
        raise DomainError(f"{what} must name at least one value")
    return values


def cmd_costs(args) -> int:
    sizes = _parse_int_list(args.sizes, "--sizes")
    protocols = tuple(p for p in args.protocols.split(",") if p)
    rows = costs.sweep_rows(
        sizes,
        protocols=protocols,
        gamma=args.gamma,
        alpha=args.alpha,
        sigma_target=args.sigma_target,
        eta_target=args.eta_target,
        objective=args.objective,
    )

    def write_rows(stream) -> None:
        writer = csv.DictWriter(stream, fieldnames=list(costs.CSV_COLUMNS),
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_rows(fh)
    else:
        write_rows(sys.stdout)
    return EXIT_OK


# -- secure summation ---------------------------------------------------


def cmd_ikos(args) -> int:
    rng = make_rng(args.seed, "ikos/inputs")
    reals = [rng.random() for _ in range(args.n)]
    result, stats = dp_sum(reals, args.eps, args.delta, args.m, args.seed)
    doc = {
        "kind": "dp_sum",
        "seed": args.seed,
        "result": result,
        "stats": stats,
    }
    _write_json(doc, args.out)
    return EXIT_OK


# -- exact distribution dumps ------------------------------------------


def cmd_oracle(args) -> int:
    n = args.h * args.w
    if n > 9:
        raise DomainError(
            f"exact enumeration needs h*w <= 9, got {args.h}x{args.w}"
        )
    dist = enumerate_distribution(n, args.h, args.w, args.ell)
    tvd = tvd_to_uniform(dist, n)
    doc = {
        "kind": "grid_distribution",
        "n": n,
        "h": args.h,
        "w": args.w,
        "ell": args.ell,
        "support_size": len(dist),
        "tvd_to_uniform": {
            "exact": f"{tvd.numerator}/{tvd.denominator}",
            "float": float(tvd),
        },
        "distribution": {
            ",".join(map(str, perm)): f"{p.numerator}/{p.denominator}"
            for perm, p in sorted(dist.items())
        },
    }
    _write_json(doc, args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="altshuffle",
        description="Shuffling protocol simulator, bounds, and cost sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario file")
    p.add_argument("scenario", help="path to a scenario JSON file")
    p.add_argument("--out", help="write the result JSON here (default stdout)")
    p.add_argument("--transcript", help="write the message transcript JSONL here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="evaluate one privacy or security bound")
    p.add_argument("kind", choices=["sampling", "clones", "weak_amp",
                                    "weak_amp_corrupted", "ikos",
                                    "ikos_corrupted"])
    p.add_argument("--eps0", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1e-8)
    p.add_argument("--delta-prime", type=float, default=1e-8)
    p.add_argument("--delta-w", type=float, default=1e-8)
    p.add_argument("--delta-h", type=float, default=1e-8)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--h", type=int, default=100)
    p.add_argument("--w", type=int, default=100)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--q", type=int, default=2**20)
    p.add_argument("--out", help="write JSON here (default stdout)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("attack", help="run a distinguishing attack")
    p.add_argument("kind", choices=["not_do", "no_strong_amp"])
    p.add_argument("--n", type=int, default=4, help="clients (not_do)")
    p.add_argument("--k", type=int, default=4, help="grid side (no_strong_amp)")
    p.add_argument("--eps0", type=float, default=math.log(1000.0))
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mechanism", choices=["grid", "uniform"], default="grid")
    p.add_argument("--out", help="write JSON here (default stdout)")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("costs", help="parameter sweep as CSV")
    p.add_argument("--sizes", default="1000,10000,100000,1000000",
                   help="comma-separated population sizes")
    p.add_argument("--protocols", default="amortized,alternating")
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--sigma-target", type=float, default=40.0)
    p.add_argument("--eta-target", type=float, default=10.0)
    p.add_argument("--objective", choices=list(costs.OBJECTIVES),
                   default="avg")
    p.add_argument("--out", help="write CSV here (default stdout)")
    p.set_defaults(func=cmd_costs)

    p = sub.add_parser("ikos", help="differentially private sum demo")
    p.add_argument("--n", type=int, default=400,
                   help="client count (must be a square)")
    p.add_argument("--m", type=int, default=3, help="shares per client")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write JSON here (default stdout)")
    p.set_defaults(func=cmd_ikos)

    p = sub.add_parser("oracle", help="exact grid-shuffle distribution dump")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--out", help="write JSON here (default stdout)")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
