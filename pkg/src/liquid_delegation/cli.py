#!/usr/bin/env python3
"""
Liquid Delegation Toolkit
=========================

Command-line surface over the delegation-game solvers: stability checks,
equilibrium search per preference class, iterative dynamics, instance
generators, kernel enumeration, hardness gadgets and DOT export.

Machine-readable results (JSON, profile text, trace text, DOT) go to stdout;
one-line summaries go to stderr.

Exit codes:
    0  success / stable / converged / reduction agrees
    1  negative answer (unstable, no equilibrium, not a member, cycle, disagreement)
    2  input error
    3  size guard or hardness refusal
    4  dynamics budget exhausted
"""

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from dagster import get_dagster_logger

from liquid_delegation.errors import DelegationError, InvalidInputError, SizeGuardError
from liquid_delegation.formats import (
    auxiliary_to_dot,
    digraph_to_dot,
    format_graph_model,
    format_points,
    format_profile,
    format_trace,
    parse_delegation,
    parse_graph_model,
    parse_move_script,
    parse_points,
    parse_profile,
)
from liquid_delegation.game.digraph import build_digraph, enumerate_kernels
from liquid_delegation.game.distance import DbInstance
from liquid_delegation.game.dynamics import MoveRule, TokenFunction, random_delegation, run_dynamics
from liquid_delegation.game.gadgets import GADGET_KINDS, build_gadget, parse_cnf, verify_reduction
from liquid_delegation.game.generators import random_db_instance, random_profile, random_sp_profile, random_symmetric_profile
from liquid_delegation.game.profile import DelegationFunction, is_nash_stable, resolve_gurus
from liquid_delegation.game.singlepeaked import build_auxiliary
from liquid_delegation.resources.solver_resource import SolverSettings
from liquid_delegation.resources.source_resource import InputSourceResource
from liquid_delegation.solving import CLASSES, solve_problem
from liquid_delegation.sweeps import SWEEP_KINDS, run_sweep

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_GUARD, EXIT_BUDGET = 0, 1, 2, 3, 4
GEN_KINDS = ("sp-random", "sym-random", "db-points", "random") + tuple(f"gadget:{kind}" for kind in GADGET_KINDS)


def _summary(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(text: str, output: Optional[str] = None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
        _summary(f"💾 Wrote {output}")
    else:
        sys.stdout.write(text)


def _emit_json(payload, output: Optional[str] = None) -> None:
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", output)


def _source(args: argparse.Namespace) -> InputSourceResource:
    return InputSourceResource(token=args.token)


def _settings(args: argparse.Namespace) -> SolverSettings:
    return SolverSettings.from_env(kernel_vertex_bound=args.kernel_bound, default_seed=args.seed)


def _load_model(source: InputSourceResource, location: Optional[str]) -> Optional[DbInstance]:
    if not location:
        return None
    text = source.read_text(location)
    return parse_points(text) if location.endswith(".points") else parse_graph_model(text)


def cmd_check(args: argparse.Namespace) -> int:
    source = _source(args)
    document = parse_profile(source.read_text(args.profile))
    d = parse_delegation(source.read_text(args.delegation), document.profile.n)
    verdict = is_nash_stable(document.profile, d)
    gurus = sorted(resolve_gurus(document.profile, d).gurus)
    _emit_json({"stable": verdict.stable, "witness": verdict.witness, "better": verdict.better, "gurus": gurus})
    if verdict.stable:
        _summary(f"✅ Nash-stable, gurus {gurus}")
        return EXIT_OK
    _summary(f"❌ Voter {verdict.witness} prefers {verdict.better}")
    return EXIT_NEGATIVE


def cmd_solve(args: argparse.Namespace) -> int:
    source = _source(args)
    document = parse_profile(source.read_text(args.profile))
    result = solve_problem(
        document.profile,
        args.problem,
        cls=args.profile_class,
        settings=_settings(args),
        instance=_load_model(source, args.model),
        partial=document.partial,
        assume_completion=args.assume_completion,
    )
    _emit(result.model_dump_json(indent=2) + "\n", args.output)
    if result.status == "solved":
        value = "" if result.value is None else f", value {result.value}"
        _summary(f"✅ {args.problem}: gurus {result.gurus}{value}")
        return EXIT_OK
    _summary(f"❌ {args.problem}: {result.status}")
    return EXIT_NEGATIVE


def _parse_token(spec: str, n: int, rng: np.random.Generator, repeat_from: Optional[int]) -> TokenFunction:
    if spec == "round-robin":
        return TokenFunction.round_robin(n)
    if spec == "random":
        return TokenFunction.permutation([int(v) for v in rng.permutation(np.arange(1, n + 1))])
    kind, _, body = spec.rpartition(":")
    try:
        sequence = [int(v) for v in body.split(",")]
    except ValueError as e:
        raise InvalidInputError(f"token must be round-robin, random, a permutation like 3,1,2 or scripted:<seq>; got {spec!r}") from e
    if kind == "scripted":
        return TokenFunction.scripted(sequence, repeat_from)
    if kind:
        raise InvalidInputError(f"unknown token kind {kind!r}")
    return TokenFunction.permutation(sequence)


def _start_state(source: InputSourceResource, spec: str, n: int, rng: np.random.Generator) -> DelegationFunction:
    if spec == "all-vote":
        return DelegationFunction.everyone_votes(n)
    if spec == "all-abstain":
        return DelegationFunction.everyone_abstains(n)
    if spec == "random":
        return random_delegation(n, rng)
    return parse_delegation(source.read_text(spec), n)


def cmd_dynamics(args: argparse.Namespace) -> int:
    source = _source(args)
    settings = _settings(args)
    profile = parse_profile(source.read_text(args.profile)).profile
    n = profile.n
    rng = np.random.default_rng(settings.default_seed)
    d0 = _start_state(source, args.start, n, rng)

    if args.rule == "brd":
        token = _parse_token(args.token_spec, n, rng, args.repeat_from)
        rule = MoveRule.best_response()
    else:
        if not args.script:
            raise InvalidInputError(f"--rule {args.rule} needs --script")
        movers, moves = parse_move_script(source.read_text(args.script))
        token = TokenFunction.scripted(movers, args.repeat_from)
        rule = MoveRule.improved_response(moves) if args.rule == "ird-script" else MoveRule.scripted_moves(moves)

    budget = args.budget if args.budget is not None else settings.brd_budget_steps(n, args.rounds)
    trace = run_dynamics(profile, d0, token, rule, budget=budget)
    _emit(format_trace(profile, trace), args.output)

    if trace.verdict == "converged":
        _summary(f"✅ Converged at step {trace.converged_at} (round {trace.convergence_round})")
        return EXIT_OK
    if trace.verdict == "cycle":
        _summary(f"🔁 Cycle entered at step {trace.cycle_entry} with period {trace.cycle_period}")
        return EXIT_NEGATIVE
    _summary(f"⏱️  Budget of {budget} steps exhausted")
    return EXIT_BUDGET


def cmd_gen(args: argparse.Namespace) -> int:
    source = _source(args)
    rng = np.random.default_rng(_settings(args).default_seed)
    kind = args.kind

    if kind.startswith("gadget:"):
        if not args.cnf:
            raise InvalidInputError(f"{kind} needs --cnf")
        gadget = build_gadget(parse_cnf(source.read_text(args.cnf)), kind.split(":", 1)[1])
        _emit(format_profile(gadget.profile, tags=("db",) if gadget.db else (), roles=gadget.role_labels()), args.output)
        if gadget.db is not None:
            if not args.model_out:
                raise InvalidInputError(f"{kind} produces a distance model; pass --model-out")
            _emit(format_graph_model(gadget.db), args.model_out)
        _summary(f"🧩 {gadget.kind} gadget with {gadget.n} voters")
        return EXIT_OK

    if args.n is None and not args.points:
        raise InvalidInputError(f"{kind} needs --n")
    if kind == "sp-random":
        profile, tags = random_sp_profile(args.n, rng), ("sp",)
    elif kind == "sym-random":
        profile, tags = random_symmetric_profile(args.n, rng), ("sym",)
    elif kind == "random":
        profile, tags = random_profile(args.n, rng), ()
    elif kind == "db-points":
        instance = parse_points(source.read_text(args.points)) if args.points else random_db_instance(
            args.n, rng, dimension=args.dimension, threshold_scale=args.threshold_scale
        )
        if not args.model_out:
            raise InvalidInputError("db-points produces a distance model; pass --model-out")
        profile, tags = instance.profile(), ("db",)
        _emit(format_points(instance), args.model_out)
    else:
        raise InvalidInputError(f"unknown kind {kind!r}; expected one of {', '.join(GEN_KINDS)}")

    _emit(format_profile(profile, tags=tags), args.output)
    _summary(f"🎲 Generated {kind} profile with {profile.n} voters")
    return EXIT_OK


def cmd_enumerate(args: argparse.Namespace) -> int:
    profile = parse_profile(_source(args).read_text(args.profile)).profile
    listing = enumerate_kernels(build_digraph(profile), limit=args.limit, bound=_settings(args).kernel_vertex_bound)
    _emit_json({"kernels": [list(k) for k in listing.kernels], "truncated": listing.truncated})
    _summary(f"🔎 {len(listing.kernels)} kernels{' (truncated)' if listing.truncated else ''}")
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    settings = _settings(args)
    inst = parse_cnf(_source(args).read_text(args.cnf))
    report = verify_reduction(inst, args.kind, kernel_bound=settings.kernel_vertex_bound, sat_bound=settings.sat_variable_bound)
    payload = report.model_dump(mode="json")
    payload["agree"] = report.agree
    _emit_json(payload)
    if report.agree:
        _summary(f"✅ {args.kind} gadget ({report.voters} voters) agrees: satisfiable={report.satisfiable}")
        return EXIT_OK
    _summary(f"❌ {args.kind} gadget disagrees: satisfiable={report.satisfiable}, gadget side {report.gadget_side}")
    return EXIT_NEGATIVE


def cmd_export(args: argparse.Namespace) -> int:
    profile = parse_profile(_source(args).read_text(args.profile)).profile
    if args.what == "digraph":
        text = digraph_to_dot(build_digraph(profile))
    else:
        text = auxiliary_to_dot(build_auxiliary(profile, weights=not args.no_weights))
    _emit(text, args.output)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    settings = _settings(args)
    report = run_sweep(args.kind, args.trials, args.max_voters, settings.default_seed, variant=args.variant, settings=settings)
    _emit(report.model_dump_json(indent=2) + "\n")
    if report.ok:
        _summary(f"✅ {report.name}: {report.trials} trials in {report.elapsed:.1f}s")
        return EXIT_OK
    _summary(f"❌ {report.name}: {report.failures} failures out of {report.trials} trials")
    return EXIT_NEGATIVE


def _optional_int(raw: Optional[str]) -> Optional[int]:
    return int(raw) if raw not in (None, "") else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liquid-delegation",
        description="Equilibria and dynamics of delegation games in liquid democracy",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    liquid-delegation check data/line.profile data/line_equilibrium.delegation
    liquid-delegation solve data/line.profile --class sp --problem mindis
    liquid-delegation dynamics data/ird_cycle.profile --rule ird-script --script data/ird_cycle.script --repeat-from 1
    liquid-delegation gen --kind gadget:memb --cnf data/running.cnf --model-out memb.graph
    liquid-delegation enumerate data/line.profile

Partial profiles ("i: voter acc: 2 > 4") are completed with the acceptable
gurus first, then voting/abstaining per the flag, then the other voters by
distance |j - i|. mindis on partial input needs --assume-completion.

Environment Variables:
    DELEGATION_KERNEL_BOUND   largest vertex count for exhaustive kernel search (default 22)
    DELEGATION_SEED           default seed for generators and random tokens (default 0)
    DELEGATION_SOURCE_TOKEN   bearer token for http(s) inputs
        """,
    )
    parser.add_argument(
        "--kernel-bound",
        type=int,
        default=_optional_int(os.getenv("DELEGATION_KERNEL_BOUND")),
        help="Vertex bound for exhaustive search (or set DELEGATION_KERNEL_BOUND)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=_optional_int(os.getenv("DELEGATION_SEED")),
        help="Random seed (or set DELEGATION_SEED)",
    )
    parser.add_argument(
        "--token",
        default=os.getenv("DELEGATION_SOURCE_TOKEN"),
        help="Bearer token for http(s) inputs (or set DELEGATION_SOURCE_TOKEN)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="Is a delegation function Nash-stable?")
    check.add_argument("profile")
    check.add_argument("delegation")
    check.set_defaults(handler=cmd_check)

    solve = commands.add_parser("solve", help="Solve eq, memb:<i>, mindis, minmaxvp or minabst")
    solve.add_argument("profile")
    solve.add_argument("--class", dest="profile_class", choices=CLASSES, default="auto")
    solve.add_argument("--problem", default="eq", help="eq | memb:<i> | mindis | minmaxvp | minabst (default: eq)")
    solve.add_argument("--model", default=None, help="Distance model sidecar (.points file or graph edge list)")
    solve.add_argument("--assume-completion", action="store_true", help="Allow mindis on partial profiles")
    solve.add_argument("--output", default=None)
    solve.set_defaults(handler=cmd_solve)

    dynamics = commands.add_parser("dynamics", help="Run best-response or scripted improved-response dynamics")
    dynamics.add_argument("profile")
    dynamics.add_argument("--rule", choices=("brd", "ird-script", "move-script"), default="brd")
    dynamics.add_argument(
        "--token-spec",
        default="round-robin",
        help="round-robin | random | permutation like 3,1,2 | scripted:1,2,1 (default: round-robin)",
    )
    dynamics.add_argument("--script", default=None, help="Move script 't,mover,move' for the scripted rules")
    dynamics.add_argument("--repeat-from", type=int, default=None, help="0-based start of the periodic part of a scripted token")
    dynamics.add_argument("--start", default="all-vote", help="all-vote | all-abstain | random | delegation file")
    dynamics.add_argument("--budget", type=int, default=None, help="Step budget (default: n·(n+2) rounds)")
    dynamics.add_argument("--rounds", type=int, default=None, help="Budget in rounds of n steps")
    dynamics.add_argument("--output", default=None)
    dynamics.set_defaults(handler=cmd_dynamics)

    gen = commands.add_parser("gen", help="Generate a profile")
    gen.add_argument("--kind", required=True, choices=GEN_KINDS)
    gen.add_argument("--n", type=int, default=None)
    gen.add_argument("--cnf", default=None, help="DIMACS CNF for gadget kinds")
    gen.add_argument("--points", default=None, help="Points file to turn into a db profile")
    gen.add_argument("--dimension", type=int, default=2)
    gen.add_argument("--threshold-scale", type=float, default=0.5)
    gen.add_argument("--model-out", default=None, help="Where to write the distance model of db kinds")
    gen.add_argument("--output", default=None)
    gen.set_defaults(handler=cmd_gen)

    enumerate_ = commands.add_parser("enumerate", help="List every kernel of the acceptability digraph")
    enumerate_.add_argument("profile")
    enumerate_.add_argument("--limit", type=int, default=None)
    enumerate_.set_defaults(handler=cmd_enumerate)

    reduce = commands.add_parser("reduce", help="Check a hardness gadget against brute-force 3-SAT")
    reduce.add_argument("cnf")
    reduce.add_argument("--kind", choices=GADGET_KINDS, default="guc")
    reduce.set_defaults(handler=cmd_reduce)

    export = commands.add_parser("export", help="DOT export of the acceptability or auxiliary digraph")
    export.add_argument("profile")
    export.add_argument("--what", choices=("digraph", "aux"), default="digraph")
    export.add_argument("--no-weights", action="store_true", help="Skip arc weights of the auxiliary digraph")
    export.add_argument("--output", default=None)
    export.set_defaults(handler=cmd_export)

    sweep = commands.add_parser("sweep", help="Cross-check solvers against the exhaustive oracles")
    sweep.add_argument("--kind", required=True, choices=SWEEP_KINDS)
    sweep.add_argument("--variant", default=None, help="sp/sym/db for existence and brd, a gadget kind for reductions")
    sweep.add_argument("--trials", type=int, default=100)
    sweep.add_argument("--max-voters", type=int, default=8)
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    log = get_dagster_logger()
    try:
        args = build_parser().parse_args(argv)
    except ValueError as e:
        log.error(f"Invalid environment default: {e}")
        return EXIT_INPUT
    try:
        return args.handler(args)
    except SizeGuardError as e:
        log.error(str(e))
        _summary(f"🛑 {e}")
        return EXIT_GUARD
    except (DelegationError, ValueError) as e:
        log.error(str(e))
        _summary(f"❌ {e}")
        return EXIT_INPUT


def main() -> None:
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        print("\n⏹️  Interrupted by user", file=sys.stderr)
        sys.exit(EXIT_INPUT)


if __name__ == "__main__":
    main()
