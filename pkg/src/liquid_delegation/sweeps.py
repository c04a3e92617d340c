"""Randomised and exhaustive cross-checks of the solvers against the exhaustive oracles.

Shared by the test-suite, the ``sweep`` assets and ad-hoc runs; every sweep
returns a SweepReport instead of raising so that all findings are collected.
"""

import time
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from dagster import get_dagster_logger
from pydantic import BaseModel, ConfigDict

from liquid_delegation.errors import InvalidInputError, SizeGuardError
from liquid_delegation.game.digraph import DEFAULT_KERNEL_BOUND, build_digraph, enumerate_kernels
from liquid_delegation.game.distance import solve_equilibrium_db
from liquid_delegation.game.dynamics import TokenFunction, default_budget, random_delegation, run_dynamics
from liquid_delegation.game.gadgets import DEFAULT_SAT_BOUND, GADGET_KINDS, verify_reduction
from liquid_delegation.game.generators import (
    all_cnf_instances,
    random_cnf,
    random_db_instance,
    random_profile,
    random_sp_profile,
    random_symmetric_profile,
)
from liquid_delegation.game.oracle import solve_by_enumeration, stable_guru_sets
from liquid_delegation.game.profile import PreferenceProfile, is_nash_stable
from liquid_delegation.game.singlepeaked import (
    build_auxiliary,
    enumerate_paths,
    memb_sp,
    minabst_sp,
    mindis_sp,
    minmaxvp_sp,
    solve_equilibrium_sp,
)
from liquid_delegation.game.symmetric import solve_equilibrium_sym
from liquid_delegation.resources.solver_resource import SolverSettings

SWEEP_KINDS = ("sp-optimality", "existence", "brd", "kernel-oracle", "reductions")
SYMMETRIC_ROUND_BOUND = 3


class SweepReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    trials: int
    failures: int
    findings: Tuple[str, ...] = ()
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return self.failures == 0


class _Collector:
    def __init__(self, name: str):
        self.name = name
        self.trials = 0
        self.failures = 0
        self.findings: List[str] = []
        self.started = time.perf_counter()

    def fail(self, message: str) -> None:
        self.failures += 1
        self.findings.append(message)

    def note(self, message: str) -> None:
        self.findings.append(message)

    def report(self) -> SweepReport:
        report = SweepReport(
            name=self.name,
            trials=self.trials,
            failures=self.failures,
            findings=tuple(self.findings),
            elapsed=time.perf_counter() - self.started,
        )
        log = get_dagster_logger()
        log.info(f"Sweep {self.name}: {report.trials} trials, {report.failures} failures in {report.elapsed:.2f}s")
        for finding in report.findings[:20]:
            log.warning(f"{self.name}: {finding}")
        return report


def _sizes(rng: np.random.Generator, trials: int, max_voters: int) -> Iterable[int]:
    if max_voters < 1:
        raise InvalidInputError("max_voters must be at least 1")
    return (int(n) for n in rng.integers(1, max_voters + 1, size=trials))


def sweep_sp_optimality(
    trials: int = 300,
    max_voters: int = 10,
    seed: int = 0,
    kernel_bound: int = DEFAULT_KERNEL_BOUND,
) -> SweepReport:
    """SP optimisers equal the kernel-enumeration optimum; paths and kernels coincide; memb agrees."""
    rng = np.random.default_rng(seed)
    out = _Collector("sp-optimality")
    solvers: Sequence[Tuple[str, Callable]] = (("mindis", mindis_sp), ("minmaxvp", minmaxvp_sp), ("minabst", minabst_sp))
    for trial, n in enumerate(_sizes(rng, trials, max_voters)):
        out.trials += 1
        profile = random_sp_profile(n, rng)
        kernels = enumerate_kernels(build_digraph(profile), bound=kernel_bound).kernels
        if not profile.non_abstainers:
            continue

        paths = enumerate_paths(build_auxiliary(profile, weights=False))
        if list(paths) != list(kernels):
            out.fail(f"trial {trial}: paths {paths} differ from kernels {kernels}")

        for problem, solver in solvers:
            expected = solve_by_enumeration(profile, problem, bound=kernel_bound)
            got = solver(profile)
            if expected is None or got.value != expected.value:
                out.fail(f"trial {trial}: {problem} gave {got.value}, oracle {expected and expected.value}")

        for i in profile.voters():
            member = memb_sp(profile, i).member
            if member != any(i in k for k in kernels):
                out.fail(f"trial {trial}: memb({i}) = {member} disagrees with the kernels")
    return out.report()


def _random_instance(kind: str, n: int, rng: np.random.Generator):
    if kind == "sp":
        return random_sp_profile(n, rng), None
    if kind == "sym":
        return random_symmetric_profile(n, rng), None
    if kind == "db":
        instance = random_db_instance(n, rng)
        return instance.profile(), instance
    raise InvalidInputError(f"unknown instance kind {kind!r}; expected sp, sym or db")


def sweep_existence(kind: str, trials: int = 1000, max_voters: int = 50, seed: int = 0) -> SweepReport:
    """The class solver returns a Nash-stable delegation function on every generated instance."""
    rng = np.random.default_rng(seed)
    out = _Collector(f"existence-{kind}")
    for trial, n in enumerate(_sizes(rng, trials, max_voters)):
        out.trials += 1
        profile, instance = _random_instance(kind, n, rng)
        if kind == "sp":
            outcome = solve_equilibrium_sp(profile)
        elif kind == "sym":
            outcome = solve_equilibrium_sym(profile)
        else:
            outcome = solve_equilibrium_db(profile, instance.thresholds, instance.model)
        verdict = is_nash_stable(profile, outcome.delegation)
        if not verdict.stable:
            out.fail(f"trial {trial} (n={n}): voter {verdict.witness} prefers {verdict.better}")
    return out.report()


def sweep_brd(
    kind: str,
    trials: int = 500,
    max_voters: int = 12,
    seed: int = 0,
    budget: Optional[int] = None,
    round_offset: int = 2,
) -> SweepReport:
    """BRD from random states under random permutation tokens converges (within 3 rounds when symmetric).

    Without a fixed ``budget`` each run gets n·(n + round_offset) rounds.
    """
    if kind not in ("sym", "db"):
        raise InvalidInputError(f"BRD sweeps cover sym and db instances, not {kind!r}")
    rng = np.random.default_rng(seed)
    out = _Collector(f"brd-{kind}")
    for trial, n in enumerate(_sizes(rng, trials, max_voters)):
        out.trials += 1
        profile, _ = _random_instance(kind, n, rng)
        d0 = random_delegation(n, rng)
        sigma = tuple(int(v) for v in rng.permutation(np.arange(1, n + 1)))
        steps = default_budget(n, round_offset) if budget is None else budget
        trace = run_dynamics(profile, d0, TokenFunction.permutation(sigma), budget=steps)
        if trace.verdict != "converged":
            out.fail(f"trial {trial} (n={n}): {trace.verdict} from {d0.targets} with token {sigma}")
        elif kind == "sym" and trace.convergence_round > SYMMETRIC_ROUND_BOUND:
            out.fail(f"trial {trial} (n={n}): converged only in round {trace.convergence_round}")
    return out.report()


def sweep_kernel_oracle(
    trials: int = 500,
    max_voters: int = 5,
    seed: int = 0,
    kernel_bound: int = DEFAULT_KERNEL_BOUND,
) -> SweepReport:
    """Guru sets of all stable delegation functions are exactly the kernels."""
    rng = np.random.default_rng(seed)
    out = _Collector("kernel-oracle")
    makers = (random_profile, random_sp_profile, random_symmetric_profile, lambda n, r: random_db_instance(n, r).profile())
    for trial, n in enumerate(_sizes(rng, trials, max_voters)):
        profile: PreferenceProfile = makers[trial % len(makers)](n, rng)
        try:
            listing = enumerate_kernels(build_digraph(profile), bound=kernel_bound)
        except SizeGuardError as e:
            out.note(f"trial {trial} (n={n}): skipped ({e})")
            continue
        out.trials += 1
        kernels = {frozenset(k) for k in listing.kernels}
        stable = stable_guru_sets(profile)
        if kernels != stable:
            out.fail(f"trial {trial} (n={n}): kernels {sorted(map(sorted, kernels))} vs stable guru sets {sorted(map(sorted, stable))}")
    return out.report()


def sweep_reductions(
    kinds: Sequence[str] = GADGET_KINDS,
    max_variables: int = 3,
    max_clauses: int = 2,
    seed: int = 0,
    samples: Optional[int] = None,
    kernel_bound: int = DEFAULT_KERNEL_BOUND,
    sat_bound: int = DEFAULT_SAT_BOUND,
) -> SweepReport:
    """SAT side against gadget side on every small instance, or on ``samples`` random ones per size."""
    rng = np.random.default_rng(seed)
    out = _Collector("reductions")
    for kind in kinds:
        for n_u in range(1, max_variables + 1):
            for n_c in range(1, max_clauses + 1):
                if samples is None:
                    instances = all_cnf_instances(n_u, n_c)
                else:
                    instances = (random_cnf(n_u, n_c, rng) for _ in range(samples))
                for inst in instances:
                    try:
                        report = verify_reduction(inst, kind, kernel_bound=kernel_bound, sat_bound=sat_bound)
                    except SizeGuardError as e:
                        out.note(f"{kind} n_u={n_u} n_c={n_c}: skipped ({e})")
                        break
                    out.trials += 1
                    if not report.agree:
                        out.fail(f"{kind}: {inst.clauses} sat={report.satisfiable} gadget={report.gadget_side}")
    return out.report()


def run_sweep(
    kind: str,
    trials: int,
    max_voters: int,
    seed: int,
    variant: Optional[str] = None,
    settings: Optional[SolverSettings] = None,
) -> SweepReport:
    """Dispatch used by the sweep assets and the ``sweep`` command.

    ``variant`` picks sp/sym/db for existence and brd, or one gadget kind for
    reductions, where ``max_voters`` bounds the variable count and ``trials``
    the random instances per size. Size guards and the BRD budget come from
    ``settings``.
    """
    settings = settings or SolverSettings()
    bound = settings.kernel_vertex_bound
    if kind == "sp-optimality":
        return sweep_sp_optimality(trials=trials, max_voters=max_voters, seed=seed, kernel_bound=bound)
    if kind == "existence":
        return sweep_existence(variant or "sp", trials=trials, max_voters=max_voters, seed=seed)
    if kind == "brd":
        return sweep_brd(
            variant or "sym",
            trials=trials,
            max_voters=max_voters,
            seed=seed,
            round_offset=settings.budget_round_offset,
        )
    if kind == "kernel-oracle":
        return sweep_kernel_oracle(trials=trials, max_voters=max_voters, seed=seed, kernel_bound=bound)
    if kind == "reductions":
        kinds = (variant,) if variant else GADGET_KINDS
        return sweep_reductions(
            kinds=kinds,
            max_variables=max_voters,
            seed=seed,
            samples=trials,
            kernel_bound=bound,
            sat_bound=settings.sat_variable_bound,
        )
    raise InvalidInputError(f"unknown sweep kind {kind!r}; expected one of {', '.join(SWEEP_KINDS)}")
