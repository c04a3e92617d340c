"""Iterative delegation dynamics: token functions, best and improved responses, cycle detection.

At step t the token holder T(t) may change her own delegation; every other
voter keeps hers. A run stops when a full round of token turns passes with no
change (converged), when a (state, token phase) pair repeats (cycle), or when
the step budget runs out.
"""

import itertools
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from dagster import get_dagster_logger
from pydantic import BaseModel, ConfigDict, model_validator

from liquid_delegation.errors import InvalidInputError, ScriptInconsistencyError, SizeGuardError, SolverInvariantError
from liquid_delegation.game.distance import ThresholdVector, check_threshold_consistency
from liquid_delegation.game.profile import (
    ABSTAIN,
    DelegationFunction,
    PreferenceProfile,
    is_nash_stable,
    resolve_targets,
)

Verdict = Literal["converged", "cycle", "budget-exhausted"]


def default_budget(n: int, round_offset: int = 2) -> int:
    """n·(n + offset) rounds of n steps each."""
    return n * n * (n + round_offset)


class TokenFunction(BaseModel):
    """Who holds the token at each step t = 1, 2, ...

    A permutation token repeats ``sequence`` forever. A scripted token plays
    ``sequence`` once, or, with ``repeat_from`` set, loops over
    ``sequence[repeat_from:]`` after the first pass.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["permutation", "round-robin", "scripted"]
    sequence: Tuple[int, ...]
    repeat_from: Optional[int] = None

    @model_validator(mode="after")
    def _check_shape(self) -> "TokenFunction":
        if not self.sequence:
            raise ValueError("a token function needs at least one step")
        if self.kind != "scripted":
            if sorted(self.sequence) != list(range(1, len(self.sequence) + 1)):
                raise ValueError("a permutation token must order the voters 1..n exactly once")
            if self.repeat_from not in (None, 0):
                raise ValueError("permutation tokens repeat from the start")
        elif self.repeat_from is not None and not 0 <= self.repeat_from < len(self.sequence):
            raise ValueError(f"repeat_from must lie in 0..{len(self.sequence) - 1}")
        return self

    @classmethod
    def permutation(cls, sigma: Sequence[int]) -> "TokenFunction":
        return cls(kind="permutation", sequence=tuple(sigma))

    @classmethod
    def round_robin(cls, n: int) -> "TokenFunction":
        return cls(kind="round-robin", sequence=tuple(range(1, n + 1)))

    @classmethod
    def scripted(cls, sequence: Sequence[int], repeat_from: Optional[int] = None) -> "TokenFunction":
        return cls(kind="scripted", sequence=tuple(sequence), repeat_from=repeat_from)

    @property
    def start_of_period(self) -> Optional[int]:
        if self.kind != "scripted":
            return 0
        return self.repeat_from

    @property
    def periodic(self) -> bool:
        return self.start_of_period is not None

    @property
    def period(self) -> Optional[int]:
        start = self.start_of_period
        return None if start is None else len(self.sequence) - start

    def validate_for(self, n: int) -> "TokenFunction":
        if self.kind != "scripted" and len(self.sequence) != n:
            raise InvalidInputError(f"permutation token covers {len(self.sequence)} voters, profile has {n}")
        bad = [v for v in self.sequence if not 1 <= v <= n]
        if bad:
            raise InvalidInputError(f"token names unknown voters {sorted(set(bad))}")
        return self

    def index(self, t: int) -> Optional[int]:
        """Position in ``sequence`` used at step t, or None once a finite script is exhausted."""
        k = t - 1
        if k < len(self.sequence):
            return k
        start = self.start_of_period
        if start is None:
            return None
        return start + (k - start) % self.period

    def at(self, t: int) -> Optional[int]:
        k = self.index(t)
        return None if k is None else self.sequence[k]

    def phase_after(self, t: int) -> Optional[int]:
        """Phase of the token used at step t + 1, once inside the periodic part."""
        start = self.start_of_period
        if start is None or t < start:
            return None
        return (t - start) % self.period


class MoveRule(BaseModel):
    """best-response computes moves; the other kinds replay ``moves[t - 1]`` at step t.

    Improved-response replays are validated: a changed delegation must strictly
    improve the mover's outcome, and keeping it is only allowed when no
    improvement exists. Scripted moves are only range-checked.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["best-response", "improved-response", "scripted-moves"] = "best-response"
    moves: Tuple[int, ...] = ()

    @classmethod
    def best_response(cls) -> "MoveRule":
        return cls()

    @classmethod
    def improved_response(cls, moves: Sequence[int]) -> "MoveRule":
        return cls(kind="improved-response", moves=tuple(moves))

    @classmethod
    def scripted_moves(cls, moves: Sequence[int]) -> "MoveRule":
        return cls(kind="scripted-moves", moves=tuple(moves))


class BestResponse(BaseModel):
    model_config = ConfigDict(frozen=True)

    move: int
    outcome: int


class DynamicsTrace(BaseModel):
    """``states[t]`` is d_t; ``movers[t - 1]`` and ``moves[t - 1]`` describe step t."""

    model_config = ConfigDict(frozen=True)

    states: Tuple[DelegationFunction, ...]
    movers: Tuple[int, ...]
    moves: Tuple[int, ...]
    verdict: Verdict
    converged_at: Optional[int] = None
    cycle_entry: Optional[int] = None
    cycle_period: Optional[int] = None
    round_ends: Tuple[int, ...] = ()
    convergence_round: Optional[int] = None

    @property
    def steps(self) -> int:
        return len(self.movers)

    @property
    def final(self) -> DelegationFunction:
        return self.states[-1]


class ConvergenceReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    trials: int
    converged: int
    cycles: int
    exhausted: int
    max_rounds: int
    max_steps: int
    findings: Tuple[str, ...] = ()

    @property
    def all_converged(self) -> bool:
        return self.converged == self.trials


class CycleWitness(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma: Tuple[int, ...]
    start: DelegationFunction
    trace: DynamicsTrace


def outcome_of(d: DelegationFunction, i: int) -> int:
    return resolve_targets(d.targets)[i]


def best_response(profile: PreferenceProfile, d: DelegationFunction, voter: int) -> BestResponse:
    """Best achievable outcome of ``voter`` with everyone else's delegation fixed.

    Achievable: voting, abstaining, and the guru of any other voter once the
    mover's own delegation is cut. Keeps the current delegation when it already
    yields the best outcome, otherwise delegates straight to the chosen guru.
    """
    voter = profile.check_voter(voter)
    d.validate_for(profile)
    cut = list(d.targets)
    cut[voter - 1] = ABSTAIN
    gu = resolve_targets(cut)
    reachable = {g for j, g in enumerate(gu) if j not in (ABSTAIN, voter) and g != ABSTAIN}
    best = profile.best_of(voter, reachable | {voter, ABSTAIN})
    if outcome_of(d, voter) == best:
        return BestResponse(move=d.of(voter), outcome=best)
    return BestResponse(move=best, outcome=best)


def is_improving_move(profile: PreferenceProfile, d: DelegationFunction, voter: int, move: int) -> bool:
    """Valid improved-response step: strict improvement if changed, no improvement available if kept."""
    before = outcome_of(d, voter)
    if move == d.of(voter):
        best = best_response(profile, d, voter).outcome
        return not profile.prefers(voter, best, before)
    after = outcome_of(d.with_move(voter, move), voter)
    return profile.prefers(voter, after, before)


def rounds(movers: Sequence[int], n: int) -> Tuple[int, ...]:
    """End steps r_1 < r_2 < ... of the complete rounds; in each round every voter holds the token."""
    ends = []
    pending = set(range(1, n + 1))
    for t, mover in enumerate(movers, start=1):
        pending.discard(mover)
        if not pending:
            ends.append(t)
            pending = set(range(1, n + 1))
    return tuple(ends)


def convergence_round(round_ends: Sequence[int], converged_at: int) -> Optional[int]:
    return next((k for k, end in enumerate(round_ends, start=1) if end >= converged_at), None)


def _next_move(profile: PreferenceProfile, d: DelegationFunction, voter: int, rule: MoveRule, t: int) -> Optional[int]:
    n = profile.n
    if rule.kind == "best-response":
        move = best_response(profile, d, voter).move
        if not is_improving_move(profile, d, voter, move):
            raise SolverInvariantError(f"best response of voter {voter} at step {t} is not an improved response")
        return move

    if t > len(rule.moves):
        return None
    move = rule.moves[t - 1]
    if not 0 <= move <= n:
        raise ScriptInconsistencyError(f"move {move} of voter {voter} is outside 0..{n}", step=t)
    if rule.kind == "improved-response" and not is_improving_move(profile, d, voter, move):
        raise ScriptInconsistencyError(f"move {voter}->{move} is not an improved response", step=t)
    return move


def run_dynamics(
    profile: PreferenceProfile,
    d0: DelegationFunction,
    token: TokenFunction,
    rule: MoveRule = MoveRule(),
    budget: Optional[int] = None,
) -> DynamicsTrace:
    n = profile.n
    d0.validate_for(profile)
    token.validate_for(n)
    budget = default_budget(n) if budget is None else budget
    if budget < 0:
        raise InvalidInputError("budget must be non-negative")

    states = [d0]
    movers: List[int] = []
    moves: List[int] = []
    seen: Dict[Tuple[Tuple[int, ...], int], int] = {}
    start_phase = token.phase_after(0)
    if start_phase is not None:
        seen[(d0.targets, start_phase)] = 0

    last_change = 0
    exhausted = False
    idle = set()
    verdict: Optional[Verdict] = None
    cycle_entry = cycle_period = None
    d = d0

    for t in itertools.count(1):
        voter = token.at(t)
        if voter is None:
            break
        if t > budget:
            exhausted = True
            break
        move = _next_move(profile, d, voter, rule, t)
        if move is None:
            break

        nxt = d.with_move(voter, move)
        movers.append(voter)
        moves.append(move)
        states.append(nxt)
        if nxt != d:
            last_change = t
            idle = set()
        else:
            idle.add(voter)
        d = nxt

        if len(idle) == n and (rule.kind != "scripted-moves" or is_nash_stable(profile, d).stable):
            verdict = "converged"
            break

        phase = token.phase_after(t)
        if phase is None:
            continue
        key = (d.targets, phase)
        if key in seen:
            if last_change <= seen[key]:
                verdict = "converged"
            else:
                verdict = "cycle"
                cycle_entry, cycle_period = seen[key], t - seen[key]
            break
        seen[key] = t

    if verdict is None:
        # a finite script ran out: accept its last state only if nobody wants to deviate
        if not exhausted and is_nash_stable(profile, d).stable:
            verdict = "converged"
        else:
            verdict = "budget-exhausted"

    ends = rounds(movers, n)
    converged_at = last_change if verdict == "converged" else None
    trace = DynamicsTrace(
        states=tuple(states),
        movers=tuple(movers),
        moves=tuple(moves),
        verdict=verdict,
        converged_at=converged_at,
        cycle_entry=cycle_entry,
        cycle_period=cycle_period,
        round_ends=ends,
        convergence_round=convergence_round(ends, converged_at) if converged_at is not None else None,
    )
    get_dagster_logger().debug(f"Dynamics on {n} voters: {verdict} after {trace.steps} steps")
    return trace


def random_delegation(n: int, rng: np.random.Generator) -> DelegationFunction:
    return DelegationFunction(targets=tuple(int(x) for x in rng.integers(0, n + 1, size=n)))


def verify_brd_convergence(
    profile: PreferenceProfile,
    trials: int = 100,
    budget: Optional[int] = None,
    seed: int = 0,
) -> ConvergenceReport:
    """BRD from random starting states under random permutation tokens."""
    n = profile.n
    rng = np.random.default_rng(seed)
    counts = {"converged": 0, "cycle": 0, "budget-exhausted": 0}
    max_rounds = max_steps = 0
    findings = []
    for trial in range(trials):
        d0 = random_delegation(n, rng)
        sigma = tuple(int(v) for v in rng.permutation(np.arange(1, n + 1)))
        trace = run_dynamics(profile, d0, TokenFunction.permutation(sigma), budget=budget)
        counts[trace.verdict] += 1
        if trace.verdict == "converged":
            max_rounds = max(max_rounds, trace.convergence_round or 0)
            max_steps = max(max_steps, trace.converged_at)
            if not is_nash_stable(profile, trace.final).stable:
                raise SolverInvariantError(f"trial {trial}: BRD converged to an unstable state")
        else:
            findings.append(f"trial {trial}: {trace.verdict} from d0={d0.targets} with token {sigma}")

    for finding in findings:
        get_dagster_logger().warning(finding)
    return ConvergenceReport(
        trials=trials,
        converged=counts["converged"],
        cycles=counts["cycle"],
        exhausted=counts["budget-exhausted"],
        max_rounds=max_rounds,
        max_steps=max_steps,
        findings=tuple(findings),
    )


def verify_brd_convergence_db(
    profile: PreferenceProfile,
    thresholds: ThresholdVector,
    trials: int = 100,
    budget: Optional[int] = None,
    seed: int = 0,
) -> ConvergenceReport:
    report = check_threshold_consistency(profile, thresholds)
    if not report.consistent:
        raise InvalidInputError(f"profile does not match the thresholds at {report.witness}")
    return verify_brd_convergence(profile, trials=trials, budget=budget, seed=seed)


def search_permutation_cycle(
    profile: PreferenceProfile,
    starts: Optional[Iterable[DelegationFunction]] = None,
    budget: Optional[int] = None,
    max_voters: int = 6,
) -> Optional[CycleWitness]:
    """First BRD cycle over all permutation tokens and the given starting states (all of them by default)."""
    n = profile.n
    if n > max_voters:
        raise SizeGuardError("permutation cycle search refused", size=n, bound=max_voters)
    if starts is None:
        starts = (DelegationFunction(targets=targets) for targets in itertools.product(range(n + 1), repeat=n))
    candidates = list(starts)
    for sigma in itertools.permutations(range(1, n + 1)):
        token = TokenFunction.permutation(sigma)
        for d0 in candidates:
            trace = run_dynamics(profile, d0, token, budget=budget)
            if trace.verdict == "cycle":
                get_dagster_logger().info(f"BRD cycle from {d0.targets} with token {sigma}")
                return CycleWitness(sigma=sigma, start=d0, trace=trace)
    return None
