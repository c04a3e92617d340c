"""Exhaustive oracles for the NP-hard cells and for cross-checking the polynomial solvers."""

import itertools
from typing import FrozenSet, Optional, Set, Tuple

from liquid_delegation.errors import InvalidInputError, SizeGuardError
from liquid_delegation.game.digraph import DEFAULT_KERNEL_BOUND, build_digraph, enumerate_kernels
from liquid_delegation.game.profile import (
    DelegationFunction,
    PreferenceProfile,
    SolverOutcome,
    is_nash_stable,
    outcome_for,
    resolve_gurus,
)

PROBLEMS = ("eq", "memb", "mindis", "minmaxvp", "minabst")
DELEGATION_ORACLE_BOUND = 6


def parse_problem(problem: str) -> Tuple[str, Optional[int]]:
    """``memb:3`` -> ("memb", 3); the other problems carry no voter."""
    name, _, arg = problem.partition(":")
    if name not in PROBLEMS:
        raise InvalidInputError(f"unknown problem {problem!r}; expected eq, memb:<i>, mindis, minmaxvp or minabst")
    if name == "memb":
        try:
            return name, int(arg)
        except ValueError as e:
            raise InvalidInputError(f"memb needs a voter, e.g. memb:3 (got {problem!r})") from e
    if arg:
        raise InvalidInputError(f"problem {name} takes no argument")
    return name, None


def solve_by_enumeration(
    profile: PreferenceProfile,
    problem: str,
    bound: int = DEFAULT_KERNEL_BOUND,
) -> Optional[SolverOutcome]:
    """Best kernel for ``problem``; ties go to the lexicographically smallest kernel.

    Returns None when no equilibrium qualifies (no kernel at all, or none containing the memb voter).
    """
    name, voter = parse_problem(problem)
    if voter is not None:
        profile.check_voter(voter)
    listing = enumerate_kernels(build_digraph(profile), bound=bound)

    if name == "eq":
        kernels = listing.kernels
    elif name == "memb":
        kernels = tuple(k for k in listing.kernels if voter in k)
    else:
        scored = [(outcome_for(profile, k, name, degenerate=not k), k) for k in listing.kernels]
        if not scored:
            return None
        degenerate = [o for o, _ in scored if o.value is None]
        if degenerate:
            return degenerate[0]
        return min(scored, key=lambda item: (item[0].value, item[1]))[0]

    if not kernels:
        return None
    return outcome_for(profile, kernels[0], problem, degenerate=not kernels[0])


def stable_guru_sets(profile: PreferenceProfile, bound: int = DELEGATION_ORACLE_BOUND) -> Set[FrozenSet[int]]:
    """Guru sets of every Nash-stable delegation function, by trying all (n + 1)^n of them."""
    n = profile.n
    if n > bound:
        raise SizeGuardError("delegation-function enumeration refused", size=n, bound=bound)
    found = set()
    for targets in itertools.product(range(n + 1), repeat=n):
        d = DelegationFunction(targets=targets)
        if is_nash_stable(profile, d).stable:
            found.add(resolve_gurus(profile, d).gurus)
    return found
