"""Voters, preference profiles, delegation functions and the three social measures.

Voters are numbered 1..n. Outcome 0 stands for abstention; every voter ranks
the n+1 outcomes 0..n strictly, her own index meaning "vote directly".
"""

from collections import Counter
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from liquid_delegation.errors import InvalidInputError

ABSTAIN = 0

_UNKNOWN = -1
_ON_PATH = -2


class PreferenceProfile:
    """Immutable strict preference orders of n voters over the outcomes 0..n.

    Row i of ``rank_matrix`` holds the 1-based position of every outcome in
    voter i's order (row 0 is padding). ``acceptability_matrix[i, j]`` is true
    iff j is in Acc(i), i.e. j is ranked above both i and 0.
    """

    __slots__ = ("_table", "_rank", "_acc", "_abstainers")

    def __init__(self, orders: Sequence[Sequence[int]]):
        n = len(orders)
        if n == 0:
            raise InvalidInputError("a profile needs at least one voter")
        try:
            table = np.array(orders, dtype=np.int64)
        except (TypeError, ValueError) as e:
            raise InvalidInputError(f"preference orders must be integer rows of equal length: {e}") from e
        if table.shape != (n, n + 1):
            raise InvalidInputError(f"every order must rank the {n + 1} outcomes 0..{n}")

        outcomes = np.arange(n + 1)
        broken = np.flatnonzero((np.sort(table, axis=1) != outcomes).any(axis=1))
        if broken.size:
            raise InvalidInputError(f"order of voter {broken[0] + 1} is not a permutation of 0..{n}")

        rank = np.zeros((n + 1, n + 1), dtype=np.int64)
        rank[np.arange(1, n + 1)[:, None], table] = outcomes + 1

        inner = rank[1:, 1:]
        own = np.diagonal(inner)
        zero = rank[1:, 0]
        acc = np.zeros((n + 1, n + 1), dtype=bool)
        acc[1:, 1:] = (inner < own[:, None]) & (inner < zero[:, None])

        for array in (table, rank, acc):
            array.setflags(write=False)
        self._table = table
        self._rank = rank
        self._acc = acc
        self._abstainers = frozenset((np.flatnonzero(zero < own) + 1).tolist())

    @property
    def n(self) -> int:
        return self._table.shape[0]

    @property
    def rank_matrix(self) -> np.ndarray:
        return self._rank

    @property
    def acceptability_matrix(self) -> np.ndarray:
        return self._acc

    @property
    def abstainers(self) -> FrozenSet[int]:
        return self._abstainers

    @property
    def non_abstainers(self) -> Tuple[int, ...]:
        return tuple(i for i in range(1, self.n + 1) if i not in self._abstainers)

    def voters(self) -> range:
        return range(1, self.n + 1)

    def check_voter(self, i: int) -> int:
        """Return i if it names a voter of this profile, raise otherwise."""
        if not isinstance(i, (int, np.integer)) or not 1 <= i <= self.n:
            raise InvalidInputError(f"{i!r} is not a voter of a {self.n}-voter profile")
        return int(i)

    def order(self, i: int) -> Tuple[int, ...]:
        return tuple(int(o) for o in self._table[self.check_voter(i) - 1])

    def orders(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(int(o) for o in row) for row in self._table)

    def rank(self, i: int, outcome: int) -> int:
        return int(self._rank[i, outcome])

    def prefers(self, i: int, a: int, b: int) -> bool:
        """True iff a is strictly preferred to b by voter i."""
        return self._rank[i, a] < self._rank[i, b]

    def best_of(self, i: int, options: Iterable[int]) -> int:
        choices = list(options)
        if not choices:
            raise InvalidInputError("best_of needs at least one option")
        return min(choices, key=lambda o: self._rank[i, o])

    def is_abstainer(self, i: int) -> bool:
        return i in self._abstainers

    def accepts(self, i: int, j: int) -> bool:
        return bool(self._acc[i, j])

    def acceptable(self, i: int) -> Tuple[int, ...]:
        """Acc(i) in voter i's preference order."""
        row = self._table[self.check_voter(i) - 1]
        return tuple(int(o) for o in row if o != 0 and self._acc[i, o])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PreferenceProfile):
            return NotImplemented
        return self._table.shape == other._table.shape and bool(np.array_equal(self._table, other._table))

    def __hash__(self) -> int:
        return hash((self._table.shape, self._table.tobytes()))

    def __repr__(self) -> str:
        return f"PreferenceProfile(n={self.n}, abstainers={sorted(self._abstainers)})"


class DelegationFunction(BaseModel):
    """A game state: ``targets[i - 1]`` is d(i); i votes, 0 abstains, j delegates."""

    model_config = ConfigDict(frozen=True)

    targets: Tuple[int, ...]

    @field_validator("targets")
    @classmethod
    def _targets_in_range(cls, targets: Tuple[int, ...]) -> Tuple[int, ...]:
        n = len(targets)
        if n == 0:
            raise ValueError("a delegation function needs at least one voter")
        for i, target in enumerate(targets, start=1):
            if not 0 <= target <= n:
                raise ValueError(f"d({i}) = {target} is outside 0..{n}")
        return targets

    @property
    def n(self) -> int:
        return len(self.targets)

    def of(self, i: int) -> int:
        return self.targets[i - 1]

    def with_move(self, i: int, target: int) -> "DelegationFunction":
        targets = list(self.targets)
        targets[i - 1] = target
        return DelegationFunction(targets=tuple(targets))

    def as_mapping(self) -> Dict[int, int]:
        return {i: target for i, target in enumerate(self.targets, start=1)}

    def validate_for(self, profile: PreferenceProfile) -> "DelegationFunction":
        if self.n != profile.n:
            raise InvalidInputError(f"delegation function covers {self.n} voters, profile has {profile.n}")
        return self

    @classmethod
    def everyone_votes(cls, n: int) -> "DelegationFunction":
        return cls(targets=tuple(range(1, n + 1)))

    @classmethod
    def everyone_abstains(cls, n: int) -> "DelegationFunction":
        return cls(targets=(ABSTAIN,) * n)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int], n: int) -> "DelegationFunction":
        missing = [i for i in range(1, n + 1) if i not in mapping]
        if missing:
            raise InvalidInputError(f"delegation function is undefined for voters {missing}")
        extra = sorted(set(mapping) - set(range(1, n + 1)))
        if extra:
            raise InvalidInputError(f"delegation function names unknown voters {extra}")
        return cls(targets=tuple(mapping[i] for i in range(1, n + 1)))


class GuruAssignment(BaseModel):
    """gu(i, d) for every voter, plus the set of voters who vote directly."""

    model_config = ConfigDict(frozen=True)

    gu: Tuple[int, ...]
    gurus: FrozenSet[int]

    def guru_of(self, i: int) -> int:
        return self.gu[i - 1]

    def voting_power(self, guru: int) -> int:
        return sum(1 for g in self.gu if g == guru)

    def abstention_count(self) -> int:
        return sum(1 for g in self.gu if g == ABSTAIN)


class StabilityVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    stable: bool
    witness: Optional[int] = None
    better: Optional[int] = None


class Measures(BaseModel):
    """The three objectives evaluated on one delegation function."""

    model_config = ConfigDict(frozen=True)

    dissatisfaction: int
    max_voting_power: Optional[int]
    abstentions: int


class SolverOutcome(BaseModel):
    """A delegation function produced by a solver, with its guru set and objective value."""

    model_config = ConfigDict(frozen=True)

    problem: str
    delegation: DelegationFunction
    gurus: Tuple[int, ...]
    value: Optional[int] = None
    degenerate: bool = False


def resolve_targets(targets: Sequence[int]) -> List[int]:
    """Guru of every voter for a raw target sequence; index 0 of the result is padding.

    Paths that reach 0 or enter a circuit resolve to 0 for every voter on them.
    Each voter is visited once.
    """
    n = len(targets)
    gu = [_UNKNOWN] * (n + 1)
    gu[ABSTAIN] = ABSTAIN
    for start in range(1, n + 1):
        if gu[start] != _UNKNOWN:
            continue
        path = []
        v = start
        while gu[v] == _UNKNOWN:
            nxt = targets[v - 1]
            if nxt == v:
                gu[v] = v
                break
            gu[v] = _ON_PATH
            path.append(v)
            v = nxt
        result = ABSTAIN if gu[v] == _ON_PATH else gu[v]
        for u in path:
            gu[u] = result
    return gu


def resolve_gurus(profile: PreferenceProfile, d: DelegationFunction) -> GuruAssignment:
    d.validate_for(profile)
    gu = resolve_targets(d.targets)
    gurus = frozenset(i for i, target in enumerate(d.targets, start=1) if target == i)
    return GuruAssignment(gu=tuple(gu[1:]), gurus=gurus)


def is_nash_stable(profile: PreferenceProfile, d: DelegationFunction) -> StabilityVerdict:
    """Check that every voter's guru beats all current gurus, voting and abstaining.

    On failure the least-index violating voter is reported together with her
    most preferred available outcome.
    """
    assignment = resolve_gurus(profile, d)
    n = profile.n
    rank = profile.rank_matrix
    voters = np.arange(1, n + 1)

    current = rank[voters, np.asarray(assignment.gu)]
    options = np.array(sorted(assignment.gurus) + [ABSTAIN])
    candidates = rank[1:, options]
    pick = candidates.argmin(axis=1)
    option_rank = candidates[np.arange(n), pick]
    own = rank[voters, voters]
    best = np.where(own < option_rank, voters, options[pick])
    best_rank = np.minimum(own, option_rank)

    violators = np.flatnonzero(best_rank < current)
    if violators.size == 0:
        return StabilityVerdict(stable=True)
    i = int(violators[0])
    return StabilityVerdict(stable=False, witness=i + 1, better=int(best[i]))


def _checked_kernel(profile: PreferenceProfile, kernel: Iterable[int]) -> List[int]:
    members = sorted({profile.check_voter(k) for k in kernel})
    abstaining = [k for k in members if profile.is_abstainer(k)]
    if abstaining:
        raise InvalidInputError(f"abstainers {abstaining} can never be gurus")
    return members


def kernel_to_delegation(profile: PreferenceProfile, kernel: Iterable[int]) -> DelegationFunction:
    """Members of the kernel vote; everyone else delegates directly to her favourite of kernel ∪ {0}."""
    members = _checked_kernel(profile, kernel)
    n = profile.n
    if not members:
        return DelegationFunction.everyone_abstains(n)

    options = np.array(members + [ABSTAIN])
    pick = profile.rank_matrix[1:, options].argmin(axis=1)
    targets = options[pick]
    targets[np.array(members) - 1] = members
    return DelegationFunction(targets=tuple(int(t) for t in targets))


def outcome_for(profile: PreferenceProfile, kernel: Iterable[int], problem: str, degenerate: bool = False) -> SolverOutcome:
    """Wrap kernel_to_delegation into a SolverOutcome scored for ``problem``."""
    members = tuple(_checked_kernel(profile, kernel))
    d = kernel_to_delegation(profile, members)
    return SolverOutcome(
        problem=problem,
        delegation=d,
        gurus=members,
        value=measure_for(profile, d, problem),
        degenerate=degenerate,
    )


def measure_dissatisfaction(profile: PreferenceProfile, d: DelegationFunction) -> int:
    assignment = resolve_gurus(profile, d)
    rank = profile.rank_matrix
    return int(sum(rank[i, g] - 1 for i, g in enumerate(assignment.gu, start=1)))


def measure_max_voting_power(profile: PreferenceProfile, d: DelegationFunction) -> Optional[int]:
    """Largest vp(g, d) over gurus (a guru counts herself); None when nobody votes."""
    assignment = resolve_gurus(profile, d)
    if not assignment.gurus:
        return None
    power = Counter(g for g in assignment.gu if g != ABSTAIN)
    return max(power.values())


def measure_abstentions(profile: PreferenceProfile, d: DelegationFunction) -> int:
    return resolve_gurus(profile, d).abstention_count()


def measure_all(profile: PreferenceProfile, d: DelegationFunction) -> Measures:
    return Measures(
        dissatisfaction=measure_dissatisfaction(profile, d),
        max_voting_power=measure_max_voting_power(profile, d),
        abstentions=measure_abstentions(profile, d),
    )


def measure_for(profile: PreferenceProfile, d: DelegationFunction, problem: str) -> Optional[int]:
    """Objective value of d for an optimisation problem name, None for the others."""
    if problem == "mindis":
        return measure_dissatisfaction(profile, d)
    if problem == "minmaxvp":
        return measure_max_voting_power(profile, d)
    if problem == "minabst":
        return measure_abstentions(profile, d)
    return None
