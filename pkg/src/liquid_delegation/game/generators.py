"""Seeded random instance generators for every preference class and for 3-SAT."""

import itertools
from typing import Iterator, List

import numpy as np

from liquid_delegation.errors import InvalidInputError
from liquid_delegation.game.distance import DbInstance, DistanceModel, ThresholdVector
from liquid_delegation.game.gadgets import CnfInstance
from liquid_delegation.game.profile import ABSTAIN, PreferenceProfile


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidInputError(f"need at least one voter, got {n}")


def _place_self_and_abstain(rng: np.random.Generator, voter: int, others: List[int], abstainer: bool) -> List[int]:
    first, second = (ABSTAIN, voter) if abstainer else (voter, ABSTAIN)
    a, b = sorted(int(x) for x in rng.integers(0, len(others) + 1, size=2))
    order = list(others)
    order.insert(b, second)
    order.insert(a, first)
    return order


def random_sp_profile(n: int, rng: np.random.Generator, abstain_prob: float = 0.2) -> PreferenceProfile:
    """Each voter interleaves her two sides at random, closest first on each side."""
    _check_n(n)
    orders = []
    for i in range(1, n + 1):
        left = list(range(i - 1, 0, -1))
        right = list(range(i + 1, n + 1))
        from_left = np.zeros(len(left) + len(right), dtype=bool)
        from_left[rng.choice(from_left.size, size=len(left), replace=False)] = True
        sides = [iter(left), iter(right)]
        merged = [next(sides[0]) if flag else next(sides[1]) for flag in from_left]
        orders.append(_place_self_and_abstain(rng, i, merged, bool(rng.random() < abstain_prob)))
    return PreferenceProfile(orders)


def random_symmetric_profile(
    n: int,
    rng: np.random.Generator,
    edge_prob: float = 0.3,
    abstain_prob: float = 0.1,
) -> PreferenceProfile:
    """Random undirected acceptability graph; neighbours first in random order."""
    _check_n(n)
    upper = np.triu(rng.random((n, n)) < edge_prob, k=1)
    adjacency = upper | upper.T
    orders = []
    for i in range(1, n + 1):
        row = adjacency[i - 1]
        neighbours = [int(j) + 1 for j in rng.permutation(np.flatnonzero(row))]
        rest = [int(j) + 1 for j in rng.permutation(np.flatnonzero(~row)) if j != i - 1]
        middle = [ABSTAIN, i] if rng.random() < abstain_prob else [i, ABSTAIN]
        orders.append(neighbours + middle + rest)
    return PreferenceProfile(orders)


def random_db_instance(
    n: int,
    rng: np.random.Generator,
    dimension: int = 2,
    threshold_scale: float = 0.5,
    abstain_prob: float = 0.1,
) -> DbInstance:
    """Uniform points in the unit cube with uniform thresholds in [0, threshold_scale]."""
    _check_n(n)
    model = DistanceModel.from_points(rng.random((n, dimension)))
    thresholds = ThresholdVector(values=tuple(float(x) for x in rng.random(n) * threshold_scale))
    abstainers = frozenset(int(i) + 1 for i in np.flatnonzero(rng.random(n) < abstain_prob))
    return DbInstance(model=model, thresholds=thresholds, abstainers=abstainers)


def random_profile(n: int, rng: np.random.Generator) -> PreferenceProfile:
    _check_n(n)
    return PreferenceProfile([[int(o) for o in rng.permutation(n + 1)] for _ in range(n)])


def random_cnf(n_u: int, n_c: int, rng: np.random.Generator) -> CnfInstance:
    if n_u < 1 and n_c > 0:
        raise InvalidInputError("clauses need at least one variable")
    variables = rng.integers(1, n_u + 1, size=(n_c, 3))
    signs = np.where(rng.random((n_c, 3)) < 0.5, -1, 1)
    return CnfInstance(n_u=n_u, clauses=tuple(tuple(int(x) for x in row) for row in variables * signs))


def all_cnf_instances(n_u: int, n_c: int) -> Iterator[CnfInstance]:
    """Every instance with n_u variables and n_c clauses, clauses and literals taken as multisets."""
    literals = [v for var in range(1, n_u + 1) for v in (var, -var)]
    clauses = list(itertools.combinations_with_replacement(literals, 3))
    for chosen in itertools.combinations_with_replacement(clauses, n_c):
        yield CnfInstance(n_u=n_u, clauses=chosen)
