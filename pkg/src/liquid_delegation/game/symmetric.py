"""Symmetric profiles: i ∈ Acc(j) iff j ∈ Acc(i), so G_P^* is an undirected graph.

In an undirected graph the kernels are exactly the maximal independent sets,
hence an equilibrium always exists and every non-abstainer is a guru of some
equilibrium.
"""

from typing import Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np
from dagster import get_dagster_logger
from pydantic import BaseModel, ConfigDict

from liquid_delegation.errors import ClassMismatchError, InvalidInputError
from liquid_delegation.game.profile import PreferenceProfile, SolverOutcome, outcome_for


class SymmetryReport(BaseModel):
    """``witness`` is (accepter, accepted) for the least one-way pair."""

    model_config = ConfigDict(frozen=True)

    symmetric: bool
    witness: Optional[Tuple[int, int]] = None


def check_symmetric(profile: PreferenceProfile) -> SymmetryReport:
    ids = np.array(profile.non_abstainers, dtype=np.int64)
    if not ids.size:
        return SymmetryReport(symmetric=True)
    accepted = profile.acceptability_matrix[np.ix_(ids, ids)]
    one_way = np.argwhere(np.triu(accepted != accepted.T))
    if not one_way.size:
        return SymmetryReport(symmetric=True)
    a, b = (int(ids[x]) for x in one_way[0])
    witness = (a, b) if accepted[one_way[0][0], one_way[0][1]] else (b, a)
    return SymmetryReport(symmetric=False, witness=witness)


def acceptability_graph(profile: PreferenceProfile) -> nx.Graph:
    """Undirected G_P^* of a symmetric profile."""
    report = check_symmetric(profile)
    if not report.symmetric:
        i, j = report.witness
        raise ClassMismatchError(f"profile is not symmetric: {i} accepts {j} but not conversely", witness=report.witness)

    graph = nx.Graph()
    graph.add_nodes_from(profile.non_abstainers)
    accepted = profile.acceptability_matrix
    graph.add_edges_from((int(i), int(j)) for i, j in np.argwhere(np.triu(accepted)) if i in graph and j in graph)
    return graph


def greedy_independent_set(graph: nx.Graph, seeds: Iterable[int] = ()) -> List[int]:
    """Maximal independent set: seeds first, then every free node in ascending order."""
    chosen = list(seeds)
    available = set(graph.nodes())
    for node in chosen:
        if node not in available:
            raise InvalidInputError(f"seed {node} is not an available node")
        available.difference_update(list(graph.adj[node]) + [node])
    while available:
        node = min(available)
        chosen.append(node)
        available.difference_update(list(graph.adj[node]) + [node])
    return sorted(chosen)


def solve_equilibrium_sym(profile: PreferenceProfile) -> SolverOutcome:
    graph = acceptability_graph(profile)
    kernel = greedy_independent_set(graph)
    get_dagster_logger().info(f"Symmetric equilibrium with gurus {kernel}")
    return outcome_for(profile, kernel, "eq", degenerate=not kernel)


def memb_sym(profile: PreferenceProfile, voter: int) -> SolverOutcome:
    voter = profile.check_voter(voter)
    if profile.is_abstainer(voter):
        raise InvalidInputError(f"voter {voter} is an abstainer and can never be a guru")
    graph = acceptability_graph(profile)
    kernel = greedy_independent_set(graph, seeds=[voter])
    return outcome_for(profile, kernel, f"memb:{voter}")
