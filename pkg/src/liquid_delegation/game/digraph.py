"""Delegation-acceptability digraph, kernel checks and the exhaustive kernel oracle."""

from typing import Iterable, List, Literal, Optional, Set, Tuple

import networkx as nx
import numpy as np
from dagster import get_dagster_logger
from pydantic import BaseModel, ConfigDict

from liquid_delegation.errors import InvalidInputError, SizeGuardError
from liquid_delegation.game.profile import PreferenceProfile

DEFAULT_KERNEL_BOUND = 22


class AcceptabilityDigraph:
    """Dense digraph on a subset of the voters 1..n; row/column 0 of the matrix is padding."""

    __slots__ = ("_n", "_vertices", "_adjacency")

    def __init__(self, n: int, vertices: Iterable[int], adjacency: np.ndarray):
        vertex_tuple = tuple(sorted(set(int(v) for v in vertices)))
        if any(not 1 <= v <= n for v in vertex_tuple):
            raise InvalidInputError(f"digraph vertices must lie in 1..{n}")
        if adjacency.shape != (n + 1, n + 1):
            raise InvalidInputError("adjacency matrix does not match the voter count")
        mask = np.zeros(n + 1, dtype=bool)
        mask[list(vertex_tuple)] = True
        matrix = adjacency.astype(bool) & mask[:, None] & mask[None, :]
        np.fill_diagonal(matrix, False)
        matrix.setflags(write=False)
        self._n = n
        self._vertices = vertex_tuple
        self._adjacency = matrix

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Tuple[int, int]], vertices: Optional[Iterable[int]] = None) -> "AcceptabilityDigraph":
        """Build a digraph from an explicit arc list (all of 1..n are vertices unless given)."""
        vertex_set = set(range(1, n + 1)) if vertices is None else set(vertices)
        adjacency = np.zeros((n + 1, n + 1), dtype=bool)
        for i, j in arcs:
            if i == j:
                raise InvalidInputError(f"self-arc on vertex {i}")
            if i not in vertex_set or j not in vertex_set:
                raise InvalidInputError(f"arc ({i}, {j}) leaves the vertex set")
            adjacency[i, j] = True
        return cls(n, vertex_set, adjacency)

    @property
    def n(self) -> int:
        return self._n

    @property
    def vertices(self) -> Tuple[int, ...]:
        return self._vertices

    @property
    def adjacency(self) -> np.ndarray:
        return self._adjacency

    def has_arc(self, i: int, j: int) -> bool:
        return bool(self._adjacency[i, j])

    def successors(self, i: int) -> Tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self._adjacency[i]))

    def predecessors(self, j: int) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self._adjacency[:, j]))

    def arcs(self) -> Set[Tuple[int, int]]:
        return {(int(i), int(j)) for i, j in np.argwhere(self._adjacency)}

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self._adjacency, self._adjacency.T))

    def induced(self, vertices: Iterable[int]) -> "AcceptabilityDigraph":
        keep = set(vertices)
        unknown = keep - set(self._vertices)
        if unknown:
            raise InvalidInputError(f"{sorted(unknown)} are not vertices of the digraph")
        return AcceptabilityDigraph(self._n, keep, self._adjacency)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self._vertices)
        graph.add_edges_from(self.arcs())
        return graph

    def __repr__(self) -> str:
        return f"AcceptabilityDigraph(n={self._n}, vertices={len(self._vertices)}, arcs={int(self._adjacency.sum())})"


class KernelVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    is_kernel: bool
    violation: Optional[Literal["dependent-pair", "unabsorbed-vertex"]] = None
    vertices: Tuple[int, ...] = ()


class KernelListing(BaseModel):
    """Kernels in lexicographic order of their sorted member tuples."""

    model_config = ConfigDict(frozen=True)

    kernels: Tuple[Tuple[int, ...], ...]
    truncated: bool = False


def build_digraph(profile: PreferenceProfile) -> AcceptabilityDigraph:
    return AcceptabilityDigraph(profile.n, profile.non_abstainers, profile.acceptability_matrix)


def is_kernel(graph: AcceptabilityDigraph, kernel: Iterable[int]) -> KernelVerdict:
    """Independent and absorbing; the witness is the first failure in index order."""
    members = sorted(set(kernel))
    outside = set(members) - set(graph.vertices)
    if outside:
        raise InvalidInputError(f"{sorted(outside)} are not vertices of the digraph")

    adjacency = graph.adjacency
    for a, i in enumerate(members):
        for j in members[a + 1:]:
            if adjacency[i, j] or adjacency[j, i]:
                return KernelVerdict(is_kernel=False, violation="dependent-pair", vertices=(i, j))

    chosen = np.zeros(graph.n + 1, dtype=bool)
    chosen[members] = True
    for u in graph.vertices:
        if not chosen[u] and not (adjacency[u] & chosen).any():
            return KernelVerdict(is_kernel=False, violation="unabsorbed-vertex", vertices=(u,))
    return KernelVerdict(is_kernel=True)


def enumerate_kernels(
    graph: AcceptabilityDigraph,
    limit: Optional[int] = None,
    bound: int = DEFAULT_KERNEL_BOUND,
) -> KernelListing:
    """Every kernel of the digraph, by depth-first include/exclude search over ascending vertices.

    An excluded vertex is checked for absorption as soon as all of its
    out-neighbours have been decided, which prunes most of the 2^v subsets.
    """
    vertices = graph.vertices
    m = len(vertices)
    if m > bound:
        raise SizeGuardError("kernel enumeration refused", size=m, bound=bound)
    if limit is not None and limit < 0:
        raise InvalidInputError("limit must be non-negative")

    position = {v: p for p, v in enumerate(vertices)}
    out_mask = [0] * m
    touch_mask = [0] * m
    due: List[List[int]] = [[] for _ in range(m)]
    for p, v in enumerate(vertices):
        deadline = p
        for w in graph.successors(v):
            q = position[w]
            out_mask[p] |= 1 << q
            touch_mask[p] |= 1 << q
            touch_mask[q] |= 1 << p
            deadline = max(deadline, q)
        due[deadline].append(p)

    found: List[int] = []

    def absorbed(pos: int, chosen: int) -> bool:
        return all(chosen >> u & 1 or out_mask[u] & chosen for u in due[pos])

    def search(pos: int, chosen: int) -> None:
        if pos == m:
            found.append(chosen)
            return
        bit = 1 << pos
        if not touch_mask[pos] & chosen and absorbed(pos, chosen | bit):
            search(pos + 1, chosen | bit)
        if absorbed(pos, chosen):
            search(pos + 1, chosen)

    search(0, 0)
    kernels = sorted(tuple(vertices[p] for p in range(m) if mask >> p & 1) for mask in found)
    truncated = limit is not None and len(kernels) > limit
    if truncated:
        kernels = kernels[:limit]
    get_dagster_logger().debug(f"Enumerated {len(found)} kernels on {m} vertices")
    return KernelListing(kernels=tuple(kernels), truncated=truncated)
