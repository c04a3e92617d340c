"""Distance-based profiles: voters accept every guru within their own acceptability threshold."""

from typing import FrozenSet, Iterable, Literal, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from dagster import get_dagster_logger
from pydantic import BaseModel, ConfigDict, field_validator

from liquid_delegation.errors import ClassMismatchError, InvalidInputError
from liquid_delegation.game.profile import ABSTAIN, PreferenceProfile, SolverOutcome, outcome_for

TOLERANCE = 1e-9


class DistanceModel(BaseModel):
    """Symmetric non-negative distances between voters; row and column 0 are padding.

    The triangle inequality is not required.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    dist: np.ndarray
    source: Literal["matrix", "points", "graph"] = "matrix"
    points: Optional[np.ndarray] = None

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[float]], source: str = "matrix", points: Optional[np.ndarray] = None) -> "DistanceModel":
        table = np.asarray(matrix, dtype=float)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise InvalidInputError("distance matrix must be square and non-empty")
        if np.isnan(table).any() or (table < 0).any():
            raise InvalidInputError("distances must be non-negative numbers")
        if not np.array_equal(table, table.T):
            i, j = np.argwhere(table != table.T)[0] + 1
            raise InvalidInputError(f"distance matrix is not symmetric at ({i}, {j})")
        if np.diagonal(table).any():
            raise InvalidInputError("dist(i, i) must be 0")

        n = table.shape[0]
        padded = np.full((n + 1, n + 1), np.inf)
        padded[1:, 1:] = table
        padded.setflags(write=False)
        return cls(n=n, dist=padded, source=source, points=points)

    @classmethod
    def from_points(cls, coordinates: Sequence[Sequence[float]]) -> "DistanceModel":
        """Euclidean distances between voter positions; row k holds voter k + 1."""
        points = np.atleast_2d(np.asarray(coordinates, dtype=float))
        if points.size == 0:
            raise InvalidInputError("at least one point is needed")
        diff = points[:, None, :] - points[None, :, :]
        return cls.from_matrix(np.linalg.norm(diff, axis=-1), source="points", points=points)

    @classmethod
    def from_graph(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "DistanceModel":
        """Unweighted shortest-path distances; disconnected pairs are infinitely far apart."""
        graph = nx.Graph()
        graph.add_nodes_from(range(1, n + 1))
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise InvalidInputError(f"edge ({u}, {v}) names a voter outside 1..{n}")
            graph.add_edge(u, v)

        table = np.full((n, n), np.inf)
        for u, lengths in nx.all_pairs_shortest_path_length(graph):
            for v, length in lengths.items():
                table[u - 1, v - 1] = length
        return cls.from_matrix(table, source="graph")

    def distance(self, i: int, j: int) -> float:
        return float(self.dist[i, j])


class ThresholdVector(BaseModel):
    """``values[i - 1]`` is the acceptability threshold At(i)."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...]

    @field_validator("values")
    @classmethod
    def _non_negative(cls, values: Tuple[float, ...]) -> Tuple[float, ...]:
        for i, value in enumerate(values, start=1):
            if not value >= 0:
                raise ValueError(f"threshold of voter {i} must be non-negative, got {value}")
        return values

    @property
    def n(self) -> int:
        return len(self.values)

    def of(self, i: int) -> float:
        return self.values[i - 1]

    def as_array(self) -> np.ndarray:
        """Padded so that index i holds At(i)."""
        return np.concatenate(([np.inf], np.asarray(self.values, dtype=float)))


class DbInstance(BaseModel):
    """A distance model with thresholds and abstainer flags, as read from a points or graph file."""

    model_config = ConfigDict(frozen=True)

    model: DistanceModel
    thresholds: ThresholdVector
    abstainers: FrozenSet[int] = frozenset()

    def profile(self) -> PreferenceProfile:
        return build_db_profile(self.model, self.thresholds, self.abstainers)


class ConsistencyReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    consistent: bool
    witness: Optional[Tuple[int, int]] = None
    reason: Optional[str] = None


def _check_sizes(n: int, thresholds: ThresholdVector) -> None:
    if thresholds.n != n:
        raise InvalidInputError(f"{thresholds.n} thresholds given for {n} voters")


def threshold_acceptance(model: DistanceModel, thresholds: ThresholdVector) -> np.ndarray:
    """Padded boolean matrix: [i, j] iff j ≠ i and dist(i, j) ≤ At(i)."""
    _check_sizes(model.n, thresholds)
    accepted = model.dist <= thresholds.as_array()[:, None] + TOLERANCE
    accepted[0, :] = False
    accepted[:, 0] = False
    np.fill_diagonal(accepted, False)
    return accepted


def build_db_profile(
    model: DistanceModel,
    thresholds: ThresholdVector,
    abstainers: Iterable[int] = (),
) -> PreferenceProfile:
    """Acceptable voters by (distance, index), then voting and abstaining, then everyone else."""
    n = model.n
    flagged = set(abstainers)
    unknown = sorted(v for v in flagged if not 1 <= v <= n)
    if unknown:
        raise InvalidInputError(f"abstainer flags name unknown voters {unknown}")

    accepted = threshold_acceptance(model, thresholds)
    orders = []
    for i in range(1, n + 1):
        # stable sort keeps equidistant voters in index order
        others = np.argsort(model.dist[i, 1:], kind="stable") + 1
        others = others[others != i]
        inside = others[accepted[i, others]].tolist()
        outside = others[~accepted[i, others]].tolist()
        middle = [ABSTAIN, i] if i in flagged else [i, ABSTAIN]
        orders.append(inside + middle + outside)
    return PreferenceProfile(orders)


def check_threshold_consistency(
    profile: PreferenceProfile,
    thresholds: ThresholdVector,
    model: Optional[DistanceModel] = None,
) -> ConsistencyReport:
    """Without a model only the necessary condition is checked: i → j one-way forces At(i) > At(j)."""
    _check_sizes(profile.n, thresholds)
    accepted = profile.acceptability_matrix
    if model is not None:
        if model.n != profile.n:
            raise InvalidInputError(f"distance model covers {model.n} voters, profile has {profile.n}")
        mismatch = np.argwhere(accepted != threshold_acceptance(model, thresholds))
        if mismatch.size:
            i, j = (int(x) for x in mismatch[0])
            return ConsistencyReport(consistent=False, witness=(i, j), reason="acceptance differs from threshold rule")
        return ConsistencyReport(consistent=True)

    at = thresholds.as_array()
    one_way = accepted & ~accepted.T & (at[:, None] <= at[None, :])
    bad = np.argwhere(one_way)
    if bad.size:
        i, j = (int(x) for x in bad[0])
        return ConsistencyReport(consistent=False, witness=(i, j), reason="one-way acceptance with At(i) <= At(j)")
    return ConsistencyReport(consistent=True)


def solve_equilibrium_db(
    profile: PreferenceProfile,
    thresholds: ThresholdVector,
    model: Optional[DistanceModel] = None,
) -> SolverOutcome:
    """Greedy: pick the remaining voter with the smallest threshold, drop her and everyone accepting her."""
    report = check_threshold_consistency(profile, thresholds, model)
    if not report.consistent:
        i, j = report.witness
        raise ClassMismatchError(f"profile does not match the thresholds at ({i}, {j}): {report.reason}", witness=report.witness)

    accepted = profile.acceptability_matrix
    remaining = np.zeros(profile.n + 1, dtype=bool)
    remaining[list(profile.non_abstainers)] = True
    ordered = sorted(profile.non_abstainers, key=lambda i: (thresholds.of(i), i))

    kernel = []
    for i in ordered:
        if not remaining[i]:
            continue
        kernel.append(i)
        remaining[i] = False
        remaining &= ~accepted[:, i]
    get_dagster_logger().info(f"Distance-based equilibrium with gurus {kernel}")
    return outcome_for(profile, kernel, "eq", degenerate=not kernel)


def encode_symmetric(profile: PreferenceProfile) -> Tuple[DistanceModel, ThresholdVector]:
    """dist(i, j) = 1 for mutually acceptable pairs and 2 otherwise, with every threshold 1."""
    accepted = profile.acceptability_matrix[1:, 1:]
    if not np.array_equal(accepted, accepted.T):
        i, j = np.argwhere(accepted != accepted.T)[0] + 1
        raise ClassMismatchError(f"acceptance is not symmetric at ({i}, {j})", witness=(int(i), int(j)))
    table = np.where(accepted, 1.0, 2.0)
    np.fill_diagonal(table, 0.0)
    return DistanceModel.from_matrix(table), ThresholdVector(values=(1.0,) * profile.n)
