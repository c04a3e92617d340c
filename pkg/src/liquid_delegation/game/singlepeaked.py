"""Single-peaked profiles: interval catch form, the auxiliary DAG and the polynomial solvers.

Voters are assumed indexed along the axis. Kernels of the acceptability
digraph of a single-peaked profile correspond one-to-one to source-sink
paths in the auxiliary DAG; the solvers below are path searches on it.
"""

from typing import Callable, Dict, List, NamedTuple, Optional, Set, Tuple, Union

import numpy as np
from dagster import get_dagster_logger
from pydantic import BaseModel, ConfigDict

from liquid_delegation.errors import ClassMismatchError, SolverInvariantError
from liquid_delegation.game.profile import (
    ABSTAIN,
    PreferenceProfile,
    SolverOutcome,
    outcome_for,
)

SOURCE = 0


class SinglePeakedVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    ok: bool
    violation: Optional[Tuple[int, int, int]] = None


class IntervalCatchForm(BaseModel):
    """l_i and r_i of every non-abstainer, in 1-based positions of the abstainer-free re-indexing.

    ``originals[p - 1]`` is the voter id at re-indexed position p.
    """

    model_config = ConfigDict(frozen=True)

    originals: Tuple[int, ...]
    left: Tuple[int, ...]
    right: Tuple[int, ...]

    def interval(self, position: int) -> Tuple[int, int]:
        return self.left[position - 1], self.right[position - 1]


class ArcWeights(NamedTuple):
    dissatisfaction: int
    abstentions: int
    vp_left: int   # voters between the endpoints whose guru is the head (w^j_ij)
    vp_right: int  # voters between the endpoints whose guru is the tail (w^i_ij)


class MembershipAnswer(BaseModel):
    model_config = ConfigDict(frozen=True)

    voter: int
    member: bool
    witness: Optional[SolverOutcome] = None
    reason: Optional[str] = None


def _least_violation(rank: np.ndarray, i: int, n: int) -> Tuple[int, int, int]:
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            between = i < j < k or k < j < i
            if between and rank[i, k] < rank[i, j]:
                return i, j, k
    raise SolverInvariantError(f"voter {i} was flagged but has no violating triple")


def check_single_peaked(profile: PreferenceProfile) -> SinglePeakedVerdict:
    """Each side of every voter must be ranked in order of closeness; i and 0 may sit anywhere."""
    rank = profile.rank_matrix
    n = profile.n
    for i in range(1, n + 1):
        right = rank[i, i + 1:]
        left = rank[i, i - 1:0:-1]
        if (np.diff(right) < 0).any() or (np.diff(left) < 0).any():
            return SinglePeakedVerdict(ok=False, violation=_least_violation(rank, i, n))
    return SinglePeakedVerdict(ok=True)


class AxisProfile:
    """A profile verified to be single-peaked along the axis 1 < 2 < ... < n."""

    __slots__ = ("profile",)

    def __init__(self, profile: PreferenceProfile):
        verdict = check_single_peaked(profile)
        if not verdict.ok:
            i, j, k = verdict.violation
            raise ClassMismatchError(
                f"profile is not single-peaked: voter {i} ranks {k} above {j}",
                witness=verdict.violation,
            )
        self.profile = profile

    @classmethod
    def coerce(cls, value: Union["AxisProfile", PreferenceProfile]) -> "AxisProfile":
        return value if isinstance(value, AxisProfile) else cls(value)


def interval_catch_form(axis: Union[AxisProfile, PreferenceProfile]) -> IntervalCatchForm:
    profile = AxisProfile.coerce(axis).profile
    originals = profile.non_abstainers
    m = len(originals)
    if m == 0:
        return IntervalCatchForm(originals=(), left=(), right=())

    ids = np.array(originals)
    accepted = profile.acceptability_matrix[np.ix_(ids, ids)]
    positions = np.arange(m)
    has_any = accepted.any(axis=1)
    first = np.where(has_any, accepted.argmax(axis=1), positions)
    last = np.where(has_any, m - 1 - accepted[:, ::-1].argmax(axis=1), positions)
    left = np.minimum(first, positions)
    right = np.maximum(last, positions)

    gaps = np.flatnonzero(accepted.sum(axis=1) != right - left)
    if gaps.size:
        voter = originals[int(gaps[0])]
        raise ClassMismatchError(f"acceptable gurus of voter {voter} do not form an interval", witness=voter)

    return IntervalCatchForm(
        originals=tuple(originals),
        left=tuple(int(x) + 1 for x in left),
        right=tuple(int(x) + 1 for x in right),
    )


class AuxiliaryDigraph:
    """DAG on {s} ∪ non-abstainers ∪ {t}; s is 0 and t is n + 1, so arcs always increase."""

    __slots__ = ("n", "source", "sink", "vertices", "_successors", "_weights")

    def __init__(
        self,
        n: int,
        vertices: Tuple[int, ...],
        successors: Dict[int, List[int]],
        weights: Optional[Dict[Tuple[int, int], ArcWeights]] = None,
    ):
        self.n = n
        self.source = SOURCE
        self.sink = n + 1
        self.vertices = vertices
        self._successors = successors
        self._weights = weights

    @property
    def has_weights(self) -> bool:
        return self._weights is not None

    def nodes(self) -> List[int]:
        return [self.source, *self.vertices, self.sink]

    def successors(self, v: int) -> List[int]:
        return self._successors.get(v, [])

    def arcs(self) -> Set[Tuple[int, int]]:
        return {(v, w) for v, heads in self._successors.items() for w in heads}

    def weight(self, v: int, w: int) -> ArcWeights:
        if self._weights is None:
            raise SolverInvariantError("auxiliary digraph was built without arc weights")
        return self._weights[(v, w)]

    def label(self, v: int) -> str:
        if v == self.source:
            return "s"
        if v == self.sink:
            return "t"
        return str(v)

    def ordered_successors(self, v: int) -> List[int]:
        """Successors with the sink first: ending a path is lexicographically smaller than extending it."""
        heads = self.successors(v)
        if self.sink in heads:
            return [self.sink] + [w for w in heads if w != self.sink]
        return list(heads)


def _arc_weights(rank: np.ndarray, tail: int, head: int, n: int) -> ArcWeights:
    """Weights of arc (tail, head) over the voters from tail up to head - 1."""
    between = np.arange(tail + 1, min(head, n + 1))
    options = [ABSTAIN]
    if tail != SOURCE:
        options.append(tail)
    if head <= n:
        options.append(head)
    columns = np.array(options)

    dissatisfaction = int(rank[tail, tail] - 1) if tail != SOURCE else 0
    abstentions = to_head = to_tail = 0
    if between.size:
        block = rank[np.ix_(between, columns)]
        pick = block.argmin(axis=1)
        chosen = columns[pick]
        dissatisfaction += int((block[np.arange(between.size), pick] - 1).sum())
        abstentions = int((chosen == ABSTAIN).sum())
        if head <= n:
            to_head = int((chosen == head).sum())
        if tail != SOURCE:
            to_tail = int((chosen == tail).sum())
    return ArcWeights(dissatisfaction, abstentions, to_head, to_tail)


def build_auxiliary(axis: Union[AxisProfile, PreferenceProfile], weights: bool = True) -> AuxiliaryDigraph:
    """Arc (i, j) iff {i, j} is a kernel of the digraph induced by voters i..j.

    Built by one r* sweep per tail. Weights cost O(n) per arc and can be
    skipped when only an equilibrium is needed.
    """
    axis = AxisProfile.coerce(axis)
    profile = axis.profile
    n = profile.n
    form = interval_catch_form(axis)
    m = len(form.originals)
    sink = n + 1

    successors: Dict[int, List[int]] = {SOURCE: []}
    successors.update({v: [] for v in form.originals})
    if m:
        ids = np.array(form.originals)
        left = np.array(form.left) - 1
        right = np.array(form.right) - 1

        prefix_min = np.minimum.accumulate(right)
        for p in range(m):
            if p == 0 or prefix_min[p - 1] >= p:
                successors[SOURCE].append(int(ids[p]))

        for p in range(m - 1):
            tail_left = left[p + 1:]
            heads = np.arange(p + 1, m)
            blocking = np.where(tail_left > p, right[p + 1:], m)
            reach = np.concatenate(([m], np.minimum.accumulate(blocking)[:-1]))
            ok = (heads > right[p]) & (tail_left > p) & (heads <= reach)
            successors[int(ids[p])].extend(int(v) for v in ids[heads[ok]])

        suffix_max = np.maximum.accumulate(left[::-1])[::-1]
        for p in range(m):
            if p == m - 1 or suffix_max[p + 1] <= p:
                successors[int(ids[p])].append(sink)

    arc_weights = None
    if weights:
        rank = profile.rank_matrix
        arc_weights = {
            (v, w): _arc_weights(rank, v, w, n)
            for v, heads in successors.items()
            for w in heads
        }
    return AuxiliaryDigraph(n, tuple(form.originals), successors, arc_weights)


def _reaches_sink(aux: AuxiliaryDigraph) -> Set[int]:
    reach = {aux.sink}
    for v in reversed(aux.nodes()[:-1]):
        if any(w in reach for w in aux.successors(v)):
            reach.add(v)
    return reach


def _greedy_path(aux: AuxiliaryDigraph, start: int, stop: int, allowed: Callable[[int, int], bool]) -> List[int]:
    """Follow the first allowed successor from start until stop; returns the visited vertices after start."""
    path = []
    v = start
    while v != stop:
        choices = aux.ordered_successors(v) if stop == aux.sink else aux.successors(v)
        nxt = next((w for w in choices if allowed(v, w)), None)
        if nxt is None:
            raise SolverInvariantError(f"path search got stuck at vertex {aux.label(v)}")
        path.append(nxt)
        v = nxt
    return path


def enumerate_paths(aux: AuxiliaryDigraph, limit: Optional[int] = None) -> List[Tuple[int, ...]]:
    """Interior vertex tuples of every source-sink path, lexicographically sorted."""
    found: List[Tuple[int, ...]] = []
    reach = _reaches_sink(aux)

    def walk(v: int, prefix: Tuple[int, ...]) -> bool:
        for w in aux.successors(v):
            if w not in reach:
                continue
            if w == aux.sink:
                found.append(prefix)
            elif not walk(w, prefix + (w,)):
                return False
            if limit is not None and len(found) >= limit:
                return False
        return True

    if aux.vertices:
        walk(aux.source, ())
    return sorted(found)


def _degenerate(profile: PreferenceProfile, problem: str) -> SolverOutcome:
    get_dagster_logger().warning(f"No non-abstainers: {problem} returns the all-abstain delegation")
    return outcome_for(profile, [], problem, degenerate=True)


def solve_equilibrium_sp(axis: Union[AxisProfile, PreferenceProfile]) -> SolverOutcome:
    axis = AxisProfile.coerce(axis)
    profile = axis.profile
    if not profile.non_abstainers:
        return _degenerate(profile, "eq")

    aux = build_auxiliary(axis, weights=False)
    reach = _reaches_sink(aux)
    if aux.source not in reach:
        raise SolverInvariantError("single-peaked profile without a source-sink path")
    path = _greedy_path(aux, aux.source, aux.sink, lambda v, w: w in reach)
    get_dagster_logger().info(f"Single-peaked equilibrium with {len(path) - 1} gurus on {profile.n} voters")
    return outcome_for(profile, path[:-1], "eq")


def memb_sp(axis: Union[AxisProfile, PreferenceProfile], voter: int) -> MembershipAnswer:
    """Is there an equilibrium in which ``voter`` is a guru? True iff some path goes through her."""
    axis = AxisProfile.coerce(axis)
    profile = axis.profile
    voter = profile.check_voter(voter)
    if profile.is_abstainer(voter):
        get_dagster_logger().warning(f"Voter {voter} is an abstainer and never a guru")
        return MembershipAnswer(voter=voter, member=False, reason="abstainer")

    aux = build_auxiliary(axis, weights=False)
    to_sink = _reaches_sink(aux)
    to_voter = {voter}
    for v in reversed([aux.source, *aux.vertices]):
        if v < voter and any(w in to_voter for w in aux.successors(v) if w <= voter):
            to_voter.add(v)

    if aux.source not in to_voter or voter not in to_sink:
        return MembershipAnswer(voter=voter, member=False)

    head = _greedy_path(aux, aux.source, voter, lambda v, w: w in to_voter)
    tail = _greedy_path(aux, voter, aux.sink, lambda v, w: w in to_sink)
    kernel = head + tail[:-1]
    return MembershipAnswer(voter=voter, member=True, witness=outcome_for(profile, kernel, f"memb:{voter}"))


def _shortest_path(aux: AuxiliaryDigraph, cost: Callable[[ArcWeights], int]) -> Tuple[List[int], int]:
    """Lexicographically smallest among the minimum-cost source-sink paths."""
    distance: Dict[int, int] = {aux.sink: 0}
    for v in reversed(aux.nodes()[:-1]):
        options = [cost(aux.weight(v, w)) + distance[w] for w in aux.successors(v) if w in distance]
        if options:
            distance[v] = min(options)
    if aux.source not in distance:
        raise SolverInvariantError("single-peaked profile without a source-sink path")

    def tight(v: int, w: int) -> bool:
        return w in distance and cost(aux.weight(v, w)) + distance[w] == distance[v]

    path = _greedy_path(aux, aux.source, aux.sink, tight)
    return path[:-1], distance[aux.source]


def mindis_sp(axis: Union[AxisProfile, PreferenceProfile]) -> SolverOutcome:
    axis = AxisProfile.coerce(axis)
    profile = axis.profile
    if not profile.non_abstainers:
        return _degenerate(profile, "mindis")

    kernel, total = _shortest_path(build_auxiliary(axis), lambda w: w.dissatisfaction)
    outcome = outcome_for(profile, kernel, "mindis")
    if outcome.value != total:
        raise SolverInvariantError(f"path weight {total} differs from measured dissatisfaction {outcome.value}")
    return outcome


def minabst_sp(axis: Union[AxisProfile, PreferenceProfile]) -> SolverOutcome:
    axis = AxisProfile.coerce(axis)
    profile = axis.profile
    if not profile.non_abstainers:
        return _degenerate(profile, "minabst")

    kernel, total = _shortest_path(build_auxiliary(axis), lambda w: w.abstentions)
    outcome = outcome_for(profile, kernel, "minabst")
    if outcome.value != total:
        raise SolverInvariantError(f"path weight {total} differs from measured abstentions {outcome.value}")
    return outcome


def minmaxvp_sp(axis: Union[AxisProfile, PreferenceProfile]) -> SolverOutcome:
    """Minimise the largest voting power.

    M(j, w) is the best maximum power over the gurus before j among paths that
    reach j with w voters delegating to j from its left. Crossing arc (j, k)
    closes guru j with power w + w^j_jk + 1 and opens k with load w^k_jk.
    """
    axis = AxisProfile.coerce(axis)
    profile = axis.profile
    n = profile.n
    if not profile.non_abstainers:
        return _degenerate(profile, "minmaxvp")

    aux = build_auxiliary(axis)
    unreachable = n + 2
    loads = np.arange(n + 1)
    best = {v: np.full(n + 1, unreachable) for v in aux.nodes()}
    best[aux.source][0] = 0
    for v in aux.nodes()[:-1]:
        row = best[v]
        seen = np.flatnonzero(row < unreachable)
        if not seen.size:
            continue
        for w in aux.successors(v):
            arc = aux.weight(v, w)
            if v == aux.source:
                candidate = int(row[0])
            else:
                candidate = int(np.maximum(row[seen], seen + arc.vp_right + 1).min())
            load = 0 if w == aux.sink else arc.vp_left
            best[w][load] = min(best[w][load], candidate)

    bound = int(best[aux.sink][0])
    if bound >= unreachable:
        raise SolverInvariantError("single-peaked profile without a source-sink path")

    feasible = {v: np.zeros(n + 1, dtype=bool) for v in aux.nodes()}
    feasible[aux.sink][0] = True
    for v in reversed(aux.nodes()[:-1]):
        for w in aux.successors(v):
            arc = aux.weight(v, w)
            if not feasible[w][0 if w == aux.sink else arc.vp_left]:
                continue
            if v == aux.source:
                feasible[v][0] = True
            else:
                feasible[v] |= loads + arc.vp_right + 1 <= bound

    kernel: List[int] = []
    v, load = aux.source, 0
    while v != aux.sink:
        for w in aux.ordered_successors(v):
            arc = aux.weight(v, w)
            next_load = 0 if w == aux.sink else arc.vp_left
            closes = v == aux.source or load + arc.vp_right + 1 <= bound
            if closes and feasible[w][next_load]:
                break
        else:
            raise SolverInvariantError(f"no feasible continuation from vertex {aux.label(v)}")
        if w != aux.sink:
            kernel.append(w)
        v, load = w, next_load

    outcome = outcome_for(profile, kernel, "minmaxvp")
    if outcome.value != bound:
        raise SolverInvariantError(f"dynamic programme value {bound} differs from measured power {outcome.value}")
    get_dagster_logger().info(f"MINMAXVP optimum {bound} with gurus {kernel}")
    return outcome


__all__ = [
    "ArcWeights",
    "AuxiliaryDigraph",
    "AxisProfile",
    "IntervalCatchForm",
    "MembershipAnswer",
    "SinglePeakedVerdict",
    "build_auxiliary",
    "check_single_peaked",
    "enumerate_paths",
    "interval_catch_form",
    "memb_sp",
    "mindis_sp",
    "minabst_sp",
    "minmaxvp_sp",
    "solve_equilibrium_sp",
]
