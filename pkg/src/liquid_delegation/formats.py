"""Text documents: profiles, delegation functions, dynamics traces, distance models, results and DOT.

Profile document::

    profile 4 sp
    # role 1: x1t
    1: 2 > 1 > 0 > 3 > 4
    ...

or, in partial form, only the acceptable gurus::

    profile 4 partial
    1: voter acc: 2 > 4
    2: abstainer acc:
"""

import hashlib
import re
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from liquid_delegation.errors import DocumentFormatError, InvalidInputError
from liquid_delegation.game.digraph import AcceptabilityDigraph
from liquid_delegation.game.distance import DbInstance, DistanceModel, ThresholdVector
from liquid_delegation.game.dynamics import DynamicsTrace
from liquid_delegation.game.profile import (
    ABSTAIN,
    DelegationFunction,
    PreferenceProfile,
    SolverOutcome,
    measure_all,
    resolve_gurus,
)
from liquid_delegation.game.singlepeaked import AuxiliaryDigraph

CLASS_TAGS = ("sp", "sym", "db")
_VOTER_LINE = re.compile(r"^(\d+)\s*:\s*(.*)$")
_ROLE_LINE = re.compile(r"^#\s*role\s+(\d+)\s*:\s*(\S+)\s*$")
_PARTIAL_BODY = re.compile(r"^(voter|abstainer)\s+acc:\s*(.*)$")


class ProfileDocument(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    profile: PreferenceProfile
    tags: Tuple[str, ...] = ()
    partial: bool = False
    roles: Dict[int, str] = Field(default_factory=dict)


class ResultDocument(BaseModel):
    """Machine-readable answer of one solver run."""

    problem: str
    profile_digest: str
    status: str
    value: Optional[int] = None
    delegation: Optional[Dict[int, int]] = None
    gurus: List[int] = Field(default_factory=list)
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_outcome(cls, profile: PreferenceProfile, outcome: SolverOutcome, status: str = "solved", **diagnostics: Any) -> "ResultDocument":
        if outcome.degenerate:
            diagnostics.setdefault("degenerate", True)
        return cls(
            problem=outcome.problem,
            profile_digest=profile_digest(profile),
            status=status,
            value=outcome.value,
            delegation=outcome.delegation.as_mapping(),
            gurus=list(outcome.gurus),
            diagnostics=diagnostics,
        )

    def delegation_function(self) -> Optional[DelegationFunction]:
        if self.delegation is None:
            return None
        return DelegationFunction.from_mapping(self.delegation, len(self.delegation))


def _split_order(text: str, line_number: int) -> List[int]:
    if not text.strip():
        return []
    try:
        return [int(part) for part in text.split(">")]
    except ValueError as e:
        raise DocumentFormatError(f"expected outcomes separated by '>': {text!r}", line_number) from e


def complete_partial(n: int, voter: int, acceptable: Sequence[int], abstainer: bool) -> List[int]:
    """Acceptable gurus as listed, then voting/abstaining per the flag, then the rest by axis distance."""
    listed = set(acceptable) | {voter}
    middle = [ABSTAIN, voter] if abstainer else [voter, ABSTAIN]
    rest = sorted((j for j in range(1, n + 1) if j not in listed), key=lambda j: (abs(j - voter), j))
    return list(acceptable) + middle + rest


def parse_profile(text: str) -> ProfileDocument:
    n: Optional[int] = None
    tags: Tuple[str, ...] = ()
    partial: Optional[bool] = None
    roles: Dict[int, str] = {}
    orders: Dict[int, List[int]] = {}
    line_number = 0

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            role = _ROLE_LINE.match(line)
            if role:
                roles[int(role.group(1))] = role.group(2)
            continue

        if n is None:
            parts = line.split()
            if parts[0] != "profile" or len(parts) < 2 or not parts[1].isdigit():
                raise DocumentFormatError("expected header 'profile <n> [tags]'", line_number)
            n = int(parts[1])
            if n < 1:
                raise DocumentFormatError("a profile needs at least one voter", line_number)
            unknown = [tag for tag in parts[2:] if tag not in CLASS_TAGS + ("partial",)]
            if unknown:
                raise DocumentFormatError(f"unknown header tags {unknown}", line_number)
            tags = tuple(tag for tag in parts[2:] if tag != "partial")
            continue

        match = _VOTER_LINE.match(line)
        if not match:
            raise DocumentFormatError(f"expected '<voter>: ...', got {line!r}", line_number)
        voter, body = int(match.group(1)), match.group(2).strip()
        if not 1 <= voter <= n:
            raise DocumentFormatError(f"voter {voter} outside 1..{n}", line_number)
        if voter in orders:
            raise DocumentFormatError(f"voter {voter} listed twice", line_number)

        partial_body = _PARTIAL_BODY.match(body)
        if partial is None:
            partial = partial_body is not None
        elif partial != (partial_body is not None):
            raise DocumentFormatError("full and partial voter lines cannot be mixed", line_number)

        if partial_body:
            acceptable = _split_order(partial_body.group(2), line_number)
            bad = [j for j in acceptable if not 1 <= j <= n or j == voter]
            if bad or len(set(acceptable)) != len(acceptable):
                raise DocumentFormatError(f"acceptable gurus of voter {voter} must be distinct other voters", line_number)
            orders[voter] = complete_partial(n, voter, acceptable, partial_body.group(1) == "abstainer")
        else:
            order = _split_order(body, line_number)
            if sorted(order) != list(range(n + 1)):
                raise DocumentFormatError(f"order of voter {voter} is not a permutation of 0..{n}", line_number)
            orders[voter] = order

    if n is None:
        raise DocumentFormatError("empty profile document", line_number or None)
    missing = [i for i in range(1, n + 1) if i not in orders]
    if missing:
        raise DocumentFormatError(f"no preference line for voters {missing}", line_number)
    profile = PreferenceProfile([orders[i] for i in range(1, n + 1)])
    return ProfileDocument(profile=profile, tags=tags, partial=bool(partial), roles=roles)


def format_profile(
    profile: PreferenceProfile,
    tags: Iterable[str] = (),
    partial: bool = False,
    roles: Optional[Dict[int, str]] = None,
) -> str:
    header = ["profile", str(profile.n), *tags]
    if partial:
        header.append("partial")
    lines = [" ".join(header)]
    for i, label in sorted((roles or {}).items()):
        lines.append(f"# role {i}: {label}")
    for i in profile.voters():
        if partial:
            flag = "abstainer" if profile.is_abstainer(i) else "voter"
            acceptable = " > ".join(str(j) for j in profile.acceptable(i))
            lines.append(f"{i}: {flag} acc: {acceptable}".rstrip())
        else:
            lines.append(f"{i}: " + " > ".join(str(o) for o in profile.order(i)))
    return "\n".join(lines) + "\n"


def profile_digest(profile: PreferenceProfile) -> str:
    return hashlib.sha256(format_profile(profile).encode("utf-8")).hexdigest()


def parse_delegation(text: str, n: int) -> DelegationFunction:
    """One ``i: j`` line per voter; j = i votes, j = 0 abstains."""
    mapping: Dict[int, int] = {}
    line_number = 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [part.strip() for part in line.split(":")]
        if len(parts) != 2 or not parts[0].isdigit() or not parts[1].isdigit():
            raise DocumentFormatError(f"expected '<voter>: <target>', got {line!r}", line_number)
        voter, target = int(parts[0]), int(parts[1])
        if not 1 <= voter <= n or not 0 <= target <= n:
            raise DocumentFormatError(f"'{line}' names voters outside 0..{n}", line_number)
        if voter in mapping:
            raise DocumentFormatError(f"voter {voter} listed twice", line_number)
        mapping[voter] = target
    try:
        return DelegationFunction.from_mapping(mapping, n)
    except InvalidInputError as e:
        raise DocumentFormatError(str(e), line_number or None) from e


def format_delegation(d: DelegationFunction) -> str:
    return "".join(f"{i}: {target}\n" for i, target in d.as_mapping().items())


def _measure_column(profile: PreferenceProfile, d: DelegationFunction) -> str:
    measures = measure_all(profile, d)
    maxvp = "-" if measures.max_voting_power is None else measures.max_voting_power
    return f"dis={measures.dissatisfaction};maxvp={maxvp};abst={measures.abstentions}"


def _trace_line(profile: PreferenceProfile, t: int, mover: str, move: str, d: DelegationFunction) -> str:
    gurus = " ".join(str(g) for g in sorted(resolve_gurus(profile, d).gurus))
    return f"{t},{mover},{move},{{{gurus}}},{_measure_column(profile, d)}"


def format_trace(profile: PreferenceProfile, trace: DynamicsTrace) -> str:
    """``t,mover,move,{gurus},measures`` per step, starting from the t = 0 state, then the verdict."""
    lines = [_trace_line(profile, 0, "-", "-", trace.states[0])]
    for t, (mover, move) in enumerate(zip(trace.movers, trace.moves), start=1):
        lines.append(_trace_line(profile, t, str(mover), str(move), trace.states[t]))
    if trace.verdict == "converged":
        lines.append(f"# verdict: converged t*={trace.converged_at} round={trace.convergence_round}")
    elif trace.verdict == "cycle":
        lines.append(f"# verdict: cycle entry={trace.cycle_entry} period={trace.cycle_period}")
    else:
        lines.append("# verdict: budget-exhausted")
    return "\n".join(lines) + "\n"


def parse_move_script(text: str) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Token holders and moves from ``t,mover,move[,...]`` lines; the t = 0 line is skipped."""
    movers: List[int] = []
    moves: List[int] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        columns = [c.strip() for c in line.split(",")]
        if len(columns) < 3:
            raise DocumentFormatError("expected 't,mover,move'", line_number)
        if columns[0] == "0":
            continue
        try:
            t, mover, move = int(columns[0]), int(columns[1]), int(columns[2])
        except ValueError as e:
            raise DocumentFormatError(f"non-integer step, mover or move in {line!r}", line_number) from e
        if t != len(movers) + 1:
            raise DocumentFormatError(f"step {t} out of sequence, expected {len(movers) + 1}", line_number)
        movers.append(mover)
        moves.append(move)
    return tuple(movers), tuple(moves)


def parse_points(text: str) -> DbInstance:
    """``id x1 ... xd threshold abstainer-flag`` per voter, ids 1..n in any order."""
    rows: Dict[int, Tuple[List[float], float, bool]] = {}
    dimension: Optional[int] = None
    line_number = 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 4:
            raise DocumentFormatError("expected 'id x1 .. xd threshold flag'", line_number)
        try:
            voter = int(parts[0])
            coords = [float(x) for x in parts[1:-2]]
            threshold = float(parts[-2])
            flag = int(parts[-1])
        except ValueError as e:
            raise DocumentFormatError(f"malformed point line {line!r}", line_number) from e
        if flag not in (0, 1):
            raise DocumentFormatError("abstainer flag must be 0 or 1", line_number)
        if dimension is None:
            dimension = len(coords)
        elif len(coords) != dimension:
            raise DocumentFormatError(f"expected {dimension} coordinates, got {len(coords)}", line_number)
        if voter in rows:
            raise DocumentFormatError(f"voter {voter} listed twice", line_number)
        rows[voter] = (coords, threshold, bool(flag))

    n = len(rows)
    if n == 0 or sorted(rows) != list(range(1, n + 1)):
        raise DocumentFormatError(f"voter ids must be exactly 1..{n}", line_number or None)
    try:
        return DbInstance(
            model=DistanceModel.from_points([rows[i][0] for i in range(1, n + 1)]),
            thresholds=ThresholdVector(values=tuple(rows[i][1] for i in range(1, n + 1))),
            abstainers=frozenset(i for i in range(1, n + 1) if rows[i][2]),
        )
    except ValueError as e:
        raise DocumentFormatError(str(e), line_number) from e


def format_points(instance: DbInstance) -> str:
    if instance.model.points is None:
        raise InvalidInputError("distance model has no point coordinates")
    lines = []
    for i, coords in enumerate(instance.model.points, start=1):
        flag = 1 if i in instance.abstainers else 0
        xs = " ".join(f"{x:g}" for x in coords)
        lines.append(f"{i} {xs} {instance.thresholds.of(i):g} {flag}")
    return "\n".join(lines) + "\n"


def _int_list(text: str, line_number: int) -> List[int]:
    try:
        return [int(x) for x in text.split()]
    except ValueError as e:
        raise DocumentFormatError(f"expected integers, got {text!r}", line_number) from e


def parse_graph_model(text: str) -> DbInstance:
    """``u v`` edge lines, one ``thresholds: t1 .. tn`` line and an optional ``abstainers: ...`` line."""
    edges: List[Tuple[int, int]] = []
    thresholds: Optional[List[float]] = None
    abstainers: List[int] = []
    line_number = 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("thresholds:"):
            try:
                thresholds = [float(x) for x in line.split(":", 1)[1].split()]
            except ValueError as e:
                raise DocumentFormatError("thresholds must be numbers", line_number) from e
        elif line.startswith("abstainers:"):
            abstainers = _int_list(line.split(":", 1)[1], line_number)
        else:
            pair = _int_list(line, line_number)
            if len(pair) != 2:
                raise DocumentFormatError("edge lines hold exactly two voters", line_number)
            edges.append((pair[0], pair[1]))

    if not thresholds:
        raise DocumentFormatError("missing 'thresholds:' line", line_number or None)
    try:
        return DbInstance(
            model=DistanceModel.from_graph(len(thresholds), edges),
            thresholds=ThresholdVector(values=tuple(thresholds)),
            abstainers=frozenset(abstainers),
        )
    except ValueError as e:
        raise DocumentFormatError(str(e), line_number) from e


def format_graph_model(instance: DbInstance) -> str:
    if instance.model.source != "graph":
        raise InvalidInputError("only graph-distance models can be written as edge lists")
    dist = instance.model.dist
    lines = [f"{i} {j}" for i in range(1, instance.model.n + 1) for j in range(i + 1, instance.model.n + 1) if dist[i, j] == 1]
    lines.append("thresholds: " + " ".join(f"{x:g}" for x in instance.thresholds.values))
    if instance.abstainers:
        lines.append("abstainers: " + " ".join(str(i) for i in sorted(instance.abstainers)))
    return "\n".join(lines) + "\n"


def digraph_to_dot(graph: AcceptabilityDigraph, name: str = "acceptability") -> str:
    lines = [f"digraph {name} {{"]
    lines.extend(f"  {v};" for v in graph.vertices)
    lines.extend(f"  {i} -> {j};" for i, j in sorted(graph.arcs()))
    lines.append("}")
    return "\n".join(lines) + "\n"


def auxiliary_to_dot(aux: AuxiliaryDigraph, name: str = "auxiliary") -> str:
    """Arc labels read ``dis/abst/vp_left/vp_right`` when weights were computed."""
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    lines.extend(f'  "{aux.label(v)}";' for v in aux.nodes())
    for v, w in sorted(aux.arcs()):
        label = ""
        if aux.has_weights:
            weight = aux.weight(v, w)
            label = f' [label="{weight.dissatisfaction}/{weight.abstentions}/{weight.vp_left}/{weight.vp_right}"]'
        lines.append(f'  "{aux.label(v)}" -> "{aux.label(w)}"{label};')
    lines.append("}")
    return "\n".join(lines) + "\n"
