"""3-SAT hardness gadgets as executable profile generators, with a brute-force SAT oracle.

Voter numbering is fixed: the literal voters for x_i are 2i - 1 (x_i true) and
2i (x_i false), clause j is voter 2n_u + j, and construction-specific extras
come after the clauses.
"""

from typing import Dict, Iterable, List, Literal, Optional, Sequence, Set, Tuple

import numpy as np
from dagster import get_dagster_logger
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from liquid_delegation.errors import DocumentFormatError, InvalidInputError, SizeGuardError
from liquid_delegation.game.digraph import DEFAULT_KERNEL_BOUND, build_digraph, enumerate_kernels
from liquid_delegation.game.distance import DbInstance, DistanceModel, ThresholdVector, build_db_profile
from liquid_delegation.game.profile import ABSTAIN, PreferenceProfile, kernel_to_delegation, measure_for

DEFAULT_SAT_BOUND = 24
SAT_CHUNK = 1 << 16

GadgetKind = Literal["guc", "minabst", "mindis", "minmaxvp", "memb"]
GADGET_KINDS: Tuple[str, ...] = ("guc", "minabst", "mindis", "minmaxvp", "memb")


class CnfInstance(BaseModel):
    """A 3-SAT instance; literal v > 0 means x_v, -v means not x_v."""

    model_config = ConfigDict(frozen=True)

    n_u: int
    clauses: Tuple[Tuple[int, int, int], ...] = ()

    @field_validator("n_u")
    @classmethod
    def _non_negative(cls, n_u: int) -> int:
        if n_u < 0:
            raise ValueError("variable count must be non-negative")
        return n_u

    @model_validator(mode="after")
    def _literals_in_range(self) -> "CnfInstance":
        for j, clause in enumerate(self.clauses, start=1):
            for literal in clause:
                if literal == 0 or abs(literal) > self.n_u:
                    raise ValueError(f"clause {j} uses literal {literal} outside ±1..{self.n_u}")
        return self

    @property
    def n_c(self) -> int:
        return len(self.clauses)

    def literal_voter(self, literal: int) -> int:
        v = abs(literal)
        return 2 * v - 1 if literal > 0 else 2 * v

    def clause_voter(self, j: int) -> int:
        return 2 * self.n_u + j

    def clause_literal_voters(self, j: int) -> List[int]:
        """Literal voters of clause j in clause order, repeated literals once."""
        return list(dict.fromkeys(self.literal_voter(lit) for lit in self.clauses[j - 1]))

    def clauses_of_literal(self, voter: int) -> List[int]:
        """Clause voters whose clause contains the literal of ``voter``, ascending."""
        return [self.clause_voter(j) for j in range(1, self.n_c + 1) if voter in self.clause_literal_voters(j)]

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        return all(any(assignment[abs(lit) - 1] == (lit > 0) for lit in clause) for clause in self.clauses)


class SatResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    satisfiable: bool
    assignment: Optional[Tuple[bool, ...]] = None


class VoterRole(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["literal", "clause", "star", "star-clique", "clique", "pendant", "connector", "query"]
    index: int = 0
    positive: Optional[bool] = None

    def label(self) -> str:
        if self.kind == "literal":
            return f"x{self.index}{'t' if self.positive else 'f'}"
        return {
            "clause": f"c{self.index}",
            "star": "v*",
            "star-clique": f"v*{self.index}",
            "clique": f"v{self.index}",
            "pendant": f"v'{self.index}",
            "connector": "vt",
            "query": "vq",
        }[self.kind]


class GadgetProfile(BaseModel):
    """A reduction output. ``roles[i - 1]`` is the role of voter i; ``bounds`` are the decision thresholds."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: GadgetKind
    instance: CnfInstance
    profile: PreferenceProfile
    roles: Tuple[VoterRole, ...]
    bounds: Tuple[int, ...] = ()
    query: Optional[int] = None
    db: Optional[DbInstance] = None

    @property
    def n(self) -> int:
        return self.profile.n

    def role_labels(self) -> Dict[int, str]:
        return {i: role.label() for i, role in enumerate(self.roles, start=1)}


class ReductionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: GadgetKind
    voters: int
    satisfiable: bool
    gadget_side: Tuple[bool, ...]
    bounds: Tuple[int, ...] = ()
    optimum: Optional[int] = None
    witness_kernel: Optional[Tuple[int, ...]] = None
    assignment: Optional[Tuple[bool, ...]] = None

    @property
    def agree(self) -> bool:
        return all(side == self.satisfiable for side in self.gadget_side)


def parse_cnf(text: str) -> CnfInstance:
    """DIMACS: ``c`` comments, one ``p cnf <vars> <clauses>`` header, clauses ended by 0 (may span lines)."""
    n_u: Optional[int] = None
    declared = 0
    header_line = 0
    clauses: List[Tuple[int, int, int]] = []
    pending: List[int] = []
    line_number = 0

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if n_u is not None:
                raise DocumentFormatError("duplicate problem line", line_number)
            if len(parts) != 4 or parts[1] != "cnf":
                raise DocumentFormatError(f"invalid problem line: {line}", line_number)
            try:
                n_u, declared = int(parts[2]), int(parts[3])
            except ValueError as e:
                raise DocumentFormatError(f"invalid problem line: {line}", line_number) from e
            if n_u < 0 or declared < 0:
                raise DocumentFormatError("variable and clause counts must be non-negative", line_number)
            header_line = line_number
            continue
        if n_u is None:
            raise DocumentFormatError("clause before the problem line", line_number)

        for token in line.split():
            try:
                literal = int(token)
            except ValueError as e:
                raise DocumentFormatError(f"not a literal: {token!r}", line_number) from e
            if literal == 0:
                if len(pending) != 3:
                    raise DocumentFormatError(f"clause has {len(pending)} literals, expected 3", line_number)
                clauses.append((pending[0], pending[1], pending[2]))
                pending = []
            elif abs(literal) > n_u:
                raise DocumentFormatError(f"variable {abs(literal)} outside 1..{n_u}", line_number)
            else:
                pending.append(literal)

    if n_u is None:
        raise DocumentFormatError("missing problem line 'p cnf <vars> <clauses>'", line_number or None)
    if pending:
        raise DocumentFormatError("last clause is not terminated by 0", line_number)
    if len(clauses) != declared:
        raise DocumentFormatError(f"header declares {declared} clauses, found {len(clauses)}", header_line)
    return CnfInstance(n_u=n_u, clauses=tuple(clauses))


def format_cnf(inst: CnfInstance) -> str:
    lines = [f"p cnf {inst.n_u} {inst.n_c}"]
    lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in inst.clauses)
    return "\n".join(lines) + "\n"


def brute_force_sat(inst: CnfInstance, bound: int = DEFAULT_SAT_BOUND) -> SatResult:
    """Try assignments in increasing integer order (bit v - 1 set means x_v true)."""
    n = inst.n_u
    if n > bound:
        raise SizeGuardError("brute-force SAT refused", size=n, bound=bound)
    if not inst.clauses:
        return SatResult(satisfiable=True, assignment=(False,) * n)

    literals = np.array(inst.clauses, dtype=np.int64)
    variables = np.abs(literals) - 1
    wanted = literals > 0
    shifts = np.arange(n, dtype=np.int64)
    total = 1 << n
    for start in range(0, total, SAT_CHUNK):
        values = np.arange(start, min(start + SAT_CHUNK, total), dtype=np.int64)
        bits = ((values[:, None] >> shifts) & 1).astype(bool)
        truth = bits[:, variables] == wanted
        satisfied = np.flatnonzero(truth.any(axis=2).all(axis=1))
        if satisfied.size:
            value = int(values[satisfied[0]])
            return SatResult(satisfiable=True, assignment=tuple(bool(value >> v & 1) for v in range(n)))
    return SatResult(satisfiable=False)


def _literal_roles(inst: CnfInstance) -> List[VoterRole]:
    roles = []
    for v in range(1, inst.n_u + 1):
        roles.append(VoterRole(kind="literal", index=v, positive=True))
        roles.append(VoterRole(kind="literal", index=v, positive=False))
    roles.extend(VoterRole(kind="clause", index=j) for j in range(1, inst.n_c + 1))
    return roles


def _opposite(voter: int) -> int:
    return voter + 1 if voter % 2 else voter - 1


def _complete(n: int, voter: int, head: Sequence[int], abstainer: bool = False) -> List[int]:
    """``head``, then voting, then every other voter ascending, with abstention last.

    An ``abstainer`` ranks abstention right after ``head`` instead, above voting.
    """
    listed = set(head) | {voter}
    rest = [j for j in range(1, n + 1) if j not in listed]
    if abstainer:
        return list(head) + [ABSTAIN, voter] + rest
    return list(head) + [voter] + rest + [ABSTAIN]


def guc_edges(inst: CnfInstance) -> Set[Tuple[int, int]]:
    """Undirected edges (u < v) of G_{U,C}: literal pairs and clause-literal incidences."""
    edges = {(2 * v - 1, 2 * v) for v in range(1, inst.n_u + 1)}
    for j in range(1, inst.n_c + 1):
        c = inst.clause_voter(j)
        edges.update((min(c, u), max(c, u)) for u in inst.clause_literal_voters(j))
    return edges


def digraph_profile(n: int, edges: Iterable[Tuple[int, int]], abstainers: Iterable[int] = ()) -> PreferenceProfile:
    """Symmetric profile whose acceptability graph is exactly ``edges``: neighbours ascending, then vote."""
    neighbours: Dict[int, Set[int]] = {i: set() for i in range(1, n + 1)}
    for u, v in edges:
        neighbours[u].add(v)
        neighbours[v].add(u)
    flagged = set(abstainers)
    return PreferenceProfile([_complete(n, i, sorted(neighbours[i]), i in flagged) for i in range(1, n + 1)])


def build_guc(inst: CnfInstance) -> GadgetProfile:
    n = 2 * inst.n_u + inst.n_c
    if n == 0:
        raise InvalidInputError("instance has no variables and no clauses")
    return GadgetProfile(kind="guc", instance=inst, profile=digraph_profile(n, guc_edges(inst)), roles=tuple(_literal_roles(inst)))


def build_minabst_gadget(inst: CnfInstance) -> GadgetProfile:
    """Clause voters abstain unless one of their literals votes; literal voters accept only their opposite."""
    n = 2 * inst.n_u + inst.n_c
    if n == 0:
        raise InvalidInputError("instance has no variables and no clauses")
    orders = [_complete(n, i, [_opposite(i)]) for i in range(1, 2 * inst.n_u + 1)]
    orders.extend(
        _complete(n, inst.clause_voter(j), inst.clause_literal_voters(j), abstainer=True)
        for j in range(1, inst.n_c + 1)
    )
    return GadgetProfile(
        kind="minabst",
        instance=inst,
        profile=PreferenceProfile(orders),
        roles=tuple(_literal_roles(inst)),
        bounds=(0,),
    )


def mindis_k(inst: CnfInstance) -> int:
    return 3 * inst.n_c + inst.n_u + inst.n_u * inst.n_c


def build_mindis_gadget(inst: CnfInstance, k: Optional[int] = None) -> GadgetProfile:
    """Clique {v*, v*_1..v*_{k-1}} adjacent to every clause; thresholds 2k - 1 and 2k.

    The v*_i rank their clique peers as a cyclic Latin square.
    """
    k = mindis_k(inst) if k is None else k
    if k < 2:
        raise InvalidInputError(f"clique size k must be at least 2, got {k}")
    base = 2 * inst.n_u + inst.n_c
    n = base + k
    star = base + 1
    peers = [star + s for s in range(1, k)]
    clause_voters = [inst.clause_voter(j) for j in range(1, inst.n_c + 1)]

    orders = []
    for i in range(1, 2 * inst.n_u + 1):
        orders.append(_complete(n, i, [_opposite(i)] + inst.clauses_of_literal(i)))
    for j in range(1, inst.n_c + 1):
        orders.append(_complete(n, inst.clause_voter(j), inst.clause_literal_voters(j) + peers + [star]))
    orders.append(_complete(n, star, peers + clause_voters))
    for s in range(1, k):
        cyclic = [peers[(s - 1 + step) % (k - 1)] for step in range(1, k - 1)]
        orders.append(_complete(n, peers[s - 1], [star] + cyclic + clause_voters))

    roles = _literal_roles(inst) + [VoterRole(kind="star")]
    roles.extend(VoterRole(kind="star-clique", index=s) for s in range(1, k))
    return GadgetProfile(
        kind="mindis",
        instance=inst,
        profile=PreferenceProfile(orders),
        roles=tuple(roles),
        bounds=(2 * k - 1, 2 * k),
    )


def build_minmaxvp_gadget(inst: CnfInstance) -> GadgetProfile:
    """Clique v_1..v_{n_c+2} adjacent to every clause, each v_i with a pendant v'_i; bound n_c + 3."""
    base = 2 * inst.n_u + inst.n_c
    size = inst.n_c + 2
    clique = [base + s for s in range(1, size + 1)]
    pendants = [base + size + s for s in range(1, size + 1)]
    n = base + 2 * size
    clause_voters = [inst.clause_voter(j) for j in range(1, inst.n_c + 1)]

    orders = []
    for i in range(1, 2 * inst.n_u + 1):
        orders.append(_complete(n, i, [_opposite(i)] + inst.clauses_of_literal(i)))
    for j in range(1, inst.n_c + 1):
        orders.append(_complete(n, inst.clause_voter(j), inst.clause_literal_voters(j) + clique))
    for s, v in enumerate(clique):
        orders.append(_complete(n, v, clause_voters + [u for u in clique if u != v] + [pendants[s]]))
    for s, v in enumerate(pendants):
        orders.append(_complete(n, v, [clique[s]]))

    roles = _literal_roles(inst)
    roles.extend(VoterRole(kind="clique", index=s) for s in range(1, size + 1))
    roles.extend(VoterRole(kind="pendant", index=s) for s in range(1, size + 1))
    return GadgetProfile(
        kind="minmaxvp",
        instance=inst,
        profile=PreferenceProfile(orders),
        roles=tuple(roles),
        bounds=(inst.n_c + 3,),
    )


def build_memb_gadget(inst: CnfInstance) -> GadgetProfile:
    """Distance-based: hop distances in G_{U,C} plus v_t (joined to v_q and every clause); At = 1, At(v_q) = 2."""
    base = 2 * inst.n_u + inst.n_c
    connector, query = base + 1, base + 2
    n = base + 2
    edges = set(guc_edges(inst))
    edges.add((connector, query))
    edges.update((inst.clause_voter(j), connector) for j in range(1, inst.n_c + 1))

    model = DistanceModel.from_graph(n, edges)
    thresholds = ThresholdVector(values=tuple(2.0 if i == query else 1.0 for i in range(1, n + 1)))
    db = DbInstance(model=model, thresholds=thresholds)
    roles = _literal_roles(inst) + [VoterRole(kind="connector"), VoterRole(kind="query")]
    return GadgetProfile(
        kind="memb",
        instance=inst,
        profile=build_db_profile(model, thresholds),
        roles=tuple(roles),
        query=query,
        db=db,
    )


def build_gadget(inst: CnfInstance, kind: str) -> GadgetProfile:
    builders = {
        "guc": build_guc,
        "minabst": build_minabst_gadget,
        "mindis": build_mindis_gadget,
        "minmaxvp": build_minmaxvp_gadget,
        "memb": build_memb_gadget,
    }
    if kind not in builders:
        raise InvalidInputError(f"unknown gadget kind {kind!r}; expected one of {', '.join(GADGET_KINDS)}")
    return builders[kind](inst)


def _best_kernel(gadget: GadgetProfile, kernels: Sequence[Tuple[int, ...]], problem: str) -> Tuple[Optional[int], Optional[Tuple[int, ...]]]:
    best_value, best_kernel = None, None
    for kernel in kernels:
        value = measure_for(gadget.profile, kernel_to_delegation(gadget.profile, kernel), problem)
        if value is not None and (best_value is None or value < best_value):
            best_value, best_kernel = value, kernel
    return best_value, best_kernel


def verify_reduction(
    inst: CnfInstance,
    kind: str,
    kernel_bound: int = DEFAULT_KERNEL_BOUND,
    sat_bound: int = DEFAULT_SAT_BOUND,
) -> ReductionReport:
    """Decide both sides of the reduction exhaustively and report whether they agree."""
    sat = brute_force_sat(inst, bound=sat_bound)
    gadget = build_gadget(inst, kind)
    if gadget.n > kernel_bound:
        raise SizeGuardError(f"{kind} gadget is too large for exhaustive verification", size=gadget.n, bound=kernel_bound)
    kernels = enumerate_kernels(build_digraph(gadget.profile), bound=kernel_bound).kernels

    optimum = None
    witness = None
    if kind == "guc":
        clause_voters = {inst.clause_voter(j) for j in range(1, inst.n_c + 1)}
        witness = next((k for k in kernels if not clause_voters & set(k)), None)
        sides: Tuple[bool, ...] = (witness is not None,)
    elif kind == "memb":
        witness = next((k for k in kernels if gadget.query in k), None)
        sides = (witness is not None,)
    else:
        problem = {"minabst": "minabst", "mindis": "mindis", "minmaxvp": "minmaxvp"}[kind]
        optimum, witness = _best_kernel(gadget, kernels, problem)
        if kind == "minabst":
            sides = (optimum is not None and optimum <= 0,)
        elif kind == "minmaxvp":
            sides = (optimum is not None and optimum < gadget.bounds[0],)
        else:
            sides = tuple(optimum is not None and optimum <= bound for bound in gadget.bounds)

    report = ReductionReport(
        kind=kind,
        voters=gadget.n,
        satisfiable=sat.satisfiable,
        gadget_side=sides,
        bounds=gadget.bounds,
        optimum=optimum,
        witness_kernel=witness,
        assignment=sat.assignment,
    )
    log = get_dagster_logger()
    if report.agree:
        log.debug(f"{kind} reduction agrees on {inst.n_u} variables / {inst.n_c} clauses")
    else:
        log.warning(f"{kind} reduction disagrees: sat={sat.satisfiable} gadget={sides}")
    return report
