"""Problem dispatch: pick the polynomial solver of a profile's class or fall back to the exhaustive oracle."""

from typing import Dict, Optional, Tuple

from dagster import get_dagster_logger

from liquid_delegation.errors import ClassMismatchError, InvalidInputError, SizeGuardError
from liquid_delegation.formats import ResultDocument, profile_digest
from liquid_delegation.game.distance import DbInstance, check_threshold_consistency, solve_equilibrium_db
from liquid_delegation.game.oracle import parse_problem, solve_by_enumeration
from liquid_delegation.game.profile import PreferenceProfile, SolverOutcome
from liquid_delegation.game.singlepeaked import (
    AxisProfile,
    check_single_peaked,
    memb_sp,
    minabst_sp,
    mindis_sp,
    minmaxvp_sp,
    solve_equilibrium_sp,
)
from liquid_delegation.game.symmetric import check_symmetric, memb_sym, solve_equilibrium_sym
from liquid_delegation.resources.solver_resource import SolverSettings

CLASSES = ("auto", "sp", "sym", "db", "generic")

POLYNOMIAL: Dict[str, Tuple[str, ...]] = {
    "sp": ("eq", "memb", "mindis", "minmaxvp", "minabst"),
    "sym": ("eq", "memb"),
    "db": ("eq",),
    "generic": (),
}

HARDNESS: Dict[str, str] = {
    "eq": "deciding whether an equilibrium exists is NP-complete",
    "memb": "guru membership is NP-complete",
    "mindis": "MINDIS is NP-hard",
    "minmaxvp": "MINMAXVP is NP-hard",
    "minabst": "MINABST is NP-hard",
}


def detect_class(profile: PreferenceProfile, instance: Optional[DbInstance] = None) -> str:
    """sp, then sym, then db when a matching distance model is supplied, else generic."""
    if check_single_peaked(profile).ok:
        return "sp"
    if check_symmetric(profile).symmetric:
        return "sym"
    if instance is not None and check_threshold_consistency(profile, instance.thresholds, instance.model).consistent:
        return "db"
    return "generic"


def resolve_class(profile: PreferenceProfile, requested: str, instance: Optional[DbInstance] = None) -> str:
    if requested not in CLASSES:
        raise InvalidInputError(f"unknown class {requested!r}; expected one of {', '.join(CLASSES)}")
    if requested == "auto":
        detected = detect_class(profile, instance)
        get_dagster_logger().info(f"Detected profile class: {detected}")
        return detected
    if requested == "sp":
        AxisProfile(profile)
    elif requested == "sym":
        report = check_symmetric(profile)
        if not report.symmetric:
            i, j = report.witness
            raise ClassMismatchError(f"profile is not symmetric: {i} accepts {j} but not conversely", witness=report.witness)
    elif requested == "db":
        if instance is None:
            raise InvalidInputError("--class db needs a distance model (--model)")
        report = check_threshold_consistency(profile, instance.thresholds, instance.model)
        if not report.consistent:
            raise ClassMismatchError(f"profile does not match the distance model: {report.reason}", witness=report.witness)
    return requested


def _oracle(profile: PreferenceProfile, cls: str, problem: str, settings: SolverSettings) -> Optional[SolverOutcome]:
    name, _ = parse_problem(problem)
    size = len(profile.non_abstainers)
    if settings.hardness_refusal and size > settings.kernel_vertex_bound:
        get_dagster_logger().warning(f"Refusing {problem} on a {cls} profile with {size} non-abstainers")
        raise SizeGuardError(
            f"{HARDNESS[name]} on {cls} profiles; exhaustive search refused",
            size=size,
            bound=settings.kernel_vertex_bound,
        )
    bound = settings.kernel_vertex_bound if settings.hardness_refusal else max(size, settings.kernel_vertex_bound)
    get_dagster_logger().info(f"Solving {problem} on a {cls} profile by kernel enumeration")
    return solve_by_enumeration(profile, problem, bound=bound)


def _membership(profile: PreferenceProfile, cls: str, voter: int, settings: SolverSettings) -> Tuple[Optional[SolverOutcome], str, Dict[str, str]]:
    profile.check_voter(voter)
    if profile.is_abstainer(voter):
        return None, "not-member", {"reason": "abstainer"}
    if cls == "sp":
        answer = memb_sp(profile, voter)
        return answer.witness, "solved" if answer.member else "not-member", {}
    if cls == "sym":
        return memb_sym(profile, voter), "solved", {}
    outcome = _oracle(profile, cls, f"memb:{voter}", settings)
    return outcome, "solved" if outcome else "not-member", {}


def solve_problem(
    profile: PreferenceProfile,
    problem: str,
    cls: str = "auto",
    settings: Optional[SolverSettings] = None,
    instance: Optional[DbInstance] = None,
    partial: bool = False,
    assume_completion: bool = False,
) -> ResultDocument:
    """Solve ``problem`` on ``profile``; status is solved, not-member or no-equilibrium."""
    settings = settings or SolverSettings()
    name, voter = parse_problem(problem)
    if partial and name == "mindis" and not assume_completion:
        raise InvalidInputError("dissatisfaction needs complete rankings; partial input requires --assume-completion")

    cls = resolve_class(profile, cls, instance)
    diagnostics: Dict[str, object] = {"class": cls}

    if name == "memb":
        outcome, status, extra = _membership(profile, cls, voter, settings)
        diagnostics.update(extra)
    elif name not in POLYNOMIAL[cls]:
        outcome = _oracle(profile, cls, problem, settings)
        diagnostics["method"] = "kernel-enumeration"
        status = "solved" if outcome else "no-equilibrium"
    elif cls == "sp":
        solver = {"eq": solve_equilibrium_sp, "mindis": mindis_sp, "minmaxvp": minmaxvp_sp, "minabst": minabst_sp}[name]
        outcome, status = solver(profile), "solved"
    elif cls == "sym":
        outcome, status = solve_equilibrium_sym(profile), "solved"
    else:
        outcome, status = solve_equilibrium_db(profile, instance.thresholds, instance.model), "solved"

    if outcome is None:
        return ResultDocument(problem=problem, profile_digest=profile_digest(profile), status=status, diagnostics=diagnostics)
    return ResultDocument.from_outcome(profile, outcome, status=status, **diagnostics)
