import pytest

from liquid_delegation.errors import ClassMismatchError, InvalidInputError, SizeGuardError
from liquid_delegation.formats import profile_digest
from liquid_delegation.game.distance import DbInstance
from liquid_delegation.game.profile import PreferenceProfile, is_nash_stable
from liquid_delegation.resources.solver_resource import SolverSettings
from liquid_delegation.solving import detect_class, resolve_class, solve_problem


class TestClassDetection:
    def test_line_profile_is_single_peaked(self, four_on_a_line: PreferenceProfile) -> None:
        assert detect_class(four_on_a_line) == "sp"

    def test_three_cycle_is_generic(self, three_cycle: PreferenceProfile) -> None:
        assert detect_class(three_cycle) == "generic"

    def test_requested_class_is_checked(self, three_cycle: PreferenceProfile) -> None:
        with pytest.raises(ClassMismatchError):
            resolve_class(three_cycle, "sp")
        with pytest.raises(ClassMismatchError) as excinfo:
            resolve_class(three_cycle, "sym")
        assert excinfo.value.witness == (1, 2)

    def test_distance_class_needs_a_model(self, five_points: DbInstance) -> None:
        with pytest.raises(InvalidInputError, match="distance model"):
            resolve_class(five_points.profile(), "db")
        assert resolve_class(five_points.profile(), "db", five_points) == "db"

    def test_unknown_class(self, three_cycle: PreferenceProfile) -> None:
        with pytest.raises(InvalidInputError, match="unknown class"):
            resolve_class(three_cycle, "tree")


class TestSolveProblem:
    def test_no_equilibrium_on_the_three_cycle(self, three_cycle: PreferenceProfile) -> None:
        result = solve_problem(three_cycle, "eq")
        assert result.status == "no-equilibrium"
        assert result.delegation is None
        assert result.diagnostics == {"class": "generic", "method": "kernel-enumeration"}
        assert result.profile_digest == profile_digest(three_cycle)

    def test_single_peaked_optimisers(self, four_on_a_line: PreferenceProfile) -> None:
        result = solve_problem(four_on_a_line, "mindis")
        assert result.status == "solved"
        assert result.value == 4
        assert result.gurus == [1, 4]
        assert result.delegation == {1: 1, 2: 4, 3: 1, 4: 4}
        assert solve_problem(four_on_a_line, "minabst", cls="sp").value == 0

    def test_membership_answers(self, four_on_a_line: PreferenceProfile) -> None:
        assert solve_problem(four_on_a_line, "memb:4").status == "solved"
        assert solve_problem(four_on_a_line, "memb:2").status == "not-member"

    def test_abstainers_are_never_members(self) -> None:
        profile = PreferenceProfile([[2, 3, 1, 0], [0, 2, 1, 3], [2, 1, 3, 0]])
        result = solve_problem(profile, "memb:2")
        assert result.status == "not-member"
        assert result.diagnostics["reason"] == "abstainer"

    def test_symmetric_equilibrium(self, brd_worst_case: PreferenceProfile) -> None:
        result = solve_problem(brd_worst_case, "eq", cls="sym")
        assert result.gurus == [1, 3]
        assert is_nash_stable(brd_worst_case, result.delegation_function()).stable

    def test_symmetric_optimisation_falls_back_to_enumeration(self, brd_worst_case: PreferenceProfile) -> None:
        result = solve_problem(brd_worst_case, "minabst", cls="sym")
        assert result.diagnostics["method"] == "kernel-enumeration"
        assert result.value == 0

    def test_distance_based_equilibrium(self, five_points: DbInstance) -> None:
        result = solve_problem(five_points.profile(), "eq", cls="db", instance=five_points)
        assert result.gurus == [4, 5]
        assert result.diagnostics["class"] == "db"

    def test_partial_input_has_no_dissatisfaction(self, ird_cycle_profile: PreferenceProfile) -> None:
        with pytest.raises(InvalidInputError, match="assume-completion"):
            solve_problem(ird_cycle_profile, "mindis", partial=True)
        result = solve_problem(ird_cycle_profile, "mindis", partial=True, assume_completion=True)
        assert result.status == "solved"

    @pytest.mark.parametrize("problem", ["eq", "memb:4", "minmaxvp", "minabst"])
    def test_partial_input_answers_everything_else(self, four_on_a_line: PreferenceProfile, problem: str) -> None:
        result = solve_problem(four_on_a_line, problem, partial=True)
        assert result.status == "solved"

    def test_hard_cells_are_refused_above_the_bound(self, three_cycle: PreferenceProfile) -> None:
        with pytest.raises(SizeGuardError) as excinfo:
            solve_problem(three_cycle, "eq", settings=SolverSettings(kernel_vertex_bound=2))
        assert "NP-complete" in str(excinfo.value)

    def test_refusal_can_be_switched_off(self, three_cycle: PreferenceProfile) -> None:
        settings = SolverSettings(kernel_vertex_bound=2, hardness_refusal=False)
        assert solve_problem(three_cycle, "eq", settings=settings).status == "no-equilibrium"
