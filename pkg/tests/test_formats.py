from pathlib import Path

import pytest

from liquid_delegation.errors import DocumentFormatError, InvalidInputError
from liquid_delegation.formats import (
    ResultDocument,
    auxiliary_to_dot,
    complete_partial,
    digraph_to_dot,
    format_delegation,
    format_graph_model,
    format_points,
    format_profile,
    format_trace,
    parse_delegation,
    parse_graph_model,
    parse_move_script,
    parse_points,
    parse_profile,
    profile_digest,
)
from liquid_delegation.game.digraph import build_digraph
from liquid_delegation.game.distance import DbInstance
from liquid_delegation.game.dynamics import TokenFunction, run_dynamics
from liquid_delegation.game.gadgets import CnfInstance, build_memb_gadget
from liquid_delegation.game.profile import DelegationFunction, PreferenceProfile
from liquid_delegation.game.singlepeaked import build_auxiliary, mindis_sp


class TestProfileDocuments:
    def test_stored_line_profile(self, data_dir: Path, four_on_a_line: PreferenceProfile) -> None:
        document = parse_profile((data_dir / "line.profile").read_text())
        assert document.profile == four_on_a_line
        assert document.tags == ("sp",)
        assert not document.partial

    def test_partial_profile_is_completed(self, data_dir: Path, ird_cycle_profile: PreferenceProfile) -> None:
        document = parse_profile((data_dir / "ird_cycle.profile").read_text())
        assert document.partial
        assert document.profile == ird_cycle_profile

    def test_completion_orders_the_rest_by_distance(self) -> None:
        assert complete_partial(5, 3, [5], abstainer=True) == [5, 0, 3, 2, 4, 1]

    def test_format_then_parse_keeps_tags_and_roles(self, three_cycle: PreferenceProfile) -> None:
        text = format_profile(three_cycle, tags=("sym",), roles={1: "x1t"})
        assert text.splitlines()[:2] == ["profile 3 sym", "# role 1: x1t"]
        document = parse_profile(text)
        assert document.profile == three_cycle
        assert document.roles == {1: "x1t"}

    def test_partial_form_lists_only_acceptable_gurus(self, ird_cycle_profile: PreferenceProfile) -> None:
        lines = format_profile(ird_cycle_profile, partial=True).splitlines()
        assert lines[0] == "profile 4 partial"
        assert lines[1] == "1: voter acc: 2 > 4"

    @pytest.mark.parametrize(
        "text, line_number",
        [
            ("voters 2\n", 1),
            ("profile 2 tree\n", 1),
            ("profile 2\n1: 1 > 0 > 2\n1: 1 > 0 > 2\n", 3),
            ("profile 2\n1: 1 > 0\n", 2),
            ("profile 2\n1: 1 > 0 > 2\n2: voter acc: 1\n", 3),
            ("profile 2\n# note\n3: 1 > 0 > 2\n", 3),
            ("profile 2\n1: 1 > 0 > 2\n", 2),
        ],
    )
    def test_errors_carry_the_line_number(self, text: str, line_number: int) -> None:
        with pytest.raises(DocumentFormatError) as excinfo:
            parse_profile(text)
        assert excinfo.value.line_number == line_number

    def test_digest_depends_only_on_the_orders(self, three_cycle: PreferenceProfile) -> None:
        tagged = parse_profile(format_profile(three_cycle, tags=("sp",))).profile
        assert profile_digest(tagged) == profile_digest(three_cycle)


class TestDelegationDocuments:
    def test_stored_equilibrium(self, data_dir: Path) -> None:
        d = parse_delegation((data_dir / "line_equilibrium.delegation").read_text(), 4)
        assert d.targets == (1, 4, 1, 4)
        assert format_delegation(d) == "1: 1\n2: 4\n3: 1\n4: 4\n"

    def test_missing_voter(self) -> None:
        with pytest.raises(DocumentFormatError):
            parse_delegation("1: 1\n", 2)

    @pytest.mark.parametrize("text", ["1 1\n", "1: 5\n", "1: 1\n1: 0\n"])
    def test_malformed_lines(self, text: str) -> None:
        with pytest.raises(DocumentFormatError, match="line"):
            parse_delegation(text, 2)


class TestTraceDocuments:
    def test_best_response_trace(self, brd_worst_case: PreferenceProfile) -> None:
        trace = run_dynamics(
            brd_worst_case,
            DelegationFunction.everyone_votes(3),
            TokenFunction.scripted([1, 2, 3, 2, 3, 1, 1, 3, 2]),
        )
        lines = format_trace(brd_worst_case, trace).splitlines()
        assert lines[0] == "0,-,-,{1 2 3},dis=4;maxvp=1;abst=0"
        assert lines[1] == "1,1,2,{2 3},dis=3;maxvp=2;abst=0"
        assert lines[9] == "9,2,1,{1 3},dis=2;maxvp=2;abst=0"
        assert lines[-1] == "# verdict: converged t*=9 round=3"

    def test_move_script(self, data_dir: Path) -> None:
        movers, moves = parse_move_script((data_dir / "ird_cycle.script").read_text())
        assert movers == (1, 2, 1, 3, 2, 4, 3, 1, 4)
        assert moves == (2, 3, 1, 4, 2, 1, 3, 2, 4)

    def test_trace_output_replays_as_a_script(self, brd_worst_case: PreferenceProfile) -> None:
        trace = run_dynamics(brd_worst_case, DelegationFunction.everyone_votes(3), TokenFunction.round_robin(3))
        movers, moves = parse_move_script(format_trace(brd_worst_case, trace))
        assert movers == trace.movers
        assert moves == trace.moves

    def test_steps_must_be_consecutive(self) -> None:
        with pytest.raises(DocumentFormatError) as excinfo:
            parse_move_script("1,1,2\n3,2,1\n")
        assert excinfo.value.line_number == 2


class TestDistanceDocuments:
    def test_points_file(self, five_points: DbInstance, data_dir: Path) -> None:
        body = [line for line in (data_dir / "five_points.points").read_text().splitlines() if not line.startswith("#")]
        assert format_points(five_points).splitlines() == body

    @pytest.mark.parametrize(
        "text, message",
        [
            ("1 0 1 2\n", "abstainer flag"),
            ("1 0 1 2 0\n1 0 0 1 0\n", "twice"),
            ("1 0 1 2 0\n3 0 0 1 0\n", "1..2"),
            ("1 0 1 2 0\n2 0 1\n", "expected"),
            ("1 0 1 2 0\n2 0 0 0 1 0\n", "coordinates"),
        ],
    )
    def test_points_errors(self, text: str, message: str) -> None:
        with pytest.raises(DocumentFormatError, match=message):
            parse_points(text)

    def test_graph_model_of_the_membership_gadget(self) -> None:
        gadget = build_memb_gadget(CnfInstance(n_u=1, clauses=((1, 1, 1),)))
        text = format_graph_model(gadget.db)
        assert text.splitlines()[-1] == "thresholds: 1 1 1 1 2"
        assert parse_graph_model(text).profile() == gadget.profile

    def test_graph_model_needs_thresholds(self) -> None:
        with pytest.raises(DocumentFormatError, match="thresholds"):
            parse_graph_model("1 2\n")

    def test_points_models_are_not_edge_lists(self, five_points: DbInstance) -> None:
        with pytest.raises(InvalidInputError):
            format_graph_model(five_points)


class TestDotAndResults:
    def test_digraph_dot(self, four_on_a_line: PreferenceProfile) -> None:
        lines = digraph_to_dot(build_digraph(four_on_a_line)).splitlines()
        assert lines[0] == "digraph acceptability {"
        assert "  1 -> 2;" in lines
        assert "  4 -> 3;" in lines

    def test_auxiliary_dot_labels(self, four_on_a_line: PreferenceProfile) -> None:
        text = auxiliary_to_dot(build_auxiliary(four_on_a_line))
        assert '  "1" -> "4" [label="3/0/1/1"];' in text
        assert '  "4" -> "t" [label="1/' in text
        assert "label=" not in auxiliary_to_dot(build_auxiliary(four_on_a_line, weights=False))

    def test_result_document_round_trips_the_delegation(self, four_on_a_line: PreferenceProfile) -> None:
        result = ResultDocument.from_outcome(four_on_a_line, mindis_sp(four_on_a_line), method="interval")
        assert result.delegation_function().targets == (1, 4, 1, 4)
        assert result.diagnostics == {"method": "interval"}
        parsed = ResultDocument.model_validate_json(result.model_dump_json())
        assert parsed.delegation == {1: 1, 2: 4, 3: 1, 4: 4}
