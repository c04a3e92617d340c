import itertools
from typing import List, Sequence

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from liquid_delegation.errors import ClassMismatchError
from liquid_delegation.game.digraph import AcceptabilityDigraph, build_digraph, enumerate_kernels, is_kernel
from liquid_delegation.game.generators import random_sp_profile
from liquid_delegation.game.oracle import solve_by_enumeration
from liquid_delegation.game.profile import ABSTAIN, PreferenceProfile, is_nash_stable, resolve_gurus
from liquid_delegation.game.singlepeaked import (
    AxisProfile,
    build_auxiliary,
    check_single_peaked,
    enumerate_paths,
    interval_catch_form,
    memb_sp,
    minabst_sp,
    mindis_sp,
    minmaxvp_sp,
    solve_equilibrium_sp,
)

PROPERTY_SETTINGS = settings(
    max_examples=120,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)

_SP_PROFILES = st.builds(
    lambda n, seed: random_sp_profile(n, np.random.default_rng(seed)),
    st.integers(min_value=1, max_value=9),
    st.integers(min_value=0, max_value=2**32 - 1),
)

_SMALL_SP_PROFILES = st.builds(
    lambda n, seed: random_sp_profile(n, np.random.default_rng(seed)),
    st.integers(min_value=1, max_value=7),
    st.integers(min_value=0, max_value=2**32 - 1),
)

_WIDE_SP_PROFILES = st.builds(
    lambda n, seed: random_sp_profile(n, np.random.default_rng(seed)),
    st.integers(min_value=1, max_value=12),
    st.integers(min_value=0, max_value=2**32 - 1),
)


def _between(graph: AcceptabilityDigraph, low: int, high: int) -> List[int]:
    return [v for v in graph.vertices if low <= v <= high]


def _segments(graph: AcceptabilityDigraph, members: Sequence[int]) -> List[List[int]]:
    """Vertices up to the first member, between consecutive members, and from the last member on."""
    cuts = [1, *sorted(members), graph.n]
    return [_between(graph, low, high) for low, high in zip(cuts, cuts[1:])]


class TestSinglePeakedCheck:
    def test_line_profile_is_single_peaked(self, four_on_a_line: PreferenceProfile) -> None:
        assert check_single_peaked(four_on_a_line).ok

    def test_three_cycle_violation_names_the_skipped_voter(self, three_cycle: PreferenceProfile) -> None:
        verdict = check_single_peaked(three_cycle)
        assert not verdict.ok
        assert verdict.violation == (3, 2, 1)

    def test_axis_profile_refuses_other_profiles(self, three_cycle: PreferenceProfile) -> None:
        with pytest.raises(ClassMismatchError) as excinfo:
            AxisProfile(three_cycle)
        assert excinfo.value.witness == (3, 2, 1)

    def test_self_and_abstention_may_sit_anywhere(self) -> None:
        profile = PreferenceProfile([[0, 2, 3, 1], [3, 1, 2, 0], [2, 0, 3, 1]])
        assert check_single_peaked(profile).ok


class TestIntervalCatchForm:
    def test_intervals_of_the_line_profile(self, four_on_a_line: PreferenceProfile) -> None:
        form = interval_catch_form(four_on_a_line)
        assert form.left == (1, 2, 1, 3)
        assert form.right == (2, 4, 3, 4)
        assert form.interval(2) == (2, 4)

    def test_abstainers_are_dropped_and_positions_reindexed(self) -> None:
        # voter 2 abstains; voters 1 and 3 accept each other across it
        profile = PreferenceProfile([[2, 3, 1, 0], [0, 2, 1, 3], [2, 1, 3, 0]])
        form = interval_catch_form(profile)
        assert form.originals == (1, 3)
        assert form.left == (1, 1)
        assert form.right == (2, 2)

    @PROPERTY_SETTINGS
    @given(profile=_SP_PROFILES)
    def test_out_neighbourhoods_are_the_intervals(self, profile: PreferenceProfile) -> None:
        graph = build_digraph(profile)
        form = interval_catch_form(profile)
        assert form.originals == graph.vertices
        for position, voter in enumerate(form.originals, start=1):
            left, right = form.interval(position)
            assert left <= position <= right
            expected = tuple(form.originals[q - 1] for q in range(left, right + 1) if q != position)
            assert graph.successors(voter) == expected

    @PROPERTY_SETTINGS
    @given(profile=_SMALL_SP_PROFILES)
    def test_kernels_glue_from_their_segments(self, profile: PreferenceProfile) -> None:
        graph = build_digraph(profile)
        for size in range(1, len(graph.vertices) + 1):
            for members in itertools.combinations(graph.vertices, size):
                glued = all(
                    is_kernel(graph.induced(segment), set(members) & set(segment)).is_kernel
                    for segment in _segments(graph, members)
                )
                assert is_kernel(graph, members).is_kernel == glued


class TestAuxiliaryDigraph:
    def test_arcs_of_the_line_profile(self, four_on_a_line: PreferenceProfile) -> None:
        aux = build_auxiliary(four_on_a_line)
        assert aux.arcs() == {(0, 1), (0, 2), (1, 4), (3, 5), (4, 5)}
        assert aux.label(0) == "s"
        assert aux.label(5) == "t"

    def test_arc_weights_cover_the_voters_between(self, four_on_a_line: PreferenceProfile) -> None:
        aux = build_auxiliary(four_on_a_line)
        inner = aux.weight(1, 4)
        assert inner.dissatisfaction == 3
        assert inner.abstentions == 0
        assert (inner.vp_left, inner.vp_right) == (1, 1)
        assert aux.weight(4, 5).dissatisfaction == 1
        assert aux.weight(0, 1).dissatisfaction == 0

    def test_unweighted_graph_has_the_same_arcs(self, four_on_a_line: PreferenceProfile) -> None:
        assert build_auxiliary(four_on_a_line, weights=False).arcs() == build_auxiliary(four_on_a_line).arcs()
        assert not build_auxiliary(four_on_a_line, weights=False).has_weights

    def test_only_path_is_the_only_kernel(self, four_on_a_line: PreferenceProfile) -> None:
        assert enumerate_paths(build_auxiliary(four_on_a_line)) == [(1, 4)]

    @PROPERTY_SETTINGS
    @given(profile=_SP_PROFILES)
    def test_paths_are_exactly_the_kernels(self, profile: PreferenceProfile) -> None:
        kernels = list(enumerate_kernels(build_digraph(profile)).kernels)
        if not profile.non_abstainers:
            assert kernels == [()]
            return
        assert enumerate_paths(build_auxiliary(profile)) == kernels

    @PROPERTY_SETTINGS
    @given(profile=_WIDE_SP_PROFILES)
    def test_arcs_are_the_kernels_of_their_segment(self, profile: PreferenceProfile) -> None:
        graph = build_digraph(profile)
        aux = build_auxiliary(profile, weights=False)
        arcs = aux.arcs()

        def segment_kernel(low: int, high: int, members: Sequence[int]) -> bool:
            return is_kernel(graph.induced(_between(graph, low, high)), members).is_kernel

        for v in graph.vertices:
            assert ((aux.source, v) in arcs) == segment_kernel(1, v, [v])
            assert ((v, aux.sink) in arcs) == segment_kernel(v, graph.n, [v])
        for tail, head in itertools.combinations(graph.vertices, 2):
            assert ((tail, head) in arcs) == segment_kernel(tail, head, [tail, head])


class TestSolvers:
    def test_equilibrium_of_the_line_profile(self, four_on_a_line: PreferenceProfile) -> None:
        outcome = solve_equilibrium_sp(four_on_a_line)
        assert outcome.gurus == (1, 4)
        assert outcome.delegation.targets == (1, 4, 1, 4)

    def test_optimisers_on_the_line_profile(self, four_on_a_line: PreferenceProfile) -> None:
        assert mindis_sp(four_on_a_line).value == 4
        assert minmaxvp_sp(four_on_a_line).value == 2
        assert minabst_sp(four_on_a_line).value == 0

    def test_membership_on_the_line_profile(self, four_on_a_line: PreferenceProfile) -> None:
        assert memb_sp(four_on_a_line, 4).member
        assert memb_sp(four_on_a_line, 4).witness.gurus == (1, 4)
        assert not memb_sp(four_on_a_line, 2).member
        assert memb_sp(four_on_a_line, 2).witness is None

    def test_abstainer_is_never_a_member(self) -> None:
        profile = PreferenceProfile([[2, 3, 1, 0], [0, 2, 1, 3], [2, 1, 3, 0]])
        answer = memb_sp(profile, 2)
        assert not answer.member
        assert answer.reason == "abstainer"

    def test_everyone_abstaining_is_degenerate(self) -> None:
        profile = PreferenceProfile([[0, 1, 2], [0, 2, 1]])
        outcome = solve_equilibrium_sp(profile)
        assert outcome.degenerate
        assert outcome.delegation.targets == (0, 0)

    def test_solvers_refuse_non_single_peaked_input(self, three_cycle: PreferenceProfile) -> None:
        with pytest.raises(ClassMismatchError):
            mindis_sp(three_cycle)

    def test_equilibrium_on_two_thousand_voters(self) -> None:
        profile = random_sp_profile(2000, np.random.default_rng(11))
        outcome = solve_equilibrium_sp(profile)
        assert is_nash_stable(profile, outcome.delegation).stable

    @PROPERTY_SETTINGS
    @given(profile=_SP_PROFILES)
    def test_optimisers_match_kernel_enumeration(self, profile: PreferenceProfile) -> None:
        for problem, solver in (("mindis", mindis_sp), ("minmaxvp", minmaxvp_sp), ("minabst", minabst_sp)):
            got = solver(profile)
            assert is_nash_stable(profile, got.delegation).stable
            if profile.non_abstainers:
                assert got.value == solve_by_enumeration(profile, problem).value

    @PROPERTY_SETTINGS
    @given(profile=_SP_PROFILES)
    def test_delegators_follow_the_nearest_guru_on_one_side(self, profile: PreferenceProfile) -> None:
        for outcome in (solve_equilibrium_sp(profile), mindis_sp(profile)):
            assignment = resolve_gurus(profile, outcome.delegation)
            gurus = sorted(assignment.gurus)
            for i in profile.voters():
                guru = assignment.guru_of(i)
                if guru in (ABSTAIN, i):
                    continue
                nearest = [g for g in gurus if g < i][-1:] + [g for g in gurus if g > i][:1]
                assert guru in nearest

    @PROPERTY_SETTINGS
    @given(profile=_SP_PROFILES)
    def test_membership_matches_kernel_enumeration(self, profile: PreferenceProfile) -> None:
        kernels = enumerate_kernels(build_digraph(profile)).kernels
        for i in profile.voters():
            answer = memb_sp(profile, i)
            assert answer.member == any(i in kernel for kernel in kernels)
            if answer.member:
                assert i in answer.witness.gurus
                assert is_nash_stable(profile, answer.witness.delegation).stable
