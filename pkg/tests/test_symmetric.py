import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from liquid_delegation.errors import ClassMismatchError, InvalidInputError
from liquid_delegation.game.digraph import build_digraph, enumerate_kernels
from liquid_delegation.game.generators import random_profile, random_symmetric_profile
from liquid_delegation.game.profile import PreferenceProfile, is_nash_stable
from liquid_delegation.game.symmetric import (
    acceptability_graph,
    check_symmetric,
    greedy_independent_set,
    memb_sym,
    solve_equilibrium_sym,
)

PROPERTY_SETTINGS = settings(
    max_examples=150,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)

_SYMMETRIC_PROFILES = st.builds(
    lambda n, seed: random_symmetric_profile(n, np.random.default_rng(seed), edge_prob=0.4),
    st.integers(min_value=1, max_value=10),
    st.integers(min_value=0, max_value=2**32 - 1),
)

_MIXED_PROFILES = st.builds(
    lambda n, seed, maker: maker(n, np.random.default_rng(seed)),
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=0, max_value=2**32 - 1),
    st.sampled_from([random_profile, random_symmetric_profile]),
)


class TestCheckSymmetric:
    def test_three_cycle_is_one_way(self, three_cycle: PreferenceProfile) -> None:
        report = check_symmetric(three_cycle)
        assert not report.symmetric
        assert report.witness == (1, 2)

    def test_mutual_acceptance_is_symmetric(self, brd_worst_case: PreferenceProfile) -> None:
        assert check_symmetric(brd_worst_case).symmetric

    def test_graph_of_a_non_symmetric_profile_is_refused(self, three_cycle: PreferenceProfile) -> None:
        with pytest.raises(ClassMismatchError):
            acceptability_graph(three_cycle)

    def test_acceptability_graph_edges(self, brd_worst_case: PreferenceProfile) -> None:
        graph = acceptability_graph(brd_worst_case)
        assert {frozenset(e) for e in graph.edges()} == {frozenset({1, 2}), frozenset({2, 3})}

    @PROPERTY_SETTINGS
    @given(profile=_MIXED_PROFILES)
    def test_digraph_is_symmetric_exactly_when_the_profile_is(self, profile: PreferenceProfile) -> None:
        report = check_symmetric(profile)
        assert build_digraph(profile).is_symmetric() == report.symmetric
        if not report.symmetric:
            accepter, accepted = report.witness
            assert profile.accepts(accepter, accepted)
            assert not profile.accepts(accepted, accepter)


class TestGreedyIndependentSet:
    def test_ascending_choice_on_a_path(self) -> None:
        assert greedy_independent_set(nx.path_graph([1, 2, 3, 4])) == [1, 3]

    def test_seed_is_kept(self) -> None:
        assert greedy_independent_set(nx.path_graph([1, 2, 3, 4]), seeds=[2]) == [2, 4]

    def test_adjacent_seeds_are_rejected(self) -> None:
        with pytest.raises(InvalidInputError):
            greedy_independent_set(nx.path_graph([1, 2, 3]), seeds=[1, 2])


class TestSolvers:
    def test_equilibrium_of_the_three_voter_chain(self, brd_worst_case: PreferenceProfile) -> None:
        outcome = solve_equilibrium_sym(brd_worst_case)
        assert outcome.gurus == (1, 3)
        assert is_nash_stable(brd_worst_case, outcome.delegation).stable

    def test_membership_of_the_middle_voter(self, brd_worst_case: PreferenceProfile) -> None:
        outcome = memb_sym(brd_worst_case, 2)
        assert outcome.gurus == (2,)
        assert outcome.problem == "memb:2"
        assert is_nash_stable(brd_worst_case, outcome.delegation).stable

    def test_membership_of_an_abstainer_is_refused(self) -> None:
        profile = PreferenceProfile([[0, 1, 2], [2, 0, 1]])
        with pytest.raises(InvalidInputError, match="abstainer"):
            memb_sym(profile, 1)

    @PROPERTY_SETTINGS
    @given(profile=_SYMMETRIC_PROFILES)
    def test_generated_profiles_are_symmetric(self, profile: PreferenceProfile) -> None:
        assert check_symmetric(profile).symmetric

    @PROPERTY_SETTINGS
    @given(profile=_SYMMETRIC_PROFILES)
    def test_equilibrium_is_a_kernel(self, profile: PreferenceProfile) -> None:
        outcome = solve_equilibrium_sym(profile)
        assert is_nash_stable(profile, outcome.delegation).stable
        assert outcome.gurus in enumerate_kernels(build_digraph(profile)).kernels

    @PROPERTY_SETTINGS
    @given(profile=_SYMMETRIC_PROFILES)
    def test_every_non_abstainer_is_a_guru_somewhere(self, profile: PreferenceProfile) -> None:
        for i in profile.non_abstainers:
            outcome = memb_sym(profile, i)
            assert i in outcome.gurus
            assert is_nash_stable(profile, outcome.delegation).stable
