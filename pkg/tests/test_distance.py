import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from liquid_delegation.errors import ClassMismatchError, InvalidInputError
from liquid_delegation.game.digraph import build_digraph, enumerate_kernels
from liquid_delegation.game.distance import (
    DbInstance,
    DistanceModel,
    ThresholdVector,
    build_db_profile,
    check_threshold_consistency,
    encode_symmetric,
    solve_equilibrium_db,
)
from liquid_delegation.game.generators import random_db_instance
from liquid_delegation.game.profile import PreferenceProfile, is_nash_stable

PROPERTY_SETTINGS = settings(
    max_examples=150,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)

_DB_INSTANCES = st.builds(
    lambda n, seed: random_db_instance(n, np.random.default_rng(seed)),
    st.integers(min_value=1, max_value=9),
    st.integers(min_value=0, max_value=2**32 - 1),
)


class TestDistanceModel:
    def test_points_give_euclidean_distances(self, five_points: DbInstance) -> None:
        model = five_points.model
        assert model.source == "points"
        assert model.distance(1, 2) == pytest.approx(1.0)
        assert model.distance(1, 4) == pytest.approx(np.sqrt(5))

    def test_graph_distances_are_hop_counts(self) -> None:
        model = DistanceModel.from_graph(4, [(1, 2), (2, 3)])
        assert model.distance(1, 3) == 2
        assert model.distance(1, 4) == np.inf
        assert model.source == "graph"

    def test_graph_edges_must_name_voters(self) -> None:
        with pytest.raises(InvalidInputError, match="outside"):
            DistanceModel.from_graph(2, [(1, 3)])

    @pytest.mark.parametrize(
        "matrix, message",
        [
            ([[0, 1, 2], [1, 0, 1]], "square"),
            ([[0, -1], [-1, 0]], "non-negative"),
            ([[0, 1], [2, 0]], r"\(1, 2\)"),
            ([[1, 1], [1, 0]], "dist"),
        ],
    )
    def test_matrix_validation(self, matrix, message: str) -> None:
        with pytest.raises(InvalidInputError, match=message):
            DistanceModel.from_matrix(matrix)

    def test_thresholds_must_be_non_negative(self) -> None:
        with pytest.raises(ValueError, match="voter 2"):
            ThresholdVector(values=(1.0, -0.5))


class TestDistanceBasedProfile:
    def test_acceptable_sets_of_the_five_points(self, five_points: DbInstance) -> None:
        profile = five_points.profile()
        assert set(profile.acceptable(1)) == {2, 3, 5}
        assert set(profile.acceptable(2)) == {1, 3, 5}
        assert set(profile.acceptable(3)) == {1, 2, 4, 5}
        assert profile.acceptable(4) == (3,)
        assert set(profile.acceptable(5)) == {1, 3}

    def test_acceptable_gurus_are_ordered_by_distance_then_index(self, five_points: DbInstance) -> None:
        assert five_points.profile().acceptable(1) == (2, 5, 3)

    def test_abstainer_flags_put_abstention_above_voting(self, five_points: DbInstance) -> None:
        profile = build_db_profile(five_points.model, five_points.thresholds, abstainers=[4])
        assert profile.abstainers == frozenset({4})

    def test_unknown_abstainers_are_rejected(self, five_points: DbInstance) -> None:
        with pytest.raises(InvalidInputError, match="unknown voters"):
            build_db_profile(five_points.model, five_points.thresholds, abstainers=[6])

    def test_threshold_count_must_match(self, five_points: DbInstance) -> None:
        with pytest.raises(InvalidInputError, match="thresholds"):
            build_db_profile(five_points.model, ThresholdVector(values=(1.0,)))


class TestThresholdConsistency:
    def test_generated_profile_is_consistent(self, five_points: DbInstance) -> None:
        profile = five_points.profile()
        assert check_threshold_consistency(profile, five_points.thresholds).consistent
        assert check_threshold_consistency(profile, five_points.thresholds, five_points.model).consistent

    def test_one_way_acceptance_needs_a_larger_threshold(self, five_points: DbInstance) -> None:
        # voter 2 accepts 5 but not conversely, so At(2) must exceed At(5)
        lowered = ThresholdVector(values=(2.0, 1.0, 2.0, 1.0, 1.0))
        report = check_threshold_consistency(five_points.profile(), lowered)
        assert not report.consistent
        assert report.witness == (2, 5)

    def test_model_check_finds_the_differing_pair(self, five_points: DbInstance) -> None:
        lowered = ThresholdVector(values=(2.0, 1.0, 2.0, 1.0, 1.0))
        report = check_threshold_consistency(five_points.profile(), lowered, five_points.model)
        assert report.witness == (2, 5)

    def test_three_cycle_fits_no_thresholds(self, three_cycle: PreferenceProfile) -> None:
        for values in [(1.0, 2.0, 3.0), (3.0, 2.0, 1.0), (1.0, 1.0, 1.0)]:
            assert not check_threshold_consistency(three_cycle, ThresholdVector(values=values)).consistent


class TestSolveEquilibriumDb:
    def test_smallest_thresholds_are_picked_first(self, five_points: DbInstance) -> None:
        outcome = solve_equilibrium_db(five_points.profile(), five_points.thresholds, five_points.model)
        assert outcome.gurus == (4, 5)
        assert is_nash_stable(five_points.profile(), outcome.delegation).stable

    def test_inconsistent_thresholds_are_refused(self, five_points: DbInstance) -> None:
        lowered = ThresholdVector(values=(2.0, 1.0, 2.0, 1.0, 1.0))
        with pytest.raises(ClassMismatchError) as excinfo:
            solve_equilibrium_db(five_points.profile(), lowered)
        assert excinfo.value.witness == (2, 5)

    def test_equilibrium_on_two_thousand_voters(self) -> None:
        instance = random_db_instance(2000, np.random.default_rng(13))
        profile = instance.profile()
        outcome = solve_equilibrium_db(profile, instance.thresholds, instance.model)
        assert is_nash_stable(profile, outcome.delegation).stable

    @PROPERTY_SETTINGS
    @given(instance=_DB_INSTANCES)
    def test_greedy_choice_is_a_kernel(self, instance: DbInstance) -> None:
        profile = instance.profile()
        outcome = solve_equilibrium_db(profile, instance.thresholds, instance.model)
        assert is_nash_stable(profile, outcome.delegation).stable
        assert outcome.gurus in enumerate_kernels(build_digraph(profile)).kernels


class TestEncodeSymmetric:
    def test_symmetric_profile_is_reproduced(self, brd_worst_case: PreferenceProfile) -> None:
        model, thresholds = encode_symmetric(brd_worst_case)
        assert model.distance(1, 3) == 2
        encoded = build_db_profile(model, thresholds)
        assert np.array_equal(encoded.acceptability_matrix, brd_worst_case.acceptability_matrix)

    def test_one_way_acceptance_is_refused(self, three_cycle: PreferenceProfile) -> None:
        with pytest.raises(ClassMismatchError):
            encode_symmetric(three_cycle)
