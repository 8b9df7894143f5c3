import math
from random import Random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import degenerate_dataset, disjoint_dataset
from spalloc.errors import EmptyCohort, RankOutOfRange, SameRank
from spalloc.model import (
    LINEAR,
    OPINION,
    Allocation,
    AllocationHistogram,
    WeightScheme,
    histogram_of,
)
from spalloc.objective import Energy, delta_energy, energy_normalized, energy_raw
from spalloc.oracle import exact_minimum


class TestEnergyRaw:
    def test_all_first(self):
        assert energy_raw(AllocationHistogram((10, 0, 0, 0)), LINEAR) == -40.0

    def test_all_fourth(self):
        assert energy_raw(AllocationHistogram((0, 0, 0, 10)), LINEAR) == -10.0

    def test_one_of_each(self):
        # 4 + 3 + 2 + 1
        assert energy_raw(AllocationHistogram((1, 1, 1, 1)), LINEAR) == -10.0

    def test_histogram_longer_than_scheme(self):
        with pytest.raises(RankOutOfRange):
            energy_raw(AllocationHistogram((1, 0, 0, 0, 1)), LINEAR)

    def test_short_histogram_ok(self):
        assert energy_raw(AllocationHistogram((2, 1)), LINEAR) == -11.0


class TestEnergyNormalized:
    @pytest.mark.parametrize("n", [1, 3, 7, 26, 997])
    @pytest.mark.parametrize("scheme", [LINEAR, OPINION], ids=["linear", "opinion"])
    def test_all_first_is_exactly_minus_100(self, n, scheme):
        hist = AllocationHistogram((n, 0, 0, 0))
        assert energy_normalized(hist, scheme, n) == -100.0

    @pytest.mark.parametrize("n", [1, 4, 5, 13])
    def test_linear_all_fourth(self, n):
        hist = AllocationHistogram((0, 0, 0, n))
        assert energy_normalized(hist, LINEAR, n) == -25.0

    def test_opinion_all_second(self):
        hist = AllocationHistogram((0, 3, 0, 0))
        expected = -100.0 * 4.15 / 4.7  # -88.297872...
        assert energy_normalized(hist, OPINION, 3) == pytest.approx(expected, abs=1e-9)

    def test_empty_cohort(self):
        with pytest.raises(EmptyCohort):
            energy_normalized(AllocationHistogram((0, 0, 0, 0)), LINEAR, 0)

    def test_matches_raw_rescaling(self):
        hist = AllocationHistogram((5, 3, 2, 1))
        energy = Energy.of(hist, OPINION)
        rescaled = 100.0 * energy.raw / (hist.total * OPINION.weights[0])
        assert energy.normalized == pytest.approx(rescaled, abs=1e-9)


class TestDeltaEnergy:
    def test_downgrade_first_to_fourth(self):
        dataset = disjoint_dataset(1)
        allocation = Allocation((dataset.choices[0][0],))
        assert delta_energy(dataset, allocation, 0, 4, LINEAR) == 3.0

    def test_upgrade_third_to_first(self):
        dataset = disjoint_dataset(1)
        allocation = Allocation((dataset.choices[0][2],))
        assert delta_energy(dataset, allocation, 0, 1, LINEAR) == -2.0

    def test_same_rank(self):
        dataset = disjoint_dataset(1)
        allocation = Allocation((dataset.choices[0][1],))
        with pytest.raises(SameRank):
            delta_energy(dataset, allocation, 0, 2, LINEAR)

    def test_rank_beyond_list(self):
        dataset = disjoint_dataset(1)
        allocation = Allocation((dataset.choices[0][0],))
        with pytest.raises(RankOutOfRange):
            delta_energy(dataset, allocation, 0, 5, LINEAR)

    def test_off_list_current_project(self):
        dataset = disjoint_dataset(2)
        allocation = Allocation((dataset.choices[1][0], dataset.choices[1][1]))
        with pytest.raises(ValueError):
            delta_energy(dataset, allocation, 0, 2, LINEAR)

    @pytest.mark.parametrize("scheme", [LINEAR, OPINION], ids=["linear", "opinion"])
    def test_telescoping_walk(self, scheme):
        # Summed single-move deltas must equal the end-to-end energy change.
        dataset = disjoint_dataset(8)
        rng = Random(20250810)
        assignment = [ch[0] for ch in dataset.choices]
        total = 0.0
        initial = energy_raw(histogram_of(dataset, Allocation(tuple(assignment))), scheme)
        for _ in range(2000):
            student = rng.randrange(8)
            current_rank = dataset.choices[student].index(assignment[student]) + 1
            new_rank = rng.choice([r for r in range(1, 5) if r != current_rank])
            total += delta_energy(
                dataset, Allocation(tuple(assignment)), student, new_rank, scheme
            )
            assignment[student] = dataset.choices[student][new_rank - 1]
        final = energy_raw(histogram_of(dataset, Allocation(tuple(assignment))), scheme)
        assert abs(total - (final - initial)) < 1e-9

    @given(
        st.integers(min_value=0, max_value=3),
        st.integers(min_value=0, max_value=3),
    )
    def test_upgrades_strictly_improve(self, rank_a, rank_b):
        # Moving any one student to a strictly better rank lowers raw energy.
        if rank_a == rank_b:
            return
        dataset = disjoint_dataset(1)
        better, worse = min(rank_a, rank_b), max(rank_a, rank_b)
        allocation = Allocation((dataset.choices[0][worse],))
        assert delta_energy(dataset, allocation, 0, better + 1, LINEAR) < 0


class TestScaleInvariance:
    def test_scaled_weights_keep_argmin_set(self):
        dataset = degenerate_dataset()
        scaled = WeightScheme(tuple(2.5 * w for w in LINEAR.weights))
        base = exact_minimum(dataset, LINEAR)
        other = exact_minimum(dataset, scaled)
        assert set(base.minima) == set(other.minima)
        assert other.minimum_raw == pytest.approx(2.5 * base.minimum_raw, abs=1e-9)
