import math
from random import Random

import pytest
from scipy.stats import chi2

from helpers import (
    FAST_SCHEDULE,
    build_dataset,
    disjoint_dataset,
    pigeonhole_dataset,
)
from spalloc.annealer import (
    MoveKind,
    MoveState,
    Schedule,
    anneal,
    propose_and_decide,
    repair_initialize,
)
from spalloc.errors import InfeasibleAllocation, RepairTimeout
from spalloc.experiments import GeneratorConfig, generate_dataset
from spalloc.model import LINEAR, Allocation, is_feasible


class TestSchedule:
    def test_paper_defaults(self):
        s = Schedule()
        assert (s.t_start, s.t_end, s.t_step) == (5.0, 0.0, 0.001)
        assert s.attempted_budget_factor == 1000
        assert s.success_budget_factor == 100
        assert s.hard_cap_factor == 10_000

    def test_default_temperature_ladder(self):
        levels = Schedule().temperatures()
        assert len(levels) == 5001
        assert levels[0] == 5.0
        assert levels[1] == pytest.approx(4.999)
        assert levels[-1] == 0.0
        assert all(a > b for a, b in zip(levels, levels[1:]))

    def test_non_commensurate_span(self):
        levels = Schedule(t_start=1.0, t_end=0.0, t_step=0.3).temperatures()
        assert levels[0] == 1.0
        assert len(levels) == 4
        assert levels[-1] >= 0.0

    def test_single_level(self):
        assert Schedule(t_start=0.0, t_end=0.0, t_step=0.1).temperatures() == [0.0]

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"t_start": 1.0, "t_end": 2.0},
            {"t_end": -0.5},
            {"t_step": 0.0},
            {"attempted_budget_factor": 0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Schedule(**kwargs)


class TestRepair:
    def test_single_student_immediate(self):
        dataset = disjoint_dataset(1)
        allocation = repair_initialize(dataset, Random(0))
        ok, _ = is_feasible(dataset, allocation)
        assert ok

    def test_pigeonhole_times_out(self):
        dataset = pigeonhole_dataset()
        with pytest.raises(RepairTimeout):
            repair_initialize(dataset, Random(0), move_cap=2000)

    def test_feasible_instance_many_seeds(self):
        dataset = generate_dataset(
            GeneratorConfig(n_students=10, n_projects=30, n_supervisors=15, seed=5)
        )
        for seed in range(100):
            allocation = repair_initialize(dataset, Random(seed))
            ok, violations = is_feasible(dataset, allocation)
            assert ok, violations

    def test_strict_descent_on_easy_instance(self):
        dataset = disjoint_dataset(4)
        allocation = repair_initialize(dataset, Random(1), strict_descent=True)
        assert is_feasible(dataset, allocation)[0]


def single_student_dataset(n_choices):
    """One student over n_choices private projects, no binding constraints."""
    return build_dataset(
        [tuple(range(n_choices))],
        {(p, p): 0.5 for p in range(n_choices)},
        n_choices,
        n_choices,
        n_choices=n_choices,
    )


class TestProposeAndDecide:
    def test_downhill_always_accepted(self):
        dataset = single_student_dataset(2)
        rng = Random(99)
        for _ in range(10_000):
            start = Allocation((dataset.choices[0][1],))  # rank 2; only move is rank 1
            outcome, after = propose_and_decide(dataset, start, 1.0, LINEAR, rng)
            assert outcome.kind is MoveKind.ACCEPTED
            assert outcome.delta == -1.0
            assert after.assignment == (dataset.choices[0][0],)

    def test_uphill_acceptance_rate_near_exp(self):
        # Forced delta = +1 proposals at T = 1 accept at rate exp(-1).
        dataset = single_student_dataset(2)
        rng = Random(4242)
        accepted = 0
        trials = 20_000
        for _ in range(trials):
            start = Allocation((dataset.choices[0][0],))  # rank 1; only move is rank 2
            outcome, _ = propose_and_decide(dataset, start, 1.0, LINEAR, rng)
            assert outcome.delta == 1.0
            accepted += outcome.kind is MoveKind.ACCEPTED
        assert abs(accepted / trials - math.exp(-1)) < 0.02

    def test_conflict_outcome(self):
        dataset = build_dataset(
            [(0,), (1, 0)],
            {(p, p): 0.5 for p in range(2)},
            2,
            2,
            n_choices=2,
        )
        outcome, after = propose_and_decide(
            dataset, Allocation((0, 1)), 5.0, LINEAR, Random(1)
        )
        if outcome.student == 1:
            assert outcome.kind is MoveKind.REJECTED_CONFLICT
        else:
            assert outcome.kind is MoveKind.REJECTED_NO_ALTERNATIVE
        assert after.assignment == (0, 1)

    def test_overload_outcome(self):
        # Student 1's only alternative project shares a full-load supervisor
        # with student 0's fixed project.
        dataset = build_dataset(
            [(0,), (1, 2)],
            {(0, 0): 1.0, (1, 1): 0.5, (2, 0): 1.0},
            3,
            2,
            n_choices=2,
        )
        rng = Random(2)
        seen_overload = False
        for _ in range(50):
            outcome, after = propose_and_decide(
                dataset, Allocation((0, 1)), 5.0, LINEAR, rng
            )
            assert after.assignment == (0, 1)
            if outcome.student == 1:
                assert outcome.kind is MoveKind.REJECTED_OVERLOAD
                seen_overload = True
        assert seen_overload

    def test_single_choice_student_has_no_alternative(self):
        dataset = build_dataset([(0,)], {(0, 0): 0.5}, 1, 1, n_choices=1)
        outcome, after = propose_and_decide(
            dataset, Allocation((0,)), 5.0, LINEAR, Random(3)
        )
        assert outcome.kind is MoveKind.REJECTED_NO_ALTERNATIVE
        assert outcome.to_rank is None
        assert after.assignment == (0,)

    def test_rank_proposals_uniform_chi_squared(self):
        # From rank 1 of four choices, the three other ranks must be proposed
        # uniformly. Chi-squared test at p > 0.001 over 1e5 draws.
        dataset = single_student_dataset(4)
        rng = Random(7)
        state = MoveState(dataset, LINEAR, [dataset.choices[0][0]])
        counts = {2: 0, 3: 0, 4: 0}
        draws = 100_000
        for _ in range(draws):
            outcome = state.step(1e9, rng)  # huge T: everything accepted
            counts[outcome.to_rank] += 1
            # reset to rank 1
            state.assignment[0] = dataset.choices[0][0]
            state.rank_idx[0] = 0
            state.holder = [-1] * dataset.n_projects
            state.holder[dataset.choices[0][0]] = 0
            state.refresh()
        expected = draws / 3
        statistic = sum((c - expected) ** 2 / expected for c in counts.values())
        assert statistic < chi2.ppf(0.999, df=2)

    def test_student_proposals_uniform_chi_squared(self):
        dataset = disjoint_dataset(5)
        rng = Random(8)
        state = MoveState(dataset, LINEAR, [ch[0] for ch in dataset.choices])
        counts = [0] * 5
        draws = 100_000
        for _ in range(draws):
            outcome = state.step(1e9, rng)
            counts[outcome.student] += 1
        expected = draws / 5
        statistic = sum((c - expected) ** 2 / expected for c in counts)
        assert statistic < chi2.ppf(0.999, df=4)

    def test_zero_temperature_never_increases_energy(self):
        dataset = disjoint_dataset(6)
        rng = Random(11)
        state = MoveState(dataset, LINEAR, [ch[3] for ch in dataset.choices])
        energy = state.energy_raw
        for _ in range(10_000):
            state.step(0.0, rng)
            assert state.energy_raw <= energy + 1e-12
            energy = state.energy_raw

    def test_state_rejects_conflicted_start(self):
        dataset = build_dataset(
            [(0, 1), (0, 1)], {(0, 0): 0.5, (1, 0): 0.5}, 2, 1, n_choices=2
        )
        with pytest.raises(InfeasibleAllocation):
            MoveState(dataset, LINEAR, [0, 0])

    def test_state_rejects_off_list_start(self):
        dataset = disjoint_dataset(2)
        with pytest.raises(InfeasibleAllocation):
            MoveState(dataset, LINEAR, [4, 0])


class TestAnneal:
    def test_disjoint_reaches_all_first(self):
        dataset = disjoint_dataset(6)
        result = anneal(dataset, LINEAR, FAST_SCHEDULE, seed=123)
        assert result.histogram.counts == (6, 0, 0, 0)
        assert result.energy.normalized == -100.0
        ok, _ = is_feasible(dataset, result.allocation)
        assert ok

    def test_deterministic_given_seed(self):
        dataset = generate_dataset(
            GeneratorConfig(n_students=8, n_projects=20, n_supervisors=10, seed=2)
        )
        first = anneal(dataset, LINEAR, FAST_SCHEDULE, seed=77)
        second = anneal(dataset, LINEAR, FAST_SCHEDULE, seed=77)
        assert first == second

    def test_seeds_differ(self):
        dataset = generate_dataset(
            GeneratorConfig(n_students=8, n_projects=20, n_supervisors=10, seed=2)
        )
        a = anneal(dataset, LINEAR, FAST_SCHEDULE, seed=1)
        b = anneal(dataset, LINEAR, FAST_SCHEDULE, seed=2)
        assert a.counters != b.counters or a.series != b.series

    def test_verified_loop_matches_fast_loop(self):
        # The inlined hot loop and the step-by-step reference must agree
        # exactly, random draw for random draw.
        dataset = generate_dataset(
            GeneratorConfig(n_students=6, n_projects=15, n_supervisors=8, seed=4)
        )
        schedule = Schedule(
            t_start=2.0,
            t_end=0.0,
            t_step=0.25,
            attempted_budget_factor=60,
            success_budget_factor=10,
            hard_cap_factor=200,
        )
        fast = anneal(dataset, LINEAR, schedule, seed=31)
        verified = anneal(dataset, LINEAR, schedule, seed=31, verify_every_move=True)
        assert fast == verified

    def test_series_matches_schedule_and_final_energy(self):
        dataset = disjoint_dataset(4)
        result = anneal(dataset, LINEAR, FAST_SCHEDULE, seed=5)
        temps = [t for t, _ in result.series]
        assert temps == FAST_SCHEDULE.temperatures()
        assert result.series[-1][1] == result.energy.normalized

    def test_counters_cover_all_attempts(self):
        dataset = generate_dataset(
            GeneratorConfig(n_students=5, n_projects=12, n_supervisors=6, seed=9)
        )
        result = anneal(dataset, LINEAR, FAST_SCHEDULE, seed=6)
        c = result.counters
        assert c.attempted == (
            c.accepted
            + c.rejected_conflict
            + c.rejected_overload
            + c.rejected_metropolis
            + c.rejected_no_alternative
        )
        assert c.attempted >= 150 * 5 * len(FAST_SCHEDULE.temperatures())

    def test_infeasible_instance_propagates(self):
        with pytest.raises(RepairTimeout):
            anneal(pigeonhole_dataset(), LINEAR, FAST_SCHEDULE, seed=1)

    def test_progress_callback_sees_every_level(self):
        dataset = disjoint_dataset(2)
        seen = []
        schedule = Schedule(
            t_start=1.0, t_end=0.0, t_step=0.5,
            attempted_budget_factor=10, success_budget_factor=1, hard_cap_factor=50,
        )
        anneal(dataset, LINEAR, schedule, seed=3, progress=lambda t, e: seen.append(t))
        assert seen == schedule.temperatures()
