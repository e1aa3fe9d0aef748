import itertools
import random
from fractions import Fraction as F

import pytest

from aifvmc.core import (
    ProblemSpec,
    StateSpec,
    chain_cost,
    eval_h,
    multi_typed_intersection,
    stationary_distribution,
)
from aifvmc.errors import BudgetExceeded
from aifvmc.generate import random_problem
from aifvmc.oracle import (
    brute_force_min,
    exhaustive_roundtrip,
    grid_points,
    gth_stationary,
    oracle_cost,
    relative_values,
    sample_height,
    scan_h,
)
from aifvmc.solver import solve_iterative

from conftest import A


def test_four_chain_oracle(four_chain):
    report = brute_force_min(four_chain)
    assert report.best_chain == (1, 1) and report.best_cost == F(6, 5)
    assert report.all_costs == [F(4, 3), F(5, 4), F(9, 7), F(6, 5)]
    assert report.best_cost == min(report.all_costs)


def test_single_chain_oracle():
    p = ProblemSpec(2, ((A,), (A,)))
    assert brute_force_min(p).best_chain == (0, 0)


def test_ties_go_to_the_smallest_chain():
    p = ProblemSpec(2, ((A, A), (A, A)))
    assert brute_force_min(p).best_chain == (0, 0)


def test_budget_refusal(four_chain):
    with pytest.raises(BudgetExceeded):
        brute_force_min(four_chain, budget=3)


def test_gth_matches_balance_equations():
    rng = random.Random(8)
    for _ in range(300):
        p = random_problem(rng)
        chain = p.chain([rng.randrange(n) for n in p.sizes])
        assert tuple(gth_stationary([s.q for s in chain])) == stationary_distribution(chain)
        assert oracle_cost(chain) == chain_cost(chain) == multi_typed_intersection(chain).y


def test_every_enumerated_chain_agrees_two_ways(four_chain):
    for idx in itertools.product(*(range(n) for n in four_chain.sizes)):
        chain = four_chain.chain(idx)
        assert oracle_cost(chain) == multi_typed_intersection(chain).y


def test_sample_height(four_chain):
    grid = grid_points([F(0)], [F(1)], 5)
    assert F(3, 5) in {x[0] for x in grid}
    assert sample_height(four_chain, grid) == F(6, 5)
    assert sample_height(four_chain, []) is None
    y = solve_iterative(four_chain).cost
    assert sample_height(four_chain, grid_points([F(-2)], [F(3)], 7)) <= y


def test_grid_points():
    assert grid_points([F(0), F(0)], [F(1), F(1)], 0) == [(F(0), F(0))]
    assert len(grid_points([F(0), F(0)], [F(1), F(1)], 4)) == 25


def test_height_bound_on_random_problems():
    rng = random.Random(13)
    for _ in range(50):
        p = random_problem(rng, m=rng.choice((2, 3)))
        y = solve_iterative(p).cost
        grid = grid_points([F(-1)] * (p.m - 1), [F(2)] * (p.m - 1), 6)
        assert sample_height(p, grid) <= y


def test_roundtrip_oracle(example_code):
    report = exhaustive_roundtrip(example_code, 4)
    assert report.ok and report.checked == sum(4 ** i for i in range(5))
    assert exhaustive_roundtrip(example_code, 0).checked == 1
    with pytest.raises(BudgetExceeded):
        exhaustive_roundtrip(example_code, 6, budget=100)


def test_top_point_skips_cheapest_chains_above_the_surface():
    # type 0 never visits type 1, so both chains cost 15/4 but meet at different x
    zero = StateSpec(F(15, 4), (F(1), F(0)))
    p = ProblemSpec(2, ((zero,), (StateSpec(F(1, 4), (F(1), F(0))), StateSpec(F(3, 4), (F(3, 4), F(1, 4))))))
    report = brute_force_min(p)
    assert report.all_costs == [F(15, 4), F(15, 4)] and report.best_chain == (0, 0)
    assert multi_typed_intersection(p.chain((0, 0))).x == (F(-7, 2),)
    assert report.top_chain == (0, 1) and report.top_point == ((F(-4),), F(15, 4))
    assert solve_iterative(p).point == multi_typed_intersection(p.chain((0, 1)))


def test_top_point_on_random_problems():
    rng = random.Random(17)
    for _ in range(200):
        p = random_problem(rng)
        report = brute_force_min(p)
        it = solve_iterative(p)
        assert report.top_point == (it.point.x, it.point.y)
        assert relative_values(p.chain(report.top_chain), report.best_cost) == it.point.x
        assert scan_h(p, it.point.x) == eval_h(it.point.x, p)
