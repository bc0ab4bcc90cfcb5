import itertools
import math
from collections import Counter

import numpy as np
import pytest

from liftmatch.counting import (count_k_cycles, count_perfect_matchings,
                                count_perfect_matchings_bruteforce, count_perfect_matchings_dp,
                                permanent)
from liftmatch.graph import banana, cube, cycle_graph, k4, petersen
from liftmatch.laplace import BudgetExceeded
from liftmatch.lifts import sample_lift

from oracles import perfect_matchings


@pytest.mark.parametrize("count", [count_perfect_matchings, count_perfect_matchings_dp])
def test_small_examples(count):
    assert count(4, k4().edges) == 3
    assert count(2, banana(3).edges) == 3
    assert count(6, cycle_graph(6).edges) == 2
    assert count(10, petersen().edges) == 6
    assert count(3, cycle_graph(3).edges) == 0
    assert count(0, []) == 1
    assert count(8, list(k4().edges) + [(a + 4, b + 4) for a, b in k4().edges]) == 9
    assert count(5, list(k4().edges)) == 0


def test_permanent_small():
    assert permanent([[1, 1], [1, 1]]) == 2
    assert permanent(np.ones((4, 4), dtype=int)) == 24
    assert permanent([[2, 0], [1, 3]]) == 6


def _biadjacency(lift):
    n = lift.n
    B = [[0] * n for _ in range(n)]
    for u, v in lift.edges:
        a, b = min(u, v), max(u, v)
        B[a][b - n] += 1
    return B


def test_counter_matches_permanent_on_bipartite_lifts():
    cases = 0
    for seed in range(25):
        for G in (banana(3), banana(4)):
            n = 3 + seed % 8  # up to 20 vertices
            lift = sample_lift(G, n, seed)
            assert count_perfect_matchings_dp(lift.num_vertices, lift.edges) == permanent(_biadjacency(lift))
            cases += 1
    assert cases == 50


def test_counter_matches_brute_force_on_general_lifts():
    for seed in range(50):
        G = (k4(), petersen(), cube())[seed % 3]
        n = 1 + seed % (5 if G.g == 4 else 2)
        lift = sample_lift(G, n, seed)
        N = lift.num_vertices
        assert N <= 20
        assert count_perfect_matchings_dp(N, lift.edges) == count_perfect_matchings_bruteforce(N, lift.edges)


def test_brute_force_counter_against_listing():
    lift = sample_lift(k4(), 3, 0)
    assert count_perfect_matchings_bruteforce(12, lift.edges) == len(perfect_matchings(12, lift.edges))


def test_odd_vertex_count_is_zero():
    lift = sample_lift(cycle_graph(3), 5, 2)
    assert count_perfect_matchings(lift.num_vertices, lift.edges) == 0


def test_large_counts_stay_exact():
    # a path on 16 vertices whose edges carry 1000 parallel copies: one matching shape
    m, k = 1000, 8
    edges = [(i, i + 1) for i in range(2 * k - 1) for _ in range(m)]
    assert count_perfect_matchings_dp(2 * k, edges) == m**k
    assert count_perfect_matchings(2 * k, edges) == m**k


def test_frontier_budget():
    lift = sample_lift(k4(), 30, 0)
    with pytest.raises(BudgetExceeded):
        count_perfect_matchings(lift.num_vertices, lift.edges, max_frontier=5)


def _cycles_oracle(num_vertices, edges, kmax):
    mult = Counter()
    for u, v in edges:
        mult[(u, v)] += 1
        mult[(v, u)] += 1
    out = [sum(math.comb(m, 2) for (u, v), m in mult.items() if u < v)]
    for k in range(3, kmax + 1):
        total = 0
        for seq in itertools.permutations(range(num_vertices), k):
            total += math.prod(mult[(seq[i], seq[(i + 1) % k])] for i in range(k))
        out.append(total // (2 * k))
    return out


def test_cycle_examples():
    assert count_k_cycles(4, k4().edges, 4) == [0, 4, 3]
    assert count_k_cycles(2, banana(3).edges, 4) == [3, 0, 0]
    assert count_k_cycles(6, cycle_graph(6).edges, 8) == [0, 0, 0, 0, 1, 0, 0]
    assert count_k_cycles(10, petersen().edges, 6)[3:] == [12, 10]


@pytest.mark.parametrize("G, n", [(k4(), 2), (banana(3), 4), (banana(4), 3), (cycle_graph(5), 2)])
def test_cycles_against_tuple_oracle(G, n):
    for seed in range(3):
        lift = sample_lift(G, n, seed)
        assert count_k_cycles(lift.num_vertices, lift.edges, 5) == _cycles_oracle(lift.num_vertices, lift.edges, 5)


def test_cycle_budget():
    with pytest.raises(BudgetExceeded):
        count_k_cycles(4, k4().edges, 13)


def test_loops_rejected():
    with pytest.raises(ValueError):
        count_perfect_matchings(2, [(0, 0)])
