import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare

from liftmatch.first_moment import exact_first_moment
from liftmatch.graph import banana, k4, petersen
from liftmatch.laplace import BudgetExceeded
from liftmatch.lifts import (all_lifts, compare_with_limit, exhaustive_lift_oracle,
                             monte_carlo_moments, ratio_estimate, sample_lift, variance_estimate)
from liftmatch.nbwalks import cycle_series, sample_limit_W


def test_n_one_is_the_base_graph():
    lift = sample_lift(k4(), 1, seed=4)
    assert sorted(lift.edges) == sorted(k4().edges)


def test_lift_invariants():
    for G in (k4(), banana(3), petersen()):
        lift = sample_lift(G, 7, seed=1, trial=3)
        lift.check()
        assert len(lift.edges) == G.h * 7


def test_reproducible_and_keyed():
    a = sample_lift(k4(), 10, seed=5, trial=2)
    assert a == sample_lift(k4(), 10, seed=5, trial=2)
    b = sample_lift(k4(), 10, seed=5, trial=3)
    assert a.perms != b.perms
    # each fiber depends only on (seed, trial, edge): a graph with an extra edge
    # reuses the draws of the shared edges
    c = sample_lift(banana(4), 10, seed=5, trial=2)
    d = sample_lift(banana(3), 10, seed=5, trial=2)
    assert c.perms[:3] == d.perms


@pytest.mark.stochastic
def test_uniformity_chi_square(reseed):
    G = banana(3)
    index = {lift.perms: k for k, lift in enumerate(all_lifts(G, 2))}
    assert len(index) == 8

    def check(seed):
        counts = Counter(index[sample_lift(G, 2, seed, t).perms] for t in range(8000))
        p = chisquare([counts[k] for k in range(8)]).pvalue
        return p > 0.001, p

    ok, p, _ = reseed(check, 0)
    assert ok, p


def test_oracle_examples():
    o = exhaustive_lift_oracle(k4(), 1)
    assert (o.EX, o.EX2) == (3, 9)
    assert exhaustive_lift_oracle(banana(3), 1).EX == 3
    assert exhaustive_lift_oracle(banana(3), 2).EX == exact_first_moment(banana(3), 2)


def test_oracle_reduction_is_exact():
    for G, n in [(k4(), 2), (banana(3), 3)]:
        a = exhaustive_lift_oracle(G, n, kmax=5)
        b = exhaustive_lift_oracle(G, n, kmax=5, reduce=False)
        assert (a.EX, a.EX2, a.EZ, a.EXZ) == (b.EX, b.EX2, b.EZ, b.EXZ)


def test_oracle_cycle_means():
    # two fibers of K2^3 share one edge on average, for any n
    o = exhaustive_lift_oracle(banana(3), 2, kmax=4)
    assert o.EZ[0] == 3
    assert o.EZ[1] == 0


def test_oracle_budget():
    with pytest.raises(BudgetExceeded):
        exhaustive_lift_oracle(k4(), 5)


def test_monte_carlo_requires_enough_trials():
    with pytest.raises(ValueError):
        monte_carlo_moments(k4(), 4, 10, 4, seed=0)


def test_bipartite_lifts_have_no_odd_cycles():
    rep = monte_carlo_moments(banana(3), 30, 100, 5, seed=2)
    assert all(z[1] == 0 and z[3] == 0 for z in rep.Z)
    assert rep.EZ[3].value == 0


def test_report_outputs_are_deterministic():
    cs = cycle_series(k4(), 6)
    lam = dict(zip(cs.ks, cs.lam))
    a = monte_carlo_moments(k4(), 6, 100, 4, seed=3, lam=lam)
    b = monte_carlo_moments(k4(), 6, 100, 4, seed=3, lam=lam)
    assert a.to_csv() == b.to_csv()
    assert a.to_dict() == b.to_dict()
    lines = a.to_csv().splitlines()
    assert lines[0] == "trial,X,Z2,Z3,Z4"
    assert len(lines) == 101
    assert a.EZ[3].target == 4


def test_threads_do_not_change_results():
    a = monte_carlo_moments(k4(), 8, 100, 4, seed=1)
    b = monte_carlo_moments(k4(), 8, 100, 4, seed=1, threads=2)
    assert a.X == b.X and a.Z == b.Z


def test_monte_carlo_mean_matches_exact_small_n():
    rep = monte_carlo_moments(k4(), 4, 400, 3, seed=11)
    ex = float(exact_first_moment(k4(), 4))
    assert abs(rep.EX.value - ex) <= 4 * rep.EX.se


def test_estimators_on_known_data():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    z = np.array([1.0, 1.0, 1.0, 1.0])
    r = ratio_estimate(x, z, 1.0)
    assert r.value == 1.0 and r.se == 0 and r.z == 0
    v = variance_estimate(np.array([0.0, 2.0, 0.0, 2.0]))
    assert v.value == pytest.approx(4 / 3)


def test_limit_comparison_flags_heuristic():
    cs = cycle_series(k4(), 10)
    W = sample_limit_W(cs, 2000, 1)
    out = compare_with_limit(W * 100, 100.0, sample_limit_W(cs, 5000, 2))
    assert out["heuristic"] is True
    assert out["pass"]
    bad = compare_with_limit(W * 300, 100.0, sample_limit_W(cs, 5000, 2))
    assert not bad["pass"]
