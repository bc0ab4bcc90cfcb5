import math
from fractions import Fraction

import pytest

from liftmatch.first_moment import (MomentError, allowed_n, asymptotic_first_moment,
                                    closed_form_first_moment, exact_first_moment, fractional_pm,
                                    ratio_to_estimate, term_a1)
from liftmatch.graph import Multigraph, banana, build_matrices, cube, cycle_graph, k4, path_graph, petersen, prism3
from liftmatch.laplace import iter_coset_points
from liftmatch.lifts import all_lifts

from oracles import first_moment_profiles


def test_fractional_pm():
    assert fractional_pm(k4()) == (Fraction(1, 3),) * 6
    assert fractional_pm(banana(3)) == (Fraction(1, 3),) * 3
    assert fractional_pm(path_graph(3)) is None
    z = fractional_pm(path_graph(4))
    assert z == (1, 0, 1)


def test_fractional_pm_nonregular_half_integral():
    # triangle with a pendant path: only a half-integral point exists on the triangle
    G = Multigraph(5, ((0, 1), (1, 2), (2, 0), (2, 3), (3, 4)))
    z = fractional_pm(G)
    assert z is not None
    for v in range(G.g):
        assert sum(z[e] for e in G.incident[v]) == 1


def test_allowed_n():
    assert [allowed_n(cycle_graph(3), n) for n in range(5)] == [True, False, True, False, True]
    assert all(allowed_n(k4(), n) for n in range(5))
    assert not allowed_n(path_graph(3), 2)


def test_term_a1_examples():
    assert term_a1(k4(), 1, (1, 0, 0, 0, 0, 1)) == 1
    assert term_a1(banana(3), 3, (1, 1, 1)) == Fraction(4, 3)
    assert term_a1(k4(), 0, (0,) * 6) == 1
    with pytest.raises(MomentError):
        term_a1(k4(), 1, (1, 1, 0, 0, 0, 0))
    with pytest.raises(MomentError):
        term_a1(k4(), 1, (2, 0, 0, 0, 0, -1))


def test_exact_first_moment_small():
    assert exact_first_moment(k4(), 1) == 3
    assert exact_first_moment(banana(3), 1) == 3
    assert exact_first_moment(k4(), 0) == 1
    assert exact_first_moment(cycle_graph(3), 1) == 0


@pytest.mark.parametrize("G, n", [(banana(3), 2), (banana(3), 3), (k4(), 2), (cycle_graph(4), 3)])
def test_every_profile_term_matches_lift_enumeration(G, n):
    oracle = first_moment_profiles(G, all_lifts(G, n))
    Ahat = build_matrices(G).Ahat.tolist()
    for ell in iter_coset_points(Ahat, [1] * G.g, n):
        assert term_a1(G, n, ell) == oracle.get(ell, 0), ell
    assert sum(oracle.values()) == exact_first_moment(G, n)


def test_k4_asymptotics():
    fm = asymptotic_first_moment(k4())
    est = fm.estimate
    assert est.C == pytest.approx(8 / (3 * math.sqrt(3)), rel=1e-9)
    assert est.p_total == 0
    assert est.exp_rate == pytest.approx(2 * math.log(4 / 3), rel=1e-12)
    assert est.maximizer_status == "proven"


def test_banana_asymptotics():
    est = asymptotic_first_moment(banana(3)).estimate
    assert est.C == pytest.approx(8 / (3 * math.sqrt(3)) * math.sqrt(math.pi), rel=1e-9)
    assert est.p_total == Fraction(1, 2)
    assert est.exp_rate == pytest.approx(math.log(4 / 3), rel=1e-12)


@pytest.mark.parametrize("G", [petersen(), prism3(), cube(), banana(4)])
def test_engine_matches_closed_form(G):
    fm = asymptotic_first_moment(G)
    assert fm.relative_gap < 1e-9
    assert fm.estimate.p_total == closed_form_first_moment(G).p_total


def test_ratio_approaches_one():
    est = asymptotic_first_moment(k4()).estimate
    r = [abs(ratio_to_estimate(exact_first_moment(k4(), n), est, n) - 1) for n in (6, 12, 24)]
    assert r[0] > r[1] > r[2]


def test_asymptotics_need_regular_graph():
    with pytest.raises(MomentError):
        asymptotic_first_moment(path_graph(4))
