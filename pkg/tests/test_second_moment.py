import math
from fractions import Fraction

import numpy as np
import pytest

from liftmatch.first_moment import MomentError, exact_first_moment
from liftmatch.graph import banana, cycle_graph, k4, petersen, prism3
from liftmatch.laplace import iter_coset_points
from liftmatch.lattice import second_moment_constraints
from liftmatch.lifts import all_lifts
from liftmatch.second_moment import (PairLayout, asymptotic_second_moment, check_pair_config,
                                     exact_second_moment, second_moment_rhs, term_a2,
                                     verify_phi2_maximizer, vertex_block_stationary_points)

from oracles import second_moment_profiles


def _profile(G, n, triples):
    layout = PairLayout.of(G)
    ell = [0] * len(layout.index)
    for key, v in triples.items():
        ell[layout.coord[key]] = v
    return ell


def test_term_a2_identical_matchings_on_one_edge():
    G = banana(3)
    ell = _profile(G, 1, {(0, 0, 0): 1, (1, 0, 0): 1})
    assert term_a2(G, 1, ell) == 1


def test_term_a2_empty():
    G = k4()
    assert term_a2(G, 0, [0] * len(PairLayout.of(G).index)) == 1


def test_invalid_pair_config():
    G = banana(3)
    bad = _profile(G, 1, {(0, 0, 0): 1, (1, 1, 1): 1})
    with pytest.raises(MomentError):
        check_pair_config(G, 1, bad)
    with pytest.raises(MomentError):
        term_a2(G, 1, [0] * 5)


@pytest.mark.parametrize("G, n", [(banana(3), 1), (banana(3), 2), (k4(), 1), (k4(), 2)])
def test_every_pair_profile_matches_lift_enumeration(G, n):
    layout = PairLayout.of(G)
    oracle = second_moment_profiles(G, all_lifts(G, n), layout)
    C = second_moment_constraints(G)
    seen = 0
    for ell in iter_coset_points(C, second_moment_rhs(G), n):
        assert term_a2(G, n, ell) == oracle.get(ell, 0), ell
        seen += 1
    assert seen >= len(oracle)
    assert sum(oracle.values()) == exact_second_moment(G, n)


def test_exact_values():
    assert exact_second_moment(k4(), 1) == 9
    assert exact_second_moment(banana(3), 1) == 9
    assert exact_second_moment(banana(3), 2) == 39
    assert exact_second_moment(banana(3), 3) == 124
    assert exact_second_moment(k4(), 0) == 1


@pytest.mark.parametrize("G, ns", [(banana(3), range(1, 5)), (k4(), range(1, 3)),
                                   (cycle_graph(4), range(1, 4))])
def test_cauchy_schwarz(G, ns):
    for n in ns:
        assert exact_second_moment(G, n) >= exact_first_moment(G, n) ** 2


def test_k4_constants():
    est = asymptotic_second_moment(k4()).estimate
    det = 2.0**-22 * 3.0**28 / 5 * 11**3
    assert est.det_neg_H_restricted == pytest.approx(det, rel=1e-6)
    assert est.C == pytest.approx(2**16 * 3**-4.5 / 5 * 11**-1.5, rel=1e-6)
    assert est.p_total == 0
    assert est.exp_rate == pytest.approx(4 * math.log(4 / 3))


def test_banana_constants():
    est = asymptotic_second_moment(banana(3)).estimate
    assert est.det_neg_H_restricted == pytest.approx(2.0**-16 * 3**18 * 25, rel=1e-6)
    assert est.C == pytest.approx(2**11 * 3**-4.5 / 5 * math.pi, rel=1e-6)
    assert est.p_total == 1


@pytest.mark.parametrize("G", [k4(), banana(3), prism3()])
def test_cubic_maximizer(G):
    rep = verify_phi2_maximizer(G, multistart=30)
    assert rep.x0_error < 1e-9
    assert rep.status == "proven"
    assert rep.maximum.multistart_agreement
    assert rep.maximum.value == pytest.approx(G.g * math.log(4 / 3))
    assert rep.maximum.x0.shape == (len(PairLayout.of(G).index),)


def test_banana_psi_at_maximizer():
    rep = verify_phi2_maximizer(banana(3), multistart=5)
    assert rep.psi0_expected == (2 * 3) ** 6
    est = asymptotic_second_moment(banana(3)).estimate
    assert est.psi0 == pytest.approx(6.0**6, rel=1e-12)


def test_vertex_block_has_single_interior_stationary_point():
    pts = vertex_block_stationary_points(3, starts=40)
    assert len(pts) == 1
    assert np.allclose(pts[0], 1 / 9, atol=1e-9)


def test_higher_degree_marked_heuristic():
    sm = asymptotic_second_moment(banana(4), multistart=5)
    assert sm.maximizer_status == "heuristic"
