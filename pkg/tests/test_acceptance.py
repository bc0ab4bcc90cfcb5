"""Acceptance criteria 1-10.

Each check returns ``(passed, detail)``; the tests record one PASS/FAIL line
per criterion, shown in the terminal summary, and then assert.  Running this
file directly prints the same lines without pytest.
"""

import math
import time
from fractions import Fraction

import pytest

from liftmatch.first_moment import asymptotic_first_moment, exact_first_moment, ratio_to_estimate
from liftmatch.graph import banana, k4, petersen, prism3
from liftmatch.lattice import first_moment_lattice, second_moment_lattice
from liftmatch.lifts import compare_with_limit, exhaustive_lift_oracle, monte_carlo_moments
from liftmatch.nbwalks import (a4_check, cycle_series, sample_limit_W, ssc_constant,
                               walk_counts_spectral, walk_counts_trace)
from liftmatch.second_moment import asymptotic_second_moment, exact_second_moment

RESEED_OFFSET = 1_000_003
SIM_SEED = 7


def rel(a, b):
    return abs(a - b) / abs(b)


def criterion_1():
    t = time.perf_counter()
    bad = []
    for G, ns in ((banana(3), (1, 2, 3)), (k4(), (1, 2, 3))):
        for n in ns:
            o = exhaustive_lift_oracle(G, n, reduce=False)
            if o.EX != exact_first_moment(G, n):
                bad.append(f"{G.name} n={n}")
    dt = time.perf_counter() - t
    return not bad and dt < 60, f"mismatches={bad or 'none'} time={dt:.1f}s (limit 60s)"


def criterion_2():
    t = time.perf_counter()
    bad = []
    for G, ns in ((banana(3), (1, 2, 3)), (k4(), (1, 2))):
        for n in ns:
            o = exhaustive_lift_oracle(G, n, reduce=False)
            if o.EX2 != exact_second_moment(G, n):
                bad.append(f"{G.name} n={n}")
    dt = time.perf_counter() - t
    return not bad and dt < 300, f"mismatches={bad or 'none'} time={dt:.1f}s (limit 300s)"


def criterion_3():
    got = {
        "L1(K4)": first_moment_lattice(k4()).lattice,
        "L1(K2^3)": first_moment_lattice(banana(3)).lattice,
        "L2(K4)": second_moment_lattice(k4()).lattice,
        "L2(K2^3)": second_moment_lattice(banana(3)).lattice,
    }
    want = {"L1(K4)": (2, 12), "L1(K2^3)": (2, 3),
            "L2(K4)": (14, 2**14 * 3**5 * 5**3), "L2(K2^3)": (9, 2**8 * 3**3)}
    ok = all((got[k].rank, got[k].vol_squared) == (r, Fraction(v)) for k, (r, v) in want.items())
    detail = ", ".join(f"{k}: rank {got[k].rank} vol^2 {got[k].vol_squared}" for k in want)
    return ok, detail


def criterion_4():
    t = time.perf_counter()
    a = asymptotic_second_moment(k4()).estimate.det_neg_H_restricted
    b = asymptotic_second_moment(banana(3)).estimate.det_neg_H_restricted
    ra = rel(a, 2.0**-22 * 3.0**28 / 5 * 11**3)
    rb = rel(b, 2.0**-16 * 3.0**18 * 5**2)
    dt = time.perf_counter() - t
    return max(ra, rb) < 1e-6 and dt < 10, f"rel err K4 {ra:.2e}, K2^3 {rb:.2e}, time={dt:.2f}s"


def criterion_5():
    f_k4 = asymptotic_first_moment(k4()).estimate
    f_b = asymptotic_first_moment(banana(3)).estimate
    s_k4 = asymptotic_second_moment(k4()).estimate
    s_b = asymptotic_second_moment(banana(3)).estimate
    c = 8 / (3 * math.sqrt(3))
    errs = [rel(f_k4.C, c), rel(f_b.C, c * math.sqrt(math.pi)),
            rel(s_k4.C, 2**16 * 3**-4.5 / 5 * 11**-1.5), rel(s_b.C, 2**11 * 3**-4.5 / 5 * math.pi)]
    powers = (f_k4.p_total, f_b.p_total, s_k4.p_total, s_b.p_total) == (0, Fraction(1, 2), 0, 1)
    return max(errs) < 1e-6 and powers, f"max rel err {max(errs):.2e}, powers ok={powers}"


def criterion_6():
    cases = [(k4(), 2**10 * 3**-1.5 / 5 * 11**-1.5), (banana(3), 2**5 * 3**-1.5 / 5),
             (banana(4), 2**-7.5 * 3**7 * 5**-1.5)]
    errs, gaps = [], []
    for G, want in cases:
        s = ssc_constant(G)
        errs.append(rel(s.value, want))
        gaps.append(s.relative_gap)
    ok = max(errs) < 1e-9 and max(gaps) < 1e-9
    return ok, f"max rel err {max(errs):.2e}, max gap between the two paths {max(gaps):.2e}"


def criterion_7():
    reps = {G.name: a4_check(G) for G in (k4(), banana(3))}
    ok = all(r.passed for r in reps.values())
    return ok, ", ".join(f"{k}: lhs/rhs-1 = {r.relative_difference:.2e}" for k, r in reps.items())


def criterion_8():
    parts, ok = [], True
    for G in (k4(), banana(3)):
        est = asymptotic_first_moment(G).estimate
        e12 = abs(ratio_to_estimate(exact_first_moment(G, 12), est, 12) - 1)
        e96 = abs(ratio_to_estimate(exact_first_moment(G, 96), est, 96) - 1)
        ok &= e96 * 4 <= e12
        parts.append(f"{G.name}: {e12:.4f} -> {e96:.4f} (factor {e12 / e96:.2f})")
    return ok, "; ".join(parts)


def criterion_9():
    ok = True
    for G in (k4(), banana(3), petersen(), prism3()):
        ok &= walk_counts_trace(G, 12) == walk_counts_spectral(G, 12)
    lam3 = cycle_series(k4(), 6).lam[1]
    lam2 = cycle_series(banana(3), 6).lam[0]
    ok &= lam3 == 4 and lam2 == 3
    return ok, f"paths agree for k<=12 on 4 graphs, lambda_3(K4)={lam3:g}, lambda_2(K2^3)={lam2:g}"


def _simulation_checks(seed):
    out = {}
    cs = cycle_series(k4(), 20)
    rep = monte_carlo_moments(k4(), 30, 2000, 6, seed, dict(zip(cs.ks, cs.lam)), dict(zip(cs.ks, cs.mu)))
    out["E[Z3](K4)"] = rep.EZ[3]
    out["Var[Z3](K4)"] = rep.VarZ[3]
    out["E[XZ3]/E[X](K4)"] = rep.XZ_ratio[3]
    ks = compare_with_limit(rep.X, float(exact_first_moment(k4(), 30)), sample_limit_W(cs, 100_000, seed))
    cb = cycle_series(banana(3), 20)
    repb = monte_carlo_moments(banana(3), 30, 2000, 6, seed, dict(zip(cb.ks, cb.lam)), dict(zip(cb.ks, cb.mu)))
    out["E[Z2](K2^3)"] = repb.EZ[2]
    ok = all(e.within(3.0) for e in out.values())
    detail = ", ".join(f"{k}={e.value:.4f}±{e.se:.4f} (z={e.z:+.2f})" for k, e in out.items())
    detail += (f"; heuristic KS vs W: D={ks['statistic']:.4f} crit={ks['critical']:.4f} "
               f"{'consistent' if ks['pass'] else 'INCONSISTENT'}")
    return ok and ks["pass"], detail


def criterion_10():
    t = time.perf_counter()
    ok, detail = _simulation_checks(SIM_SEED)
    if not ok:
        ok, detail = _simulation_checks(SIM_SEED + RESEED_OFFSET)
        detail += " [after reseed]"
    dt = time.perf_counter() - t
    return ok and dt < 600, f"{detail}; time={dt:.0f}s (limit 600s)"


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10}


def line(k, ok, detail):
    return f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"


def _check(k):
    from conftest import ACCEPTANCE_LINES

    ok, detail = CRITERIA[k]()
    text = line(k, ok, detail)
    print(text)
    ACCEPTANCE_LINES.append(text)
    assert ok, text


@pytest.mark.parametrize("k", range(1, 10))
def test_criterion(k):
    _check(k)


@pytest.mark.stochastic
@pytest.mark.slow
def test_criterion_10_simulation():
    _check(10)


if __name__ == "__main__":
    for k, fn in CRITERIA.items():
        print(line(k, *fn()), flush=True)
