"""Acceptance suite: one PASS/FAIL line per criterion at the pinned tolerances.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import sys
import time

import numpy as np
import pytest

from hardy.cp_core import algebraic_identity_residual, cp_lower_constant, cp_value, simplified_p2_residual
from hardy.engine import hardy_weight, verify_identity
from hardy.families import (
    FamilyParams,
    classical_weight,
    copson_pair,
    copson_verify,
    copson_weight,
    fkp_weight,
    huang_ye_lhs,
    huang_ye_rhs,
    power_pair,
    power_weight,
)
from hardy.sequence import FinSeq
from hardy.stability import critical_hardy_check, muckenhoupt_constant, stability_report

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # direct execution
    ACCEPTANCE_LINES = []

SEED = 20240601


def _rng(k):
    return np.random.default_rng(np.random.SeedSequence([SEED, k]))


def _complex_seq(rng, support_max, start=1):
    m = int(rng.integers(1, support_max + 1))
    vals = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return FinSeq(np.arange(start, start + m), vals)


def _record(k, ok, detail, elapsed, budget):
    timing = f"{elapsed:.1f}s/{budget}s"
    status = "PASS" if ok else "FAIL"
    if ok and elapsed > budget:
        status = "PASS (over runtime target)"
    line = f"criterion {k}: {status} {detail} [{timing}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def crit1():
    rng = _rng(1)
    worst = 0.0
    count = 0
    pairs = {}
    for p in (1.5, 2.0, 2.5, 3.0, 4.0):
        for beta in (0.25, 0.5, (p - 1) / p, 1.0):
            for alpha in (0.0, -0.5, 1.0, 2.0):
                pairs[(p, alpha, beta)] = power_pair(FamilyParams(p, alpha, beta))
    for _ in range(1000):
        u = _complex_seq(rng, 200)
        for pair in pairs.values():
            rep = verify_identity(u, pair)
            worst = max(worst, rep.relative_residual)
            count += 1
    return worst <= 1e-9, f"max relative residual {worst:.2e} over {count} cases (tol 1e-9)"


def crit2():
    c2 = cp_lower_constant(2)
    searched = cp_lower_constant(2, 1e-8, method="search")
    ok = abs(c2.value - 1) <= 1e-6 and abs(searched.value - 1) <= 1e-6
    parts = [f"c1(2)={c2.value:.12f} search=[{searched.lower:.12f},{searched.upper:.12f}]"]
    for p in (2.5, 3.0, 4.0):
        est = cp_lower_constant(p, 1e-8)
        ok &= 0 < est.lower and est.upper <= 1 and est.width <= 1e-5
        parts.append(f"c1({p:g})={est.value:.10f} w={est.width:.1e}")
    ok &= searched.width <= 1e-5
    return ok, "; ".join(parts)


def crit3():
    ns = np.arange(1, 10**4 + 1)
    bad = 0
    gap_min = np.inf
    for p in (1.5, 2, 3, 4):
        fk, cl = fkp_weight(p, ns), classical_weight(p, ns)
        bad += int(np.sum(~(fk > cl)))
        gap_min = min(gap_min, float(np.min((fk - cl) / cl)))
    return bad == 0, f"{bad} violations; min relative gap {gap_min:.3e}"


def crit4():
    ns = np.arange(1, 1001)
    worst = 0.0
    zero_worst = 0.0
    where = None
    for p in (1.5, 2.0, 2.5, 3.0, 4.0):
        for alpha in (-1.0, -0.5, 0.0, 1.0, 2.0):
            for beta in (0.25, 0.5, 0.75, 1.0, 1.5):
                fp = FamilyParams(p, alpha, beta)
                a = power_weight(fp, ns)
                b = hardy_weight(power_pair(fp), ns)
                if alpha == 0 and beta == 1:
                    # v = 1, phi = n: the weight vanishes identically, so compare
                    # in absolute terms against the flux size, which is 1
                    zero_worst = max(zero_worst, float(np.max(np.abs(a - b))))
                    continue
                rel = np.abs(a - b) / np.abs(b)
                k = int(np.argmax(rel))
                if rel[k] > worst:
                    worst, where = float(rel[k]), (p, alpha, beta, int(ns[k]))
    fkp_worst = 0.0
    for p in (1.5, 2.0, 2.5, 3.0, 4.0):
        a = power_weight(FamilyParams(p, 0.0, (p - 1) / p), ns)
        b = fkp_weight(p, ns)
        fkp_worst = max(fkp_worst, float(np.max(np.abs(a - b) / np.abs(b))))
    ok = worst <= 1e-12 and fkp_worst <= 1e-14 and zero_worst <= 1e-15
    return ok, (f"grid max rel diff {worst:.2e} at (p, alpha, beta, n)={where} (tol 1e-12); "
                f"zero-weight case abs {zero_worst:.1e}; fkp {fkp_worst:.2e} (tol 1e-14)")


def crit5():
    rng = _rng(5)
    N = 10**4
    a = rng.standard_normal(N) * 3 + 1j * rng.standard_normal(N) * 3
    t = rng.uniform(0, 1, N)
    p = rng.uniform(1.05, 6.0, N)
    worst = 0.0
    for k in range(N):
        r, s = algebraic_identity_residual(a[k], t[k], p[k], extended=True)
        worst = max(worst, abs(r) / s)
    t2 = rng.uniform(-5, 5, N)
    r2, s2 = simplified_p2_residual(a, t2, extended=True)
    r3, s3 = algebraic_identity_residual(a, t2, 2.0, extended=True)
    worst2 = float(max(np.max(np.abs(r2) / s2), np.max(np.abs(r3) / s3)))
    ok = worst <= 1e-10 and worst2 <= 1e-10
    return ok, f"general {worst:.2e}, p=2 with t in [-5,5] {worst2:.2e} (tol 1e-10)"


def crit6():
    rng = _rng(6)
    worst = np.inf
    for p in (2, 3, 4):
        c1 = cp_lower_constant(p).lower
        N = 10**5
        xi = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        eta = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) * rng.choice([1e-3, 1, 10], N)
        scale = np.abs(xi) ** p + np.abs(xi - eta) ** p + np.abs(eta) ** p
        slack = (cp_value(xi, eta, p) - c1 * np.abs(eta) ** p) / scale
        worst = min(worst, float(slack.min()))
    return worst >= -1e-12, f"min scaled slack {worst:.2e} (tol -1e-12)"


def crit7():
    worst = np.inf
    pref2 = None
    for p in (2, 3, 4):
        rng = _rng(70 + p)
        for _ in range(10**4):
            rep = stability_report(_complex_seq(rng, 100), p)
            worst = min(worst, rep.margin / (rep.deficit + 1))
            if p == 2:
                pref2 = rep.prefactor
    ok = worst >= -1e-10 and pref2 == 0.125
    return ok, f"min margin/(deficit+1) {worst:.3e}; p=2 prefactor {pref2!r}"


def crit8():
    worst = np.inf
    order_bad = 0
    for p in (1.5, 2, 3):
        rng = _rng(80 + int(2 * p))
        for _ in range(10**4):
            v = rng.standard_normal(int(rng.integers(1, 101)))
            res = critical_hardy_check(v, p)
            worst = min(worst, res.slack)
            order_bad += int(res.rhs > res.rhs_at_first * (1 + 1e-12))
    ok = worst >= -1e-10 and order_bad == 0
    return ok, f"min slack {worst:.3e}; rhs(inf) > rhs(v(1)) in {order_bad} cases"


def crit9():
    parts = []
    ok = True
    for p in (1.5, 2, 3):
        est = muckenhoupt_constant(p, 10**4)
        ok &= est.sup_upper <= est.bound + 1e-6
        parts.append(f"p={p:g}: sup in [{est.sup_lower:.8f},{est.sup_upper:.8f}] at r={est.r_at_sup}"
                     f" vs bound {est.bound:g}")
    return ok, "; ".join(parts)


def crit10():
    worst = np.inf
    closed_worst = 0.0
    ns = np.arange(2, 1001)
    for k, (p, alpha) in enumerate(((2, -0.5), (3, -1), (1.5, -0.25))):
        rng = _rng(100 + k)
        for _ in range(1000):
            u = _complex_seq(rng, 200, start=2)
            rep = copson_verify(u, p, alpha)
            worst = min(worst, rep.residual / rep.scale)
        gen = hardy_weight(copson_pair(p, alpha), ns)
        closed = copson_weight(p, alpha, ns)
        closed_worst = max(closed_worst, float(np.max(np.abs(gen - closed) / closed)))
    ok_ineq = worst >= -1e-10
    ok_closed = closed_worst <= 1e-10
    return ok_ineq and ok_closed, (f"min relative slack {worst:.3e} ({'ok' if ok_ineq else 'bad'}); "
                                   f"generated vs closed-form weight max rel diff {closed_worst:.3e}"
                                   f" (tol 1e-10, {'ok' if ok_closed else 'bad'})")


def crit11():
    rng = _rng(11)
    worst = 0.0
    for _ in range(1000):
        u = _complex_seq(rng, 100)
        m = u.max_support + 3
        v = np.concatenate(([0.0], rng.uniform(0.1, 10, m)))
        phi = np.concatenate(([0.0], rng.uniform(0.1, 10, m)))
        lhs, rhs = huang_ye_lhs(u, v, phi), huang_ye_rhs(u, v, phi)
        x = u.dense(m)
        k = np.arange(1, m)
        grad = np.sum(v[k] * np.abs(x[1:] - x[:-1]) ** 2)
        flux = v[1:] * (phi[1:] - phi[:-1])
        div = np.abs(flux[1:m] - flux[:m - 1]) / phi[1:m]
        scale = grad + np.sum(div * np.abs(x[1:]) ** 2)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst <= 1e-11, f"max relative difference {worst:.2e} (tol 1e-11)"


CRITERIA = [
    (1, crit1, 60),
    (2, crit2, 30 * 4),
    (3, crit3, 5),
    (4, crit4, 10),
    (5, crit5, 5),
    (6, crit6, 10),
    (7, crit7, 120),
    (8, crit8, 60),
    (9, crit9, 10),
    (10, crit10, 30),
    (11, crit11, 10),
]


def _run(k, fn, budget):
    t0 = time.perf_counter()
    ok, detail = fn()
    return _record(k, ok, detail, time.perf_counter() - t0, budget)


@pytest.mark.parametrize("k,fn,budget", CRITERIA, ids=[f"criterion_{k}" for k, _, _ in CRITERIA])
def test_criterion(k, fn, budget):
    assert _run(k, fn, budget)


if __name__ == "__main__":
    results = [_run(*c) for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
