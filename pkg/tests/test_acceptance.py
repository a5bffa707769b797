"""Acceptance gate: one test (one pass/fail line under ``pytest -v``) per
criterion. Each test prints an ``ACCEPTANCE n: PASS/FAIL`` summary line with
the measured numbers before asserting, so failures are self-describing.
"""

import itertools
import math

import numpy as np
import pytest

import gzfdp
from gzfdp import (
    build_gram,
    build_gzfdp_minrate,
    build_gzfdp_sumrate,
    build_ugdp,
    build_zf,
    build_zfdp,
    evaluate_ordering,
    gen_iid_gaussian,
    order_alg1,
    order_alg2,
)
from conftest import random_channels

PT = 10.0  # 10 dB with N0 = 1
N0 = 1.0
TOL_PAPER = 2e-3
TOL_REL = 1e-9


def announce(num, desc, ok, detail=""):
    line = "ACCEPTANCE %d: %s — %s" % (num, "PASS" if ok else "FAIL", desc)
    if detail:
        line += " [%s]" % detail
    print(line)
    assert ok, line


def close(a, b, tol=TOL_PAPER):
    return abs(a - b) <= tol


def test_criterion_01_reference_channel_golden(example1):
    problems = []

    def check(name, got, want, tol=TOL_PAPER):
        if isinstance(want, (list, tuple, np.ndarray)):
            bad = ~np.isclose(np.asarray(got), np.asarray(want), atol=tol,
                              rtol=0)
            if bad.any():
                problems.append("%s: got %s want %s" % (
                    name, np.round(np.asarray(got), 4).tolist(), list(want)))
        elif not close(got, want, tol):
            problems.append("%s: got %.4f want %.3f" % (name, got, want))

    zf = build_zf(example1, power_budget=PT, noise_power=N0)
    ug = build_ugdp(example1, group_size=2, power_budget=PT, noise_power=N0)
    g1 = build_gzfdp_sumrate(example1, nu=1, power_budget=PT, noise_power=N0)
    g2 = build_gzfdp_sumrate(example1, nu=2, power_budget=PT, noise_power=N0)

    check("sum rate zf", zf.sum_rate, 17.885)
    check("sum rate ugdp(2)", ug.sum_rate, 18.206)
    check("sum rate gzfdp(1)", g1.sum_rate, 18.514)

    check("user rates zf", zf.user_rates, [4.333, 4.830, 4.370, 4.352])
    check("user rates gzfdp(1)", g1.user_rates, [4.650, 5.106, 4.410, 4.348])
    check("user rates gzfdp(2)", g2.user_rates, [5.394, 6.047, 4.387, 4.324])

    check("F zf diagonal", np.diag(zf.effective).real,
          [4.376, 5.238, 4.436, 4.407])

    f1 = g1.effective
    check("F gzfdp(1) diagonal", np.diag(f1).real,
          [4.910, 5.784, 4.501, 4.400])
    for (i, j), want in {(2, 1): -1.143 + 2.345j, (3, 2): 2.034 + 0.416j,
                         (4, 3): 0.490 + 0.609j}.items():
        got = f1[i - 1, j - 1]
        if abs(got - want) > TOL_PAPER * math.sqrt(2):
            problems.append("F gzfdp(1)[%d,%d]: got %s want %s"
                            % (i, j, np.round(got, 4), want))

    fu = ug.effective
    check("F ugdp |diagonal|", np.abs(np.diag(fu)),
          [4.899, 5.217, 4.490, 4.389])
    for (i, j), want in {(2, 1): -1.140 + 2.340j,
                         (4, 3): 0.489 + 0.607j}.items():
        got = fu[i - 1, j - 1]
        if abs(got - want) > TOL_PAPER * math.sqrt(2):
            problems.append("F ugdp[%d,%d]: got %s want %s"
                            % (i, j, np.round(got, 4), want))

    announce(1, "reference 4x4 channel golden values (tolerance 2e-3)",
             not problems, "; ".join(problems))


def test_criterion_02_power_equality():
    worst = 0.0
    for channel in random_channels(1000, 8, 8, seed=1002):
        sols = (
            build_zf(channel, power_budget=PT, noise_power=N0),
            build_gzfdp_sumrate(channel, nu=3, power_budget=PT, noise_power=N0),
            build_gzfdp_minrate(channel, nu=3, power_budget=PT, noise_power=N0),
            build_zfdp(channel, power_budget=PT, noise_power=N0),
            build_ugdp(channel, group_size=2, power_budget=PT, noise_power=N0),
        )
        gram = build_gram(channel, noise_power=N0).gram
        for sol in sols:
            f = sol.effective
            consumed = float(np.trace(f.conj().T @ gram @ f).real)
            worst = max(worst, abs(consumed - PT) / PT)
    ok = worst <= TOL_REL
    announce(2, "power equality Tr(F^dag G F) = P_T across all families, "
             "1000 random 8x8 channels", ok, "worst rel err %.2e" % worst)


def test_criterion_03_monotone_floor_chains():
    violations = 0
    rng = np.random.default_rng(1003)
    for trial in range(500):
        n = int(rng.integers(2, 9))
        channel = gen_iid_gaussian(n, n + 2, seed=int(rng.integers(2 ** 62)))
        geom = build_gram(channel, noise_power=N0)
        for user in range(1, n + 1):
            chain = geom.ghat_chain(user)
            if not (np.all(chain > 0)
                    and np.all(np.diff(chain) <= 1e-12 * chain[:-1])):
                violations += 1
    announce(3, "Schur floor chains positive and non-increasing, 500 random "
             "channels N=2..8", violations == 0, "%d violations" % violations)


def test_criterion_04_equivalence_oracles():
    problems = []
    rng = np.random.default_rng(1004)
    for trial in range(500):
        n = int(rng.integers(2, 7))
        channel = gen_iid_gaussian(n, n + 1, seed=int(rng.integers(2 ** 62)))
        zf = build_zf(channel, power_budget=PT, noise_power=N0)
        g0 = build_gzfdp_sumrate(channel, nu=0, power_budget=PT, noise_power=N0)
        if not np.array_equal(zf.user_rates, g0.user_rates):
            problems.append("trial %d: depth-0 rates not bitwise ZF" % trial)
        gfull = build_gzfdp_sumrate(channel, nu=n - 1, power_budget=PT,
                                    noise_power=N0)
        zfdp = build_zfdp(channel, power_budget=PT, noise_power=N0)
        if abs(gfull.sum_rate - zfdp.sum_rate) > TOL_REL * zfdp.sum_rate:
            problems.append("trial %d: full depth != triangular path" % trial)
        ug = build_ugdp(channel, group_size=n, power_budget=PT, noise_power=N0)
        if abs(ug.sum_rate - zfdp.sum_rate) > TOL_REL * zfdp.sum_rate:
            problems.append("trial %d: single group != triangular path" % trial)
    announce(4, "equivalence oracles (depth 0 = ZF bitwise, full depth = "
             "ZF-DP, one group = ZF-DP), 500 random channels",
             not problems, "; ".join(problems[:3]))


def test_criterion_05_dominance_chain():
    violations = 0
    for channel in random_channels(1000, 8, 8, seed=1005):
        sums = [build_gzfdp_sumrate(channel, nu=nu, power_budget=PT,
                                    noise_power=N0).sum_rate
                for nu in range(8)]
        mins = [build_gzfdp_minrate(channel, nu=nu, power_budget=PT,
                                    noise_power=N0).min_rate
                for nu in range(8)]
        ug = build_ugdp(channel, group_size=2, power_budget=PT,
                        noise_power=N0).sum_rate
        ok = (np.all(np.diff(sums) >= -1e-12)
              and np.all(np.diff(mins) >= -1e-12)
              and sums[0] <= ug + 1e-12 and ug <= sums[1] + 1e-12)
        violations += 0 if ok else 1
    announce(5, "per-realization dominance ZF <= UG-DP(2) <= GZF(1), rates "
             "non-decreasing in depth (sum and min), 1000 random 8x8 channels",
             violations == 0, "%d violations" % violations)


def test_criterion_06_last_users_never_gain():
    violations = 0
    rng = np.random.default_rng(1006)
    for trial in range(500):
        n = int(rng.integers(3, 8))
        channel = gen_iid_gaussian(n, n, seed=int(rng.integers(2 ** 62)))
        prev = build_gzfdp_sumrate(channel, nu=0, power_budget=PT,
                                   noise_power=N0)
        for nu in range(1, n):
            cur = build_gzfdp_sumrate(channel, nu=nu, power_budget=PT,
                                      noise_power=N0)
            tail = nu  # previous depth nu-1: the last (nu-1)+1 users
            if np.any(cur.user_rates[-tail:]
                      > prev.user_rates[-tail:] + 1e-12):
                violations += 1
            prev = cur
    announce(6, "raising the depth never increases the trailing users' "
             "sum-rate-mode rates, 500 random channels",
             violations == 0, "%d violations" % violations)


def test_criterion_07_banded_saturation():
    problems = 0
    rng = np.random.default_rng(1007)
    for trial in range(200):
        nu1 = 1 + trial % 2
        n = 6
        h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        i, j = np.indices((n, n))
        h[(j > i) | (i - j > nu1)] = 0.0
        h += np.eye(n) * 3.0
        geom = build_gram(h, noise_power=N0)
        target = 1.0 / np.abs(np.diag(h)) ** 2
        base_sum = build_gzfdp_sumrate(h, nu=nu1, power_budget=PT,
                                       noise_power=N0).sum_rate
        base_min = build_gzfdp_minrate(h, nu=nu1, power_budget=PT,
                                       noise_power=N0).min_rate
        for nu in range(nu1, n):
            if not np.allclose(geom.ghat_vector(nu), target, rtol=TOL_REL):
                problems += 1
                break
            s = build_gzfdp_sumrate(h, nu=nu, power_budget=PT,
                                    noise_power=N0).sum_rate
            m = build_gzfdp_minrate(h, nu=nu, power_budget=PT,
                                    noise_power=N0).min_rate
            if (abs(s - base_sum) > TOL_REL * base_sum
                    or abs(m - base_min) > TOL_REL * base_min):
                problems += 1
                break
    announce(7, "banded channels: floors collapse to |h_nn|^-2 and rates "
             "flatten beyond the band, 200 trials",
             problems == 0, "%d failing trials" % problems)


def test_criterion_08_min_rate_fairness():
    worst = 0.0
    rng = np.random.default_rng(1008)
    for trial in range(1000):
        n = int(rng.integers(2, 9))
        nu = int(rng.integers(0, n))
        channel = gen_iid_gaussian(n, n + 1, seed=int(rng.integers(2 ** 62)))
        sol = build_gzfdp_minrate(channel, nu=nu, power_budget=PT,
                                  noise_power=N0)
        worst = max(worst, float(sol.user_rates.max() - sol.user_rates.min()))
    announce(8, "min-rate mode equalizes all user rates, 1000 random channels",
             worst <= 1e-9, "worst spread %.2e" % worst)


def test_criterion_09_ordering_quality():
    trials = 200
    alg1_ok = True
    alg1_detail = []
    alg2_hits, alg2_total = 0, 0
    for n in (5, 6):
        perms = list(itertools.permutations(range(1, n + 1)))
        for nu in (1, 2):
            diffs = []
            for channel in random_channels(trials, n, n, seed=1009 + n + 10 * nu):
                geom = build_gram(channel, noise_power=N0)
                sum_values = np.array([
                    evaluate_ordering(geom, p, nu, "sum", PT, N0)
                    for p in perms])
                alg1_value = evaluate_ordering(
                    geom, order_alg1(geom, nu), nu, "sum", PT, N0)
                diffs.append(alg1_value - sum_values.mean())

                min_values = np.array([
                    evaluate_ordering(geom, p, nu, "min", PT, N0)
                    for p in perms])
                alg2_value = evaluate_ordering(
                    geom, order_alg2(geom), nu, "min", PT, N0)
                alg2_total += 1
                if alg2_value >= 0.98 * min_values.max():
                    alg2_hits += 1
            mean_gain = float(np.mean(diffs))
            alg1_detail.append("N=%d nu=%d gain %.3f" % (n, nu, mean_gain))
            if mean_gain <= 0:
                alg1_ok = False
    alg2_frac = alg2_hits / alg2_total
    ok = alg1_ok and alg2_frac >= 0.90
    announce(9, "ordering quality: Alg1 beats the random-ordering mean "
             "(paired) and Alg2 is within 2%% of the exhaustive optimum in "
             ">=90%% of trials, N=5/6, 200 trials, depth 1 and 2", ok,
             "; ".join(alg1_detail) + "; alg2 within 2%%: %.1f%%"
             % (100 * alg2_frac))


def test_criterion_10_user_sweep_shape():
    trials = 300
    m = 24
    detail = []
    ok = True
    draws = [gen_iid_gaussian(20, m, seed=int(s)) for s in
             np.random.SeedSequence(1010).generate_state(trials)]
    for n in (8, 12, 16, 20):
        diffs = []
        for draw in draws:
            rows = draw.entries
            gzf1 = build_gzfdp_sumrate(rows[:n], nu=1, power_budget=PT,
                                       noise_power=N0).sum_rate
            zf = build_zf(rows[:n - 1], power_budget=PT,
                          noise_power=N0).sum_rate
            diffs.append(gzf1 - zf)
        diffs = np.asarray(diffs)
        stderr = diffs.std(ddof=1) / math.sqrt(trials)
        detail.append("N=%d diff %.3f (stderr %.3f)"
                      % (n, diffs.mean(), stderr))
        if abs(diffs.mean()) > 1.5 * stderr:
            ok = False
    announce(10, "depth-1 precoder at N users matches ZF at N-1 users within "
             "1.5 paired standard errors, M=24, 300 trials", ok,
             "; ".join(detail))


def test_criterion_11_no_optimal_dpc_bound():
    # the iterative-water-filling optimal-DPC bound is deliberately out of
    # scope; nothing in the public API claims to provide it
    names = [name.lower() for name in dir(gzfdp)]
    offenders = [n for n in names if "dpc_bound" in n or "iterative" in n
                 or "optimal_dpc" in n]
    announce(11, "no optimal-DPC upper-bound implementation is exposed "
             "(informational)", not offenders, ", ".join(offenders))
