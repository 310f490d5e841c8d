"""The seventeen acceptance criteria, one test each.

Every test records a PASS/FAIL line that is printed in the terminal summary
(see conftest.py), then asserts.
"""

import os
import subprocess
import sys
import time
from functools import reduce
from itertools import product

import numpy as np

from conftest import ACCEPTANCE
from ellqg import action, envelope, pairing, rmatrix, weights
from ellqg.combinatorics import all_subsets, subsets
from ellqg.theta import LatticeParams, quasi_period_multiplier, sample_generic_params, theta_derivative_at_zero


def accept(num, title, checks, elapsed=None, limit=None):
    """checks: list of (label, deviation, tolerance)."""
    ok = all(dev <= tol for _, dev, tol in checks)
    parts = [f"{label} {dev:.1e}<={tol:.0e}" for label, dev, tol in checks]
    if limit is not None:
        ok = ok and elapsed < limit
        parts.append(f"time {elapsed:.2f}s<{limit:g}s")
    ACCEPTANCE[num] = (title, ok, ", ".join(parts))
    assert ok, ACCEPTANCE[num][2]


def cell(rng, tau, size=None):
    return (rng.random(size) - 0.5) + (rng.random(size) - 0.5) * tau


def chain(ks, zs, sign, p, lam_shift=0):
    fs = [weights.omega_elementary(ks[a], sign, zs[a], p,
                                   lam_shift=lam_shift - sum(2 * kb - 1 for kb in ks[a + 1:]))
          for a in range(len(ks))]
    prod_ = reduce(lambda acc, f: weights.shuffle_product(f, acc, sign), reversed(fs[:-1]), fs[-1])
    return prod_, fs


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def test_criterion_01_theta_layer():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    odd = quasi = deriv = trunc = 0.0
    for i in range(10):
        L = LatticeParams(complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0)))
        z = cell(rng, L.tau, 100)
        a = L.theta(z)
        odd = max(odd, float(np.max(np.abs(a + L.theta(-z)) / np.abs(a))))
        twice = L.with_order(2 * L.truncation_order).theta(z)
        trunc = max(trunc, float(np.max(np.abs(a - twice) / np.abs(twice))))
        for zz, base in zip(z[:10], a[:10]):
            for r, s in ((1, 0), (0, 1), (-1, 1), (2, -1)):
                quasi = max(quasi, rel(L.theta(zz + r + s * L.tau),
                                       quasi_period_multiplier(zz, r, s, L) * base))
        deriv = max(deriv, abs(theta_derivative_at_zero(L) - 1))
    accept(1, "theta layer (1000 samples)",
           [("odd", odd, 1e-10), ("quasi", quasi, 1e-10), ("theta'(0)", deriv, 1e-8),
            ("truncation", trunc, 1e-12)], time.perf_counter() - start, 1.0)


def test_criterion_02_dybe_and_inversion():
    start = time.perf_counter()
    worst = {"gl2": 0.0, "gl3": 0.0}
    for seed in range(50):
        p = sample_generic_params(1, seed=seed)
        rng = np.random.default_rng(seed)
        z, w = cell(rng, p.tau, 2)
        R2 = rmatrix.gl2_rmatrix(p.lattice)
        worst["gl2"] = max(worst["gl2"], rmatrix.check_dybe(R2, z, w, p.y, p.lam),
                           rmatrix.check_inversion(R2, z, p.y, p.lam))
        lam3 = cell(rng, p.tau, 3)
        R3 = rmatrix.glN_rmatrix(3, p.lattice)
        worst["gl3"] = max(worst["gl3"], rmatrix.check_dybe(R3, z, w, p.y, lam3),
                           rmatrix.check_inversion(R3, z, p.y, lam3))
    accept(2, "dynamical YBE and inversion, gl_2 and gl_3 (50 points)",
           [(k, v, 1e-9) for k, v in worst.items()], time.perf_counter() - start, 5.0)


def test_criterion_03_associativity_and_duality():
    assoc = dual = 0.0
    for seed in range(20):
        p = sample_generic_params(4, seed=seed)
        rng = np.random.default_rng(seed)
        for sign in (-1, 1):
            h = weights.omega_elementary(1, sign, p.z[2], p)
            g = weights.omega_elementary(2, sign, p.z[1], p, lam_shift=-1)
            f = weights.omega_elementary(1, sign, p.z[0], p, lam_shift=-4)
            t = cell(rng, p.tau, 4)
            assoc = max(assoc, rel(weights.shuffle_product(weights.shuffle_product(f, g), h)(t),
                                   weights.shuffle_product(f, weights.shuffle_product(g, h))(t)))
            G, _ = chain((1, 1), p.z[2:], sign, p)
            F, _ = chain((1, 0), p.z[:2], sign, p, lam_shift=2 - 4)
            lhs = weights.rho(weights.shuffle_product(F, G))
            rhs = weights.shuffle_product(weights.rho(G), weights.rho(F))
            t = cell(rng, p.tau, 3)
            dual = max(dual, rel(lhs(t), rhs(t)))
    accept(3, "shuffle associativity and duality (20 points)",
           [("associativity", assoc, 1e-9), ("duality", dual, 1e-9)])


def test_criterion_04_cross_construction():
    start = time.perf_counter()
    worst = 0.0
    for n in range(1, 6):
        p = sample_generic_params(n, k_max=3, seed=40 + n)
        rng = np.random.default_rng(n)
        for k in range(1, min(n, 3) + 1):
            for I in subsets(n, k):
                for sign in (-1, 1):
                    f = weights.omega_I_shuffle(I, sign, p)
                    for _ in range(20):
                        t = cell(rng, p.tau, k)
                        a = f(t)
                        b, scale = weights.omega_I_explicit(I, sign, t, p, with_scale=True)
                        worst = max(worst, abs(a - b) / max(abs(a), abs(b), scale))
    accept(4, "shuffle vs symmetrized weight functions, n<=5, k<=3",
           [("relative", worst, 1e-9)], time.perf_counter() - start, 30.0)


def test_criterion_05_vanishing():
    worst = 0.0
    for n in range(2, 6):
        p = sample_generic_params(n, k_max=4, seed=50 + n)
        for k in range(2, min(n, 4) + 1):
            for I in subsets(n, k):
                for sign in (-1, 1):
                    for a in range(1, n + 1):
                        worst = max(worst, weights.check_vanishing_explicit(I, sign, p, a, seed=a))
    accept(5, "vanishing conditions, n<=5", [("relative to scale", worst, 1e-9)])


def test_criterion_06_orthogonality():
    start = time.perf_counter()
    diag = off = sums = dual = 0.0
    for n in range(1, 6):
        p = sample_generic_params(n, k_max=3, seed=60 + n)
        for k in range(1, min(n, 3) + 1):
            d, o = pairing.gram_deviation(k, p)
            diag, off = max(diag, d), max(off, o)
            S = pairing.ortho_sum_matrix(k, p)
            sums = max(sums, float(np.max(np.abs(S - np.eye(len(S))))))
            subs = subsets(n, k)
            for I in subs:
                for K in subs:
                    dual = max(dual, pairing.ortho_dual_check(I, K, p))
    accept(6, "orthogonality, n<=5, k<=3",
           [("gram diagonal", diag, 1e-8), ("gram off-diagonal", off, 1e-8),
            ("fixed-point sums", sums, 1e-8), ("dual sums", dual, 1e-8)],
           time.perf_counter() - start, 30.0)


def test_criterion_07_triangularity():
    diag = zero = 0.0
    for n in range(1, 6):
        p = sample_generic_params(n, k_max=3, seed=70 + n)
        for k in range(1, min(n, 3) + 1):
            for sign in (-1, 1):
                for I in subsets(n, k):
                    want = weights.diagonal_restriction(I, sign, p)
                    diag = max(diag, rel(weights.restriction(I, I, sign, p), want))
                    if sign > 0:
                        diag = max(diag, rel(weights.restriction(I, I, sign, p),
                                             envelope.envelope_diagonal(I, p)))
                    for J in subsets(n, k):
                        if not weights.is_nonzero_restriction(I, J, sign):
                            v, scale = weights.restriction(I, J, sign, p, with_scale=True)
                            # terms can vanish exactly; the diagonal value sets the floor
                            zero = max(zero, abs(v) / max(scale, abs(want)))
    accept(7, "triangularity and diagonal values",
           [("diagonal", diag, 1e-10), ("off-support", zero, 1e-9)])


def test_criterion_08_evaluation_forms():
    closed = one_point = ev = persist = 0.0
    for seed in range(5):
        p = sample_generic_params(4, seed=80 + seed)
        th = p.lattice.theta
        for ks in ((1, 2, 1), (2, 0, 1), (1, 1, 1), (0, 2, 2)):
            F, fs = chain(ks, p.z[:3], -1, p)
            want = weights.epsilon_closed_form(fs)
            closed = max(closed, rel(weights.epsilon_form(F, list(ks)), want))
            total = sum(ks)
            for ls in product(range(total + 1), repeat=3):
                if sum(ls) == total and not weights.partial_sums_dominated(ls, ks):
                    persist = max(persist, weights.epsilon_vanishing_check(F, ls, seed=seed))
        for k in range(1, 4):
            want = np.prod([th(p.lam - s * p.y) for s in range(1, k + 1)])
            one_point = max(one_point, rel(weights.epsilon_form(
                weights.omega_elementary(k, -1, p.z[0], p), [k]), want))
        for sign in (-1, 1):
            g, _ = chain((1, 2), p.z[2:], sign, p)
            f, _ = chain((2, 1), p.z[:2], sign, p, lam_shift=2 - 6)
            for c in range(1, 5):
                ev = max(ev, weights.ev_shuffle_check(f, g, c, seed=seed),
                         weights.ev_shuffle_check(f, g, c, double=True, seed=seed))
    accept(8, "evaluation forms",
           [("triangular closed form", closed, 1e-9), ("one-point value", one_point, 1e-9),
            ("evaluation vs shuffle", ev, 1e-9), ("vanishing persistence", persist, 1e-9)])


def test_criterion_09_exchange():
    worst = 0.0
    for n in range(2, 5):
        p = sample_generic_params(n, seed=90 + n)
        for i in range(1, n):
            worst = max(worst, weights.exchange_check(i, p, seed=i))
    accept(9, "exchange relations, n<=4", [("relative", worst, 1e-9)])


def test_criterion_10_r_from_weight_functions():
    worst = 0.0
    for seed in range(10):
        p = sample_generic_params(2, seed=100 + seed)
        z = p.z[0] - p.z[1]
        Rm, Rp = weights.r_pm_from_weight_functions(p)
        worst = max(worst,
                    rmatrix.relative_deviation(Rm, rmatrix.r_minus_closed_form(z, p.y, p.lam, p.lattice)),
                    rmatrix.relative_deviation(Rp, rmatrix.r_plus_closed_form(z, p.y, p.lam, p.lattice)))
    accept(10, "R-matrices from weight functions", [("relative", worst, 1e-9)])


def test_criterion_11_multipliers_and_gluing():
    mult = integer = glue = 0.0
    for n in range(1, 5):
        p = sample_generic_params(n, k_max=3, seed=110 + n)
        for k in range(1, n + 1):
            for I in subsets(n, k):
                rep = envelope.axiomatic_check(I, p, samples=2, seed=k)
                mult = max(mult, rep.deviations["multiplier"])
                integer = max(integer, envelope.theta_twisting_residual(I))
                if n >= 2 and k < n:
                    glue = max(glue, envelope.gluing_all(stab_section(I, p), p, samples=2))
    lattice_p = sample_generic_params(2, seed=7)
    shift = 0.0
    for c in ((1, 1, 1, 1), (1, 2, 1, 1), (2, 2, 1, 2), (1, 1, 2, 3)):
        integer = max(integer, envelope.shuffle_shift_residual(*c))
        shift = max(shift, envelope.shuffle_multiplier_shift_check(*c, lattice_p))
    accept(11, "multiplier forms and gluing, n<=4",
           [("stab multipliers", mult, 1e-9), ("integer forms", float(integer), 1e-9),
            ("shuffle shift", shift, 1e-9), ("gluing", glue, 1e-9)])


def stab_section(I, p):
    return envelope.stab(I, p).section


def test_criterion_12_phi_round_trip():
    worst = 0.0
    for n in range(1, 5):
        p = sample_generic_params(n, k_max=3, seed=120 + n)
        for k in range(1, n + 1):
            worst = max(worst, *envelope.phi_round_trip(p, k, seed=k).values())
    accept(12, "phi round trip and coefficient recovery, n<=4", [("residual", worst, 1e-8)])


def test_criterion_13_gelfand_zetlin():
    eig = comm = supp = 0.0
    for n in range(1, 5):
        p = sample_generic_params(n, seed=130 + n)
        rng = np.random.default_rng(n)
        w1, w2 = complex(cell(rng, p.tau)), complex(cell(rng, p.tau))
        L = action.tensor_L(n)
        for I in all_subsets(n):
            eig = max(eig, *action.gz_residuals(I, w1, p).values())
            supp = max(supp, *action.xi_hat_support(I, p).values())
        D = action.quantum_determinant(L, w1)
        comm = max(comm, action.commutator_norm(L(2, 2, w1), L(2, 2, w2), p),
                   action.commutator_norm(D, L(2, 2, w2), p),
                   action.commutator_norm(D, action.quantum_determinant(L, w2), p))
    accept(13, "Gelfand-Zetlin eigenvectors, commutators, support, n<=4",
           [("eigen residual", eig, 1e-8), ("commutators", comm, 1e-9), ("support", supp, 1e-8)])


def test_criterion_14_action_consistency():
    worst = 0.0
    for n in range(1, 5):
        p = sample_generic_params(n, seed=140 + n)
        w = complex(cell(np.random.default_rng(n), p.tau))
        for i, j in product((1, 2), repeat=2):
            worst = max(worst, action.action_consistency(i, j, w, p))
    accept(14, "geometric action matches tensor action, all generators, n<=4",
           [("relative", worst, 1e-7)])


def test_criterion_15_geometric_rll():
    worst = 0.0
    for seed in range(20):
        p = sample_generic_params(3, seed=150 + seed)
        rng = np.random.default_rng(seed)
        w1, w2 = complex(cell(rng, p.tau)), complex(cell(rng, p.tau))
        s = action.stab_vector({I: complex(*rng.standard_normal(2)) for I in all_subsets(3)})
        worst = max(worst, action.rll_geometric_check(w1, w2, p, s))
    p = sample_generic_params(3, seed=155)
    rng = np.random.default_rng(155)
    s = action.stab_vector({I: complex(*rng.standard_normal(2)) for I in all_subsets(3)})
    ratio = 0.0
    for a, b in ((1, 2), (2, 3), (1, 3)):
        res = action.pole_cancellation(action.geo_L12, complex(cell(rng, p.tau)), p, a, b, s)
        ratio = max(ratio, *res["ratios"])
    # a 1/delta pole would show a growth ratio near 10 per decade
    accept(15, "geometric RLL with moment maps (20 points, n=3) and pole cancellation",
           [("RLL", worst, 1e-7), ("growth per decade", ratio, 2.0)])


def test_criterion_16_ell_operator():
    worst = 0.0
    for n in range(1, 4):
        for seed in range(3):
            p = sample_generic_params(n, seed=160 + 10 * n + seed)
            worst = max(worst, action.ell_vs_tensor_check(
                complex(cell(np.random.default_rng(seed), p.tau)), p))
    accept(16, "shuffle-defined operator vs tensor L after gauge, n<=3", [("relative", worst, 1e-7)])


def test_criterion_17_full_suite_run():
    start = time.perf_counter()
    out = subprocess.run([sys.executable, "-m", "ellqg", "--suite", "all", "--n", "3"],
                         capture_output=True, text=True, env=dict(os.environ))
    elapsed = time.perf_counter() - start
    accept(17, "--suite all --n 3 exits 0",
           [("exit status", float(out.returncode), 0.0)], elapsed, 120.0)
