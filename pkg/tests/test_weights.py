import numpy as np
import pytest
from hypothesis import given, strategies as st

from ellqg.combinatorics import SubsetIndex, subsets
from ellqg.errors import PoleProximityError
from ellqg.theta import EllipticParams, LatticeParams, sample_generic_params
from ellqg.weights import (
    check_vanishing_condition,
    diagonal_restriction,
    epsilon_closed_form,
    epsilon_form,
    exchange_check,
    is_nonzero_restriction,
    normalized_w,
    omega_elementary,
    omega_I_explicit,
    omega_I_shuffle,
    restriction,
    restriction_table,
    rho,
    shuffle_product,
)

seeds = st.integers(0, 10_000)

# Symmetrized weight functions evaluated independently with mpmath (30 digits)
ORACLE_PARAMS = EllipticParams(LatticeParams(0.1 + 1.05j), 0.23 + 0.11j, 0.37 - 0.08j,
                               (0.05 + 0.12j, -0.31 + 0.27j, 0.44 - 0.19j))
T1 = [0.29 + 0.04j]
T2 = [0.12 + 0.33j, -0.21 - 0.07j]
ORACLE = [
    ((1,), -1, T1, -0.009965864722698444 + 0.02398787187011311j),
    ((1,), 1, T1, 0.1255686087398348 + 0.09630905769989853j),
    ((2,), -1, T1, -0.02168752943129437 - 0.012905980960422808j),
    ((2,), 1, T1, 0.04867057893627798 - 0.279437348052535j),
    ((1, 3), -1, T2, 0.036233123889930365 - 0.024470074451378495j),
    ((1, 3), 1, T2, 1.1358703094670142 + 1.633752918781585j),
    ((2, 3), -1, T2, 0.027113803977572144 - 0.011239931815782466j),
    ((2, 3), 1, T2, -1.336822214273213 + 0.5495756877417165j),
    ((1, 2), -1, T2, -0.009162857380315578 - 0.02049537904547922j),
    ((1, 2), 1, T2, 0.9345662569674577 + 0.5855789856085981j),
]


@pytest.mark.parametrize("members, sign, t, want", ORACLE)
def test_normalized_matches_oracle(members, sign, t, want):
    got = normalized_w(SubsetIndex(3, members), sign, np.array(t), ORACLE_PARAMS)
    assert abs(got - want) <= 1e-12 * abs(want)


def _t(rng, k, tau):
    return (rng.random(k) - 0.5) + (rng.random(k) - 0.5) * tau


@given(seeds, st.integers(1, 4), st.sampled_from([-1, 1]))
def test_shuffle_equals_explicit(seed, n, sign):
    p = sample_generic_params(n, k_max=3, seed=seed)
    rng = np.random.default_rng(seed)
    for k in range(1, min(n, 3) + 1):
        for I in subsets(n, k):
            t = _t(rng, k, p.tau)
            a = omega_I_shuffle(I, sign, p)(t)
            b, scale = omega_I_explicit(I, sign, t, p, with_scale=True)
            assert abs(a - b) <= 1e-9 * max(abs(a), abs(b), scale)


@given(seeds, st.sampled_from([-1, 1]))
def test_symmetric_in_t(seed, sign):
    p = sample_generic_params(3, seed=seed)
    t = _t(np.random.default_rng(seed), 2, p.tau)
    f = omega_I_shuffle(SubsetIndex(3, (1, 3)), sign, p)
    assert abs(f(t) - f(t[::-1])) <= 1e-10 * abs(f(t))


@given(seeds)
def test_vanishing_on_diagonal_locus(seed):
    p = sample_generic_params(3, seed=seed)
    for I in subsets(3, 2):
        for sign in (-1, 1):
            f = omega_I_shuffle(I, sign, p)
            for a in (1, 2, 3):
                assert check_vanishing_condition(f, a, seed=seed) < 1e-9


def test_vanishing_detects_generic_function():
    p = sample_generic_params(2, seed=1)
    th = p.lattice.theta
    f = omega_elementary(2, -1, p.z[0], p).relabel(
        z=p.z, evaluator=lambda t: th(t[0] - 0.3) * th(t[1] - 0.3) + 1.0)
    assert check_vanishing_condition(f, 1) > 1e-3


def test_rho_is_involution():
    p = sample_generic_params(3, seed=2)
    f = omega_I_shuffle(SubsetIndex(3, (2,)), -1, p)
    g = rho(rho(f))
    assert g.sign == f.sign and abs(g.lam - f.lam) < 1e-15
    assert rho(f).sign == 1


@given(seeds)
def test_associativity(seed):
    p = sample_generic_params(3, seed=seed)
    h = omega_elementary(1, -1, p.z[2], p)
    g = omega_elementary(2, -1, p.z[1], p, lam_shift=-1)
    f = omega_elementary(1, -1, p.z[0], p, lam_shift=-1 - 3)
    t = _t(np.random.default_rng(seed), 4, p.tau)
    a = shuffle_product(shuffle_product(f, g), h)(t)
    b = shuffle_product(f, shuffle_product(g, h))(t)
    assert abs(a - b) <= 1e-9 * max(abs(a), abs(b))


def test_shuffle_rejects_wrong_lambda():
    p = sample_generic_params(2, seed=0)
    f = omega_elementary(1, -1, p.z[0], p)
    g = omega_elementary(1, -1, p.z[1], p)
    with pytest.raises(ValueError):
        shuffle_product(f, g)
    with pytest.raises(ValueError):
        shuffle_product(rho(f), g)


def test_shuffle_coincident_variables():
    p = sample_generic_params(2, seed=0)
    g = omega_elementary(1, -1, p.z[1], p)
    f = omega_elementary(1, -1, p.z[0], p, lam_shift=-1)
    with pytest.raises(PoleProximityError):
        shuffle_product(f, g)(np.array([0.2, 0.2]))


def test_one_point_evaluation():
    p = sample_generic_params(1, seed=4)
    th = p.lattice.theta
    for k in range(1, 4):
        got = epsilon_form(omega_elementary(k, -1, p.z[0], p), [k])
        want = np.prod([th(p.lam - s * p.y) for s in range(1, k + 1)])
        assert abs(got - want) <= 1e-10 * abs(want)


def test_triangular_evaluation_closed_form():
    p = sample_generic_params(3, seed=6)
    fs = [omega_elementary(1, -1, p.z[0], p, lam_shift=-4),
          omega_elementary(2, -1, p.z[1], p, lam_shift=-1),
          omega_elementary(1, -1, p.z[2], p)]
    F = shuffle_product(fs[0], shuffle_product(fs[1], fs[2]))
    want = epsilon_closed_form(fs)
    assert abs(epsilon_form(F, [1, 2, 1]) - want) <= 1e-9 * abs(want)


@given(seeds, st.sampled_from([-1, 1]))
def test_triangularity_and_diagonal(seed, sign):
    p = sample_generic_params(4, seed=seed)
    for I in subsets(4, 2):
        d = diagonal_restriction(I, sign, p)
        assert abs(restriction(I, I, sign, p) - d) <= 1e-10 * abs(d)
        for J in subsets(4, 2):
            if not is_nonzero_restriction(I, J, sign):
                v, scale = restriction(I, J, sign, p, with_scale=True)
                assert abs(v) <= 1e-9 * scale


def test_restriction_table_is_triangular_and_invertible():
    p = sample_generic_params(4, seed=8)
    T = restriction_table(4, 2, -1, p)
    assert np.allclose(np.tril(T, -1), 0, atol=1e-12 * np.max(np.abs(T)))
    assert abs(np.linalg.det(T)) > 0


@given(seeds)
def test_exchange(seed):
    p = sample_generic_params(3, seed=seed)
    for i in (1, 2):
        assert exchange_check(i, p, seed=seed) < 1e-9


def test_caps():
    p = sample_generic_params(5, seed=0)
    with pytest.raises(ValueError):
        omega_I_explicit(SubsetIndex(9, (1,)), -1, [0.1], p)
    with pytest.raises(ValueError):
        omega_I_explicit(SubsetIndex(5, (1, 2, 3, 4, 5)), -1, np.zeros(5), p)
    with pytest.raises(ValueError):
        omega_I_explicit(SubsetIndex(5, (1, 2)), -1, [0.1], p)
