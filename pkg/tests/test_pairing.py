import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ellqg.combinatorics import SubsetIndex, subsets
from ellqg.errors import PoleProximityError
from ellqg.pairing import (
    PairingContext,
    factorized_pairing_check,
    gram_deviation,
    inverse_deviation,
    ortho_dual_check,
    ortho_sum_check,
    ortho_sum_matrix,
    pairing,
)
from ellqg.theta import sample_generic_params
from ellqg.weights import omega_elementary, omega_explicit_function, psi_I

seeds = st.integers(0, 10_000)


@settings(max_examples=8)
@given(seeds, st.integers(2, 4), st.data())
def test_gram_is_diagonal_psi(seed, n, data):
    k = data.draw(st.integers(1, min(n, 3)))
    diag, off = gram_deviation(k, sample_generic_params(n, k_max=3, seed=seed))
    assert diag < 1e-8 and off < 1e-8


def test_one_point_pairing_value():
    # <omega^-_1, omega^+_1> on one point equals psi of the singleton
    p = sample_generic_params(1, seed=3)
    f = omega_explicit_function(SubsetIndex(1, (1,)), -1, p)
    g = omega_explicit_function(SubsetIndex(1, (1,)), +1, p)
    want = psi_I(SubsetIndex(1, (1,)), p)
    assert abs(pairing(f, g) - want) <= 1e-10 * abs(want)


@settings(max_examples=8)
@given(seeds)
def test_fixed_point_sums(seed):
    p = sample_generic_params(4, k_max=2, seed=seed)
    for I in subsets(4, 2):
        for J in subsets(4, 2):
            assert ortho_sum_check(I, J, p) < 1e-8
            assert ortho_dual_check(I, J, p) < 1e-8
    assert inverse_deviation(2, p) < 1e-8


def test_sum_matrix_is_identity():
    p = sample_generic_params(5, k_max=3, seed=1)
    S = ortho_sum_matrix(3, p)
    assert np.max(np.abs(S - np.eye(10))) < 1e-8


def test_factorized_pairing():
    assert factorized_pairing_check(sample_generic_params(2, seed=4)) < 1e-9


def test_pairing_argument_checks():
    p = sample_generic_params(2, seed=0)
    f = omega_elementary(1, -1, p.z[0], p)
    g = omega_elementary(1, +1, p.z[0], p)
    with pytest.raises(ValueError):
        pairing(g, f)
    with pytest.raises(ValueError):
        pairing(f, g, PairingContext(p, 2))


def test_context_guard():
    p = sample_generic_params(2, seed=0)
    bad = p.replace(z=(p.z[1] + p.y, p.z[1]))
    with pytest.raises(PoleProximityError):
        PairingContext(bad, 1)
