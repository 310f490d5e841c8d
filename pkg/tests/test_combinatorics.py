from math import comb

import pytest
from hypothesis import given, strategies as st

from ellqg.combinatorics import (
    SubsetIndex,
    all_subsets,
    count_above,
    enumerate_shuffles,
    epsilon,
    permute_subset,
    permutation_table,
    subset_leq,
    subset_of_basis_index,
    subsets,
    tensor_basis_index,
    weight_index,
)
from ellqg.errors import CapError


@st.composite
def subset_indices(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    members = draw(st.sets(st.integers(1, n), max_size=n))
    return SubsetIndex(n, tuple(sorted(members)))


def test_counts():
    for n in range(1, 7):
        assert len(all_subsets(n)) == 2 ** n
        for k in range(n + 1):
            assert len(subsets(n, k)) == comb(n, k)


def test_validation():
    with pytest.raises(ValueError):
        SubsetIndex(3, (2, 1))
    with pytest.raises(ValueError):
        SubsetIndex(3, (4,))
    with pytest.raises(CapError):
        SubsetIndex(17, ())
    with pytest.raises(ValueError):
        epsilon(2, 2)


@given(subset_indices())
def test_basis_index_round_trip(I):
    assert subset_of_basis_index(I.n, tensor_basis_index(I)) == I


def test_basis_index_convention():
    # v1 in the member slots, slot 1 most significant
    assert tensor_basis_index(SubsetIndex(2, (1, 2))) == 0
    assert tensor_basis_index(SubsetIndex(2, (1,))) == 1
    assert tensor_basis_index(SubsetIndex(2, (2,))) == 2
    assert tensor_basis_index(SubsetIndex(2, ())) == 3


@given(subset_indices(), st.data())
def test_weight_index_definition(I, data):
    j = data.draw(st.integers(1, I.n))
    above = I.n - j
    assert weight_index(j, I) == 2 * count_above(j, I) - above
    assert weight_index(j, I) == count_above(j, I) - count_above(j, I.complement())


@given(subset_indices())
def test_complement_involution(I):
    assert I.complement().complement() == I
    assert I.k + I.complement().k == I.n


@pytest.mark.parametrize("k1, k2", [(0, 0), (1, 2), (2, 2), (3, 4)])
def test_shuffles(k1, k2):
    sh = enumerate_shuffles(k1, k2)
    assert len(sh) == comb(k1 + k2, k1)
    for p in sh.items:
        assert list(p[:k1]) == sorted(p[:k1]) and list(p[k1:]) == sorted(p[k1:])
        assert sorted(p) == list(range(k1 + k2))


def test_shuffle_cap():
    with pytest.raises(CapError):
        enumerate_shuffles(5, 5)


def test_permutation_table():
    assert permutation_table(0).shape == (1, 0)
    assert permutation_table(4).shape == (24, 4)


def test_subset_leq():
    assert subset_leq(SubsetIndex(4, (1, 3)), SubsetIndex(4, (2, 4)))
    assert not subset_leq(SubsetIndex(4, (1, 4)), SubsetIndex(4, (2, 3)))
    with pytest.raises(ValueError):
        subset_leq(SubsetIndex(4, (1,)), SubsetIndex(4, (1, 2)))


@given(subset_indices(max_n=6), st.randoms())
def test_permute_subset(I, rnd):
    perm = list(range(1, I.n + 1))
    rnd.shuffle(perm)
    J = permute_subset(I, tuple(perm))
    assert J.k == I.k
    inv = [0] * I.n
    for a, b in enumerate(perm, 1):
        inv[b - 1] = a
    assert permute_subset(J, tuple(inv)) == I
