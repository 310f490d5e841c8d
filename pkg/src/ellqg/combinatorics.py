"""Subsets of [n], shuffles and the counting functions used to index weight functions.

Subsets are 1-based sorted tuples wrapped in :class:`SubsetIndex`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from math import comb

import numpy as np

from .errors import CapError

MAX_N = 16
MAX_SHUFFLE = 8


@dataclass(frozen=True, order=True)
class SubsetIndex:
    n: int
    members: tuple = ()

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        if not 1 <= self.n <= MAX_N:
            raise CapError(f"n={self.n} outside 1..{MAX_N}")
        if any(b <= a for a, b in zip(members, members[1:])):
            raise ValueError(f"members must be strictly increasing: {members}")
        if members and not (1 <= members[0] and members[-1] <= self.n):
            raise ValueError(f"members {members} outside [1..{self.n}]")
        object.__setattr__(self, "members", members)

    @property
    def k(self) -> int:
        return len(self.members)

    def complement(self) -> "SubsetIndex":
        return SubsetIndex(self.n, tuple(a for a in range(1, self.n + 1) if a not in self.members))

    def __contains__(self, a) -> bool:
        return a in self.members

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def zero_based(self) -> tuple:
        return tuple(a - 1 for a in self.members)

    def label(self) -> str:
        return "{" + ",".join(map(str, self.members)) + "}"


def subsets(n: int, k: int) -> list[SubsetIndex]:
    """All k-subsets of [n] in lexicographic order."""
    return [SubsetIndex(n, c) for c in combinations(range(1, n + 1), k)]


def all_subsets(n: int) -> list[SubsetIndex]:
    return [s for k in range(n + 1) for s in subsets(n, k)]


def _check_j(j: int, n: int):
    if not 1 <= j <= n:
        raise ValueError(f"index j={j} outside [1..{n}]")


def count_above(j: int, I: SubsetIndex) -> int:
    """Number of members of I strictly greater than j."""
    _check_j(j, I.n)
    return sum(1 for m in I.members if m > j)


def weight_index(j: int, I: SubsetIndex) -> int:
    """count_above(j, I) - count_above(j, complement of I)."""
    _check_j(j, I.n)
    above = I.n - j
    inside = count_above(j, I)
    return inside - (above - inside)


def epsilon(a: int, b: int) -> int:
    if a == b:
        raise ValueError("epsilon(a, b) needs a != b")
    return 1 if a > b else 0


def subset_leq(I: SubsetIndex, J: SubsetIndex) -> bool:
    """Elementwise comparison of the sorted members."""
    if I.n != J.n or I.k != J.k:
        raise ValueError("subset_leq needs subsets of equal size in the same [n]")
    return all(i <= j for i, j in zip(I.members, J.members))


@dataclass(frozen=True)
class ShuffleEnumeration:
    k_prime: int
    k_double_prime: int
    items: tuple

    def __len__(self):
        return len(self.items)


@lru_cache(maxsize=None)
def enumerate_shuffles(k_prime: int, k_double_prime: int, cap: int = MAX_SHUFFLE) -> ShuffleEnumeration:
    """Permutations increasing on the first k' and on the last k'' slots.

    Each item is a tuple p of length k'+k''; slot r receives variable p[r].
    """
    if k_prime < 0 or k_double_prime < 0:
        raise ValueError("shuffle block sizes must be nonnegative")
    k = k_prime + k_double_prime
    if k > cap:
        raise CapError(f"shuffle size {k} exceeds cap {cap}")
    items = []
    for first in combinations(range(k), k_prime):
        rest = tuple(i for i in range(k) if i not in first)
        items.append(first + rest)
    assert len(items) == comb(k, k_prime)
    return ShuffleEnumeration(k_prime, k_double_prime, tuple(items))


@lru_cache(maxsize=None)
def permutation_table(k: int) -> np.ndarray:
    """All permutations of range(k) as a (k!, k) index array."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.intp)
    return np.array(list(permutations(range(k))), dtype=np.intp)


# Tensor-basis convention: v_I carries v1 in the slots listed in I and v2
# elsewhere, so |I| counts weight +1 slots.  State 0 is v1, state 1 is v2.
MEMBER_STATE = 0


def tensor_basis_index(I: SubsetIndex) -> int:
    """Position of v_I in the basis of (C^2)^{x n}, slot 1 most significant."""
    idx = 0
    for a in range(1, I.n + 1):
        state = MEMBER_STATE if a in I.members else 1 - MEMBER_STATE
        idx = 2 * idx + state
    return idx


def subset_of_basis_index(n: int, idx: int) -> SubsetIndex:
    members = []
    for a in range(n, 0, -1):
        if idx % 2 == MEMBER_STATE:
            members.append(a)
        idx //= 2
    return SubsetIndex(n, tuple(sorted(members)))


def permute_subset(I: SubsetIndex, perm: tuple) -> SubsetIndex:
    """Image of I under the 1-based permutation a -> perm[a-1]."""
    return SubsetIndex(I.n, tuple(sorted(perm[a - 1] for a in I.members)))
