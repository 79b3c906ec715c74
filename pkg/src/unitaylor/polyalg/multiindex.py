"""Graded lexicographic enumeration of multi-indices.

Within one total degree the order is descending lexicographic, so for d = 2
the sequence starts (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
"""
from __future__ import annotations

from functools import lru_cache
from math import comb

MultiIndex = tuple[int, ...]

RULE_ID = "grlex-desc/v1"


def count_eq(d: int, degree: int) -> int:
    """Number of multi-indices in d variables with total degree exactly `degree`."""
    if degree < 0:
        return 0
    if d == 0:
        return 1 if degree == 0 else 0
    return comb(degree + d - 1, d - 1)


def count_leq(d: int, degree: int) -> int:
    """Number of multi-indices in d variables with total degree at most `degree`."""
    if degree < 0:
        return 0
    return comb(degree + d, d)


def index_of(alpha: MultiIndex) -> int:
    d = len(alpha)
    if d == 0:
        raise ValueError("multi-index must have at least one entry")
    if any(a < 0 for a in alpha):
        raise ValueError(f"negative entry in multi-index {alpha}")
    g = sum(alpha)
    idx = count_leq(d, g - 1)
    rem = g
    for i in range(d - 1):
        # multi-indices with a larger entry at position i come first
        for v in range(rem, alpha[i], -1):
            idx += count_eq(d - i - 1, rem - v)
        rem -= alpha[i]
    return idx


@lru_cache(maxsize=65536)
def multi_index(j: int, d: int) -> MultiIndex:
    if d < 1:
        raise ValueError("dimension must be positive")
    if j < 0:
        raise ValueError("enumeration index must be nonnegative")
    g = 0
    while count_leq(d, g) <= j:
        g += 1
    rel = j - count_leq(d, g - 1)
    alpha = [0] * d
    rem = g
    for i in range(d - 1):
        for v in range(rem, -1, -1):
            block = count_eq(d - i - 1, rem - v)
            if rel < block:
                alpha[i] = v
                rem -= v
                break
            rel -= block
    alpha[-1] = rem
    return tuple(alpha)


class MultiIndexEnum:
    """Bijection j <-> N_j between the naturals and N^d."""

    rule_id = RULE_ID

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("dimension must be positive")
        self.d = d

    def index_of(self, alpha: MultiIndex) -> int:
        if len(alpha) != self.d:
            raise ValueError(f"expected {self.d} entries, got {len(alpha)}")
        return index_of(tuple(alpha))

    def __getitem__(self, j: int) -> MultiIndex:
        return multi_index(j, self.d)

    def prefix(self, n: int) -> list[MultiIndex]:
        """The first n multi-indices."""
        return [multi_index(j, self.d) for j in range(n)]

    def first_of_degree(self, degree: int) -> int:
        return count_leq(self.d, degree - 1)

    def last_of_degree(self, degree: int) -> int:
        return count_leq(self.d, degree) - 1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MultiIndexEnum) and other.d == self.d

    def __hash__(self) -> int:
        return hash((RULE_ID, self.d))

    def __repr__(self) -> str:
        return f"MultiIndexEnum(d={self.d})"
