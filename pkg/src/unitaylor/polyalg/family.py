from __future__ import annotations

from collections.abc import Iterable, Iterator
from itertools import product

from .multiindex import MultiIndex, index_of


class DerivativeFamily:
    """A finite set of mixed partial derivative orders D_alpha."""

    __slots__ = ("indices", "dim")

    def __init__(self, indices: Iterable[Iterable[int]], dim: int | None = None):
        idx = {tuple(int(a) for a in alpha) for alpha in indices}
        dims = {len(a) for a in idx}
        if len(dims) > 1:
            raise ValueError("mixed dimensions in derivative family")
        if dim is None:
            if not dims:
                raise ValueError("empty family needs an explicit dimension")
            dim = dims.pop()
        elif dims and dims != {dim}:
            raise ValueError("family dimension mismatch")
        if any(a < 0 for alpha in idx for a in alpha):
            raise ValueError("derivative orders must be nonnegative")
        self.dim = dim
        self.indices: tuple[MultiIndex, ...] = tuple(sorted(idx, key=index_of))

    @classmethod
    def values(cls, dim: int) -> "DerivativeFamily":
        return cls([(0,) * dim], dim)

    @classmethod
    def up_to_order(cls, dim: int, order: int) -> "DerivativeFamily":
        return cls([a for a in product(range(order + 1), repeat=dim) if sum(a) <= order], dim)

    def closure(self) -> "DerivativeFamily":
        """Smallest gapless family containing this one."""
        out = set()
        for alpha in self.indices:
            out.update(product(*(range(a + 1) for a in alpha)))
        if not out:
            out.add((0,) * self.dim)
        return DerivativeFamily(out, self.dim)

    def is_gapless(self) -> bool:
        return set(self.closure().indices) == set(self.indices)

    def max_order(self, axis: int | None = None) -> int:
        if not self.indices:
            return 0
        if axis is None:
            return max(sum(a) for a in self.indices)
        return max(a[axis] for a in self.indices)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, alpha: object) -> bool:
        return alpha in self.indices

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DerivativeFamily) and other.indices == self.indices and other.dim == self.dim

    def __hash__(self) -> int:
        return hash((self.dim, self.indices))

    def to_json(self) -> list[list[int]]:
        return [list(a) for a in self.indices]

    def __repr__(self) -> str:
        return f"DerivativeFamily({list(self.indices)})"
