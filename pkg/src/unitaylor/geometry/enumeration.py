"""Deterministic enumeration of the product compacts K_tau."""
from __future__ import annotations

from functools import lru_cache
from itertools import product

from .compacts import Ball, PlanarCompact, ProductCompact
from .connectivity import complement_connected
from .domains import PortionClosure
from .exhaustion import shrink_from_portion
from .scene import DomainScene

ENUMERATION_RULE = "graded-sum-lex/v1"


class HorizonExceeded(IndexError):
    pass


@lru_cache(maxsize=32)
def _tuples(dim: int, counts: tuple[int, ...], max_m: int, max_radius: int) -> tuple[tuple[int, ...], ...]:
    """All (i0, j, m, s_i for i != i0) tuples, 1-based, sorted by (sum, lexicographic)."""
    out = []
    for i0 in range(1, dim + 1):
        for j in range(1, counts[i0 - 1] + 1):
            for m in range(1, max_m + 1):
                for s in product(range(1, max_radius + 1), repeat=dim - 1):
                    out.append((i0, j, m, *s))
    out.sort(key=lambda t: (sum(t), t))
    return tuple(out)


def enumeration_horizon(scene: DomainScene) -> int:
    counts = tuple(len(ks) for ks in scene.outside_compacts) or (0,) * scene.dim
    return len(_tuples(scene.dim, counts, scene.enumeration.max_m, scene.enumeration.max_radius))


def decode_tau(scene: DomainScene, tau: int) -> tuple[int, ...]:
    if tau < 1:
        raise ValueError("tau must be >= 1")
    counts = tuple(len(ks) for ks in scene.outside_compacts) or (0,) * scene.dim
    tuples = _tuples(scene.dim, counts, scene.enumeration.max_m, scene.enumeration.max_radius)
    if tau > len(tuples):
        raise HorizonExceeded(f"tau={tau} exceeds the configured enumeration horizon {len(tuples)}")
    return tuples[tau - 1]


def enumerate_K_tau(scene: DomainScene, tau: int, h: float | None = None) -> ProductCompact:
    """The tau-th product: factor i0 is the shrunk outside compact, the others are balls B(0, s_i)."""
    i0, j, m, *radii = decode_tau(scene, tau)
    h = h if h is not None else scene.grid.validation_density
    factors: list[PlanarCompact] = []
    rest = iter(radii)
    for i in range(1, scene.dim + 1):
        if i == i0:
            base = PlanarCompact.from_descriptor(scene.outside_compacts[i - 1][j - 1], h)
            closure = PortionClosure(scene.domains[i - 1], scene.portions[i - 1])
            factors.append(shrink_from_portion(base, closure, m))
        else:
            factors.append(PlanarCompact.from_descriptor(Ball(0j, float(next(rest))), h))
    certs = tuple(complement_connected(f, scene.grid.box_margin, scene.grid.connectivity_resolution) for f in factors)
    return ProductCompact(tuple(factors), certs)
