"""Independent re-check of a certificate on fresh, finer grids."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import ENUMERATION_RULE, DomainScene, ProductCompact
from ..polyalg import RULE_ID, Poly, derivative, evaluate, index_of, recenter, truncate
from .construct import Certificate, k_error, l_error
from .requirement import UNIFORM, Requirement, exhaustion_compact


class VerificationRefused(ValueError):
    """The certificate does not belong to this scene or uses another enumeration rule."""


@dataclass
class VerifyEntry:
    id: str
    cut: int
    epsilon: float
    E_K: float
    E_L: float

    @property
    def passed(self) -> bool:
        return self.E_K < self.epsilon and self.E_L < self.epsilon

    def to_json(self) -> dict:
        return {"id": self.id, "cut": self.cut, "epsilon": self.epsilon, "E_K": self.E_K, "E_L": self.E_L,
                "passed": self.passed}


@dataclass
class VerifyReport:
    entries: list[VerifyEntry]
    problems: list[str] = field(default_factory=list)
    resolution: float = 2.0

    @property
    def passed(self) -> bool:
        return not self.problems and all(e.passed for e in self.entries)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "resolution_multiplier": self.resolution,
            "entries": [e.to_json() for e in self.entries],
            "problems": list(self.problems),
        }


def _check_header(cert: Certificate, scene: DomainScene) -> None:
    if cert.scene_hash != scene.hash():
        raise VerificationRefused("certificate was issued for a different scene (hash mismatch)")
    if cert.enumeration_rule != RULE_ID:
        raise VerificationRefused(f"certificate uses enumeration rule {cert.enumeration_rule!r}, expected {RULE_ID!r}")
    if cert.compact_rule != ENUMERATION_RULE:
        raise VerificationRefused(f"certificate uses compact rule {cert.compact_rule!r}, expected {ENUMERATION_RULE!r}")


def _structure_problems(cert: Certificate, scene: DomainScene, requirements: list[Requirement]) -> list[str]:
    out = []
    if len(cert.cuts) != len(requirements):
        out.append(f"{len(cert.cuts)} cuts for {len(requirements)} requirements")
    if any(b <= a for a, b in zip(cert.cuts, cert.cuts[1:])):
        out.append(f"cuts are not strictly increasing: {cert.cuts}")
    for c in cert.cuts:
        if c not in scene.mu:
            out.append(f"cut {c} is not in mu")
    if tuple(cert.f.center) != tuple(scene.center):
        out.append("f is not expanded at the scene center")
    return out


def _boundary_points(compact: ProductCompact) -> np.ndarray:
    """Boundary sample of each factor, combined as a product.

    ζ -> S_λ(f, ζ)(z) is a polynomial in ζ, so by the maximum principle the
    worst center over a compact lies on its boundary.
    """
    parts = []
    for fac in compact.factors:
        b = fac.validation_points[fac.validation_boundary]
        parts.append(b if b.size else fac.validation_points)
    grids = np.meshgrid(*parts, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def uniform_center_errors(f: Poly, cut: int, req: Requirement, K: ProductCompact, L: ProductCompact,
                          centers: ProductCompact) -> tuple[float, float]:
    """max over ζ in the center compact of (E_K, E_L) for S_cut(f, ζ)."""
    kpts = K.validation_array()
    fam_k = req.k_family()
    tv = {b: req.target.derivative_values(b, kpts) for b in fam_k}
    ek = el = 0.0
    for zeta in _boundary_points(centers):
        g = recenter(f, tuple(zeta))
        s = truncate(g, cut)
        for b in fam_k:
            ek = max(ek, float(np.max(np.abs(evaluate(derivative(s, b), kpts) - tv[b]))))
        el = max(el, l_error(g, cut, req.fam, L))
    return ek, el


def _fresh(req: Requirement, scene: DomainScene, multiplier: float) -> tuple[ProductCompact, ProductCompact]:
    return req.compact.resampled(multiplier), exhaustion_compact(scene, req.m, scene.grid.validation_density / multiplier)


def verify(cert: Certificate, scene: DomainScene, requirements: list[Requirement],
           multiplier: float = 2.0) -> VerifyReport:
    """Recompute E_K and E_L for every requirement from f and the cuts alone."""
    _check_header(cert, scene)
    problems = _structure_problems(cert, scene, requirements)
    entries = []
    for req, cut in zip(requirements, cert.cuts):
        K, L = _fresh(req, scene, multiplier)
        if req.mode == UNIFORM:
            ek, el = uniform_center_errors(cert.f, cut, req, K, L, req.center_compact)
        else:
            ek, el = k_error(cert.f, cut, req, K), l_error(cert.f, cut, req.fam, L)
        entries.append(VerifyEntry(req.id, cut, req.epsilon, ek, el))
    return VerifyReport(entries, problems, multiplier)


def verify_uniform_center(cert: Certificate, scene: DomainScene, requirements: list[Requirement],
                          l_tilde: ProductCompact, multiplier: float = 2.0) -> VerifyReport:
    """Like verify, but every requirement is judged at every center ζ in l_tilde."""
    _check_header(cert, scene)
    problems = _structure_problems(cert, scene, requirements)
    entries = []
    for req, cut in zip(requirements, cert.cuts):
        K, L = _fresh(req, scene, multiplier)
        ek, el = uniform_center_errors(cert.f, cut, req, K, L, l_tilde)
        entries.append(VerifyEntry(req.id, cut, req.epsilon, ek, el))
    return VerifyReport(entries, problems, multiplier)


@dataclass
class ScanReport:
    values: list[tuple[int, complex]]
    cells: list[tuple[int, int]]
    total_cells: int
    box: tuple[float, float, float, float]
    cell: float
    support_index: int

    @property
    def coverage(self) -> float:
        return len(self.cells) / self.total_cells if self.total_cells else 0.0

    def to_json(self) -> dict:
        return {
            "values": [[k, [v.real, v.imag]] for k, v in self.values],
            "cells_hit": [list(c) for c in self.cells],
            "total_cells": self.total_cells,
            "coverage": self.coverage,
            "box": list(self.box),
            "cell": self.cell,
            "support_index": self.support_index,
            "note": "empirical coverage of a finite horizon; not evidence of universality",
        }


def universal_point_scan(f: Poly, zeta, z, horizon: int, box=(-4.0, 4.0, -4.0, 4.0), cell: float = 1.0) -> ScanReport:
    """Values S_k(f, ζ)(z) for k = 0..horizon and the grid cells of the box they visit.

    Indices past the support of f repeat the last value, so a horizon beyond it is allowed.
    """
    zeta = (complex(zeta),) if np.isscalar(zeta) else tuple(complex(x) for x in zeta)
    z = np.array([complex(z)] if np.isscalar(z) else [complex(x) for x in z])
    g = recenter(f, zeta) if tuple(f.center) != zeta else f
    contrib = {}
    for alpha, c in g.coeffs.items():
        contrib[index_of(alpha)] = c * complex(np.prod([(zi - wi) ** a for zi, wi, a in zip(z, zeta, alpha)]))
    values, total = [], 0j
    for k in range(horizon + 1):
        total += contrib.get(k, 0j)
        values.append((k, total))
    x0, x1, y0, y1 = box
    nx, ny = int(math.ceil((x1 - x0) / cell)), int(math.ceil((y1 - y0) / cell))
    hit = set()
    for _, v in values:
        if x0 <= v.real < x1 and y0 <= v.imag < y1:
            hit.add((int((v.real - x0) // cell), int((v.imag - y0) // cell)))
    return ScanReport(values, sorted(hit), nx * ny, tuple(box), cell, g.max_enum_index)
