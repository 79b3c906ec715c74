"""Approximation requirements and the compacts they refer to."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..approx import TargetFunction
from ..geometry import (
    DomainScene, PlanarCompact, PointSet, PortionClosure, ProductCompact, complement_connected, descriptor_from_json,
    distance_to_closed_domain, enumerate_K_tau, exhaustion_set,
)
from ..polyalg import DerivativeFamily

FIXED = "fixed-center"
UNIFORM = "uniform-center"


class RequirementError(ValueError):
    """A requirement violates one of its invariants; the message names which one."""


@dataclass
class Requirement:
    id: str
    compact: ProductCompact
    target: TargetFunction
    epsilon: float
    fam: DerivativeFamily
    m: int
    mode: str = FIXED
    center_compact: ProductCompact | None = None
    source: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.compact.dim

    def k_family(self) -> DerivativeFamily:
        """Derivatives controlled on K: the whole family in O mode, values otherwise."""
        return self.fam if self.target.mode == "O" else DerivativeFamily.values(self.dim)

    def to_json(self) -> dict:
        if self.source:
            return self.source
        out = {
            "id": self.id,
            "compact": {"factors": [f.descriptor.to_json() for f in self.compact.factors]},
            "target": self.target.to_json(),
            "epsilon": self.epsilon,
            "family": self.fam.to_json(),
            "m": self.m,
            "mode": self.mode,
        }
        if self.center_compact is not None:
            out["center_compact"] = {"factors": [f.descriptor.to_json() for f in self.center_compact.factors]}
        return out


def compact_from_json(doc: dict, scene: DomainScene, h: float | None = None) -> ProductCompact:
    h = h if h is not None else scene.grid.validation_density
    if "tau" in doc:
        return enumerate_K_tau(scene, int(doc["tau"]), h)
    if "point" in doc:
        # a singleton requirement is a one-point compact in every factor
        return ProductCompact(tuple(
            PlanarCompact.from_descriptor(PointSet((complex(*z),)), h) for z in doc["point"]
        ))
    factors = tuple(PlanarCompact.from_descriptor(descriptor_from_json(f), h) for f in doc["factors"])
    return ProductCompact(factors)


def requirement_from_json(doc: dict, scene: DomainScene, h: float | None = None) -> Requirement:
    dim = scene.dim
    compact = compact_from_json(doc["compact"], scene, h)
    target = TargetFunction.from_json(doc["target"], dim)
    fam_doc = doc.get("family") or [[0] * dim]
    fam = DerivativeFamily(fam_doc, dim)
    center = compact_from_json(doc["center_compact"], scene, h) if doc.get("center_compact") else None
    return Requirement(
        str(doc["id"]), compact, target, float(doc["epsilon"]), fam, int(doc.get("m", 1)),
        doc.get("mode", FIXED), center, dict(doc),
    )


def exhaustion_compact(scene: DomainScene, m: int, h: float | None = None) -> ProductCompact:
    """L_m: the product of the m-th exhaustion sets of the factors."""
    h = h if h is not None else scene.grid.validation_density
    return ProductCompact(tuple(exhaustion_set(d, p, m, h) for d, p in zip(scene.domains, scene.portions)))


def check_requirement(req: Requirement, scene: DomainScene) -> None:
    """Raise RequirementError naming the first violated invariant."""
    if not req.epsilon > 0:
        raise RequirementError(f"requirement {req.id}: epsilon must be positive")
    if req.m < 1:
        raise RequirementError(f"requirement {req.id}: exhaustion level m must be >= 1")
    if req.compact.dim != scene.dim:
        raise RequirementError(f"requirement {req.id}: compact has {req.compact.dim} factors, scene has {scene.dim}")
    if req.fam.dim != scene.dim or not req.fam.is_gapless():
        raise RequirementError(f"requirement {req.id}: derivative family must be gapless in dimension {scene.dim}")
    if req.mode not in (FIXED, UNIFORM):
        raise RequirementError(f"requirement {req.id}: unknown mode {req.mode!r}")
    if req.compact.is_empty():
        raise RequirementError(f"requirement {req.id}: compact K is empty")
    # K misses the product of (domain_i ∪ closed portion_i) iff some factor misses its own set
    gaps = []
    for i, (fac, dom) in enumerate(zip(req.compact.factors, scene.domains)):
        gaps.append(float(np.min(distance_to_closed_domain(dom, fac.validation_points))))
    if not any(g > 0 for g in gaps):
        raise RequirementError(
            f"requirement {req.id}: disjointness violated, compact K meets the closure of the domain "
            f"in every factor (min distances {gaps})"
        )
    for i, fac in enumerate(req.compact.factors):
        cert = complement_connected(fac, scene.grid.box_margin, scene.grid.connectivity_resolution)
        if cert.verdict != "connected":
            raise RequirementError(
                f"requirement {req.id}: complement of factor {i + 1} of K is not certified connected ({cert.verdict})"
            )
    if req.mode == UNIFORM:
        if req.center_compact is None:
            raise RequirementError(f"requirement {req.id}: uniform-center mode needs a center compact")
        for i, (fac, dom, por) in enumerate(zip(req.center_compact.factors, scene.domains, scene.portions)):
            pts = fac.validation_points
            inside = np.asarray(dom.contains(pts), dtype=bool) | (PortionClosure(dom, por).dist(pts) <= 1e-12)
            if not np.all(inside):
                raise RequirementError(
                    f"requirement {req.id}: center compact factor {i + 1} leaves the domain with its portion"
                )
    req.target.values(req.compact.validation_array()[:1])
