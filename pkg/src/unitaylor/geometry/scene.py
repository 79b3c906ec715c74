"""Domain scenes: product domains with boundary portions, a center, and an admissible cut set."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .compacts import Ball, Descriptor, Segment, descriptor_from_json
from .connectivity import ConnectivityCertificate, domain_complement_connected
from .domains import BoundaryPortion, DomainSpec, _c, domain_from_json, portion_from_json


@dataclass(frozen=True)
class Mu:
    """Admissible cut set: all of N, a union of residue classes, or an explicit finite list."""

    kind: str = "all"
    modulus: int = 1
    residues: tuple[int, ...] = (0,)
    values: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("all", "residues", "list"):
            raise ValueError(f"unknown mu kind {self.kind!r}")
        if self.kind == "residues" and (self.modulus < 1 or not self.residues):
            raise ValueError("residue classes need a positive modulus and at least one residue")
        if self.kind == "list" and list(self.values) != sorted(set(self.values)):
            raise ValueError("explicit mu list must be strictly increasing")

    def __contains__(self, k: int) -> bool:
        if k < 0:
            return False
        if self.kind == "all":
            return True
        if self.kind == "residues":
            return k % self.modulus in {r % self.modulus for r in self.residues}
        return k in self.values

    def least_at_least(self, n: int) -> int:
        """min{λ in mu : λ >= n}."""
        n = max(n, 0)
        if self.kind == "all":
            return n
        if self.kind == "residues":
            rs = {r % self.modulus for r in self.residues}
            k = n
            while k % self.modulus not in rs:
                k += 1
            return k
        for v in self.values:
            if v >= n:
                return v
        raise ValueError(f"the finite mu list has no element >= {n}")

    @classmethod
    def even(cls) -> "Mu":
        return cls("residues", 2, (0,))

    def to_json(self) -> dict:
        if self.kind == "all":
            return {"kind": "all"}
        if self.kind == "residues":
            return {"kind": "residues", "modulus": self.modulus, "residues": list(self.residues)}
        return {"kind": "list", "values": list(self.values)}

    @classmethod
    def from_json(cls, doc: dict | None) -> "Mu":
        if not doc or doc.get("kind", "all") == "all":
            return cls()
        if doc["kind"] == "residues":
            return cls("residues", int(doc["modulus"]), tuple(int(r) for r in doc["residues"]))
        return cls("list", values=tuple(int(v) for v in doc["values"]))


@dataclass(frozen=True)
class GridConfig:
    fit_density: float = 0.1
    validation_density: float = 0.05
    box_margin: float = 1.0
    connectivity_resolution: float = 0.05


@dataclass(frozen=True)
class EnumerationConfig:
    max_m: int = 8
    max_radius: int = 4


@dataclass(frozen=True)
class DomainScene:
    domains: tuple[DomainSpec, ...]
    portions: tuple[BoundaryPortion, ...]
    center: tuple[complex, ...]
    mu: Mu = field(default_factory=Mu)
    outside_compacts: tuple[tuple[Descriptor, ...], ...] = ()
    grid: GridConfig = field(default_factory=GridConfig)
    enumeration: EnumerationConfig = field(default_factory=EnumerationConfig)

    @property
    def dim(self) -> int:
        return len(self.domains)

    def validate(self) -> list[ConnectivityCertificate]:
        """Check the scene invariants; returns the per-factor complement certificates."""
        if self.dim < 1:
            raise ValueError("a scene needs at least one domain")
        if len(self.portions) != self.dim or len(self.center) != self.dim:
            raise ValueError("domains, portions and center must have the same length")
        if self.outside_compacts and len(self.outside_compacts) != self.dim:
            raise ValueError("one list of outside compacts per factor is required")
        certs = []
        for i, (dom, por, z) in enumerate(zip(self.domains, self.portions, self.center)):
            dom.validate()
            por.validate(dom)
            if not bool(dom.contains(z)):
                raise ValueError(f"center coordinate {i + 1} = {z} is not in domain {i + 1}")
            cert = domain_complement_connected(dom, por, resolution=self.grid.connectivity_resolution)
            if cert.verdict == "disconnected":
                raise ValueError(f"complement of domain {i + 1} with its boundary portion is disconnected")
            certs.append(cert)
            for j, k in enumerate(self.outside_compacts[i] if self.outside_compacts else ()):
                pts, _ = k.sample(self.grid.validation_density)
                if pts.size and np.min(distance_to_closed_domain(dom, pts)) <= 0:
                    raise ValueError(f"outside compact {j + 1} of factor {i + 1} meets the closed domain")
        return certs

    def to_json(self) -> dict:
        return {
            "dimension": self.dim,
            "domains": [d.to_json() for d in self.domains],
            "portions": [p.to_json() for p in self.portions],
            "center": [[z.real, z.imag] for z in self.center],
            "mu": self.mu.to_json(),
            "base_outside_compacts": [[k.to_json() for k in ks] for ks in self.outside_compacts],
            "grid": {
                "fit_density": self.grid.fit_density,
                "validation_density": self.grid.validation_density,
                "box_margin": self.grid.box_margin,
                "connectivity_resolution": self.grid.connectivity_resolution,
            },
            "enumeration": {"max_m": self.enumeration.max_m, "max_radius": self.enumeration.max_radius},
        }

    def hash(self) -> str:
        """sha256 of the canonical JSON form of the geometric content."""
        doc = {k: v for k, v in self.to_json().items() if k != "grid"}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_json(cls, doc: dict) -> "DomainScene":
        domains = tuple(domain_from_json(d) for d in doc["domains"])
        portions_doc = doc.get("portions") or [None] * len(domains)
        portions = tuple(portion_from_json(p) for p in portions_doc)
        center = tuple(complex(*z) for z in doc["center"])
        outside = tuple(tuple(descriptor_from_json(k) for k in ks) for ks in doc.get("base_outside_compacts", []))
        g = doc.get("grid", {})
        grid = GridConfig(
            float(g.get("fit_density", 0.1)),
            float(g.get("validation_density", 0.05)),
            float(g.get("box_margin", 1.0)),
            float(g.get("connectivity_resolution", 0.05)),
        )
        e = doc.get("enumeration", {})
        enum = EnumerationConfig(int(e.get("max_m", 8)), int(e.get("max_radius", 4)))
        if "dimension" in doc and int(doc["dimension"]) != len(domains):
            raise ValueError("dimension does not match the number of domains")
        return cls(domains, portions, center, Mu.from_json(doc.get("mu")), outside, grid, enum)


def distance_to_closed_domain(domain: DomainSpec, z: Any) -> np.ndarray:
    """dist(z, closure of the domain): 0 on the closure, boundary distance outside.

    Since the portion lies in the boundary, this is also dist(z, domain ∪ portion closure).
    """
    z = _c(z)
    inside = np.asarray(domain.closure_contains(z), dtype=bool)
    d = np.min([c.dist(z) for c in domain.components()], axis=0)
    return np.where(inside, 0.0, d)


def default_outside_compacts(domain: DomainSpec, reach: float = 4.0, levels: int = 3) -> list[Descriptor]:
    """Balls at dyadic lattice points outside the closed domain, plus radial segments.

    A ball is kept when its distance to the closed domain exceeds its radius.
    """
    out: list[Descriptor] = []
    for lev in range(levels):
        step = 2.0 ** (-lev)
        r = step / 4
        n = int(math.floor(reach / step))
        ticks = np.arange(-n, n + 1) * step
        Z = (ticks[None, :] + 1j * ticks[:, None]).ravel()
        dist = distance_to_closed_domain(domain, Z)
        for z in Z[dist > 2 * r]:
            out.append(Ball(complex(z), r))
    for a in np.arange(8) * (math.pi / 4):
        u = complex(math.cos(a), math.sin(a))
        for t0 in np.arange(1, int(reach)):
            seg = (t0 * u, (t0 + 1) * u)
            pts = np.linspace(seg[0], seg[1], 33)
            if np.min(distance_to_closed_domain(domain, pts)) > 0.05:
                out.append(Segment(*seg))
    return out
