"""Constructive descriptors of planar compacts and their sampled representations.

Area-like sets are sampled on the lattice hZ^2 (anchored at 0, so nested sets
share lattice points) plus boundary points found by bisection along lattice
edges. Every stored point satisfies the descriptor's membership predicate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Any

import numpy as np

from .domains import BoundaryPortion, DomainSpec, PortionClosure, _c, _pair, _seg_dist, dist_to_boundary_minus
from .domains import domain_from_json, portion_from_json

BISECTION_STEPS = 40


def _dedupe(points: np.ndarray, flags: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    if flags is None:
        flags = np.zeros(points.shape, dtype=bool)
    if points.size == 0:
        return points, flags
    key = np.round(points.real, 12) + 1j * np.round(points.imag, 12)
    order = np.lexsort((key.imag, key.real))
    key, points, flags = key[order], points[order], flags[order]
    keep = np.ones(points.shape, dtype=bool)
    keep[1:] = key[1:] != key[:-1]
    # a duplicate flagged as boundary keeps the flag
    idx = np.cumsum(keep) - 1
    merged = np.zeros(int(keep.sum()), dtype=bool)
    np.logical_or.at(merged, idx, flags)
    return points[keep], merged


def _bisect(contains, inside: np.ndarray, outside: np.ndarray) -> np.ndarray:
    lo, hi = inside.copy(), outside.copy()
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        m = contains(mid)
        lo = np.where(m, mid, lo)
        hi = np.where(m, hi, mid)
    return lo


def lattice_sample(contains, bbox: tuple[float, float, float, float], h: float) -> tuple[np.ndarray, np.ndarray]:
    """Lattice points of spacing h inside the set plus bisected boundary points."""
    x0, x1, y0, y1 = bbox
    i0, i1 = math.floor(x0 / h) - 1, math.ceil(x1 / h) + 1
    j0, j1 = math.floor(y0 / h) - 1, math.ceil(y1 / h) + 1
    xs = np.arange(i0, i1 + 1) * h
    ys = np.arange(j0, j1 + 1) * h
    Z = xs[None, :] + 1j * ys[:, None]
    mask = np.asarray(contains(Z), dtype=bool)
    inner = Z[mask]
    bpts = []
    for axis in (0, 1):
        a = mask[:, :-1] if axis == 1 else mask[:-1, :]
        b = mask[:, 1:] if axis == 1 else mask[1:, :]
        za = Z[:, :-1] if axis == 1 else Z[:-1, :]
        zb = Z[:, 1:] if axis == 1 else Z[1:, :]
        sel = a & ~b
        if sel.any():
            bpts.append(_bisect(contains, za[sel], zb[sel]))
        sel = b & ~a
        if sel.any():
            bpts.append(_bisect(contains, zb[sel], za[sel]))
    # lattice points with an outside neighbour are boundary points too
    pad = np.pad(mask, 1, constant_values=False)
    interior = pad[1:-1, 1:-1] & pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:]
    edge_flags = ~interior[mask]
    bnd = np.concatenate(bpts) if bpts else np.zeros(0, dtype=complex)
    pts = np.concatenate([inner, bnd])
    flags = np.concatenate([edge_flags, np.ones(bnd.shape, dtype=bool)])
    return pts, flags


def chain_filter(contains, chain: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Points of an ordered chain that satisfy the predicate, plus bisected cut points."""
    if chain.size == 0:
        return chain, np.zeros(0, dtype=bool)
    m = np.asarray(contains(chain), dtype=bool)
    out = [chain[m]]
    cut_in = m[:-1] & ~m[1:]
    cut_out = ~m[:-1] & m[1:]
    if cut_in.any():
        out.append(_bisect(contains, chain[:-1][cut_in], chain[1:][cut_in]))
    if cut_out.any():
        out.append(_bisect(contains, chain[1:][cut_out], chain[:-1][cut_out]))
    pts = np.concatenate(out)
    return pts, np.ones(pts.shape, dtype=bool)


# --- descriptors ---

class Descriptor:
    kind = ""
    curve_like = False

    def contains(self, z: Any) -> np.ndarray:
        raise NotImplementedError

    def bbox(self) -> tuple[float, float, float, float] | None:
        raise NotImplementedError

    def chains(self, h: float) -> list[np.ndarray]:
        """Ordered point chains covering a curve-like set."""
        raise NotImplementedError

    def explicit_boundary(self, h: float) -> np.ndarray:
        """Exactly known boundary points of an area-like set (may be empty)."""
        return np.zeros(0, dtype=complex)

    def sample(self, h: float) -> tuple[np.ndarray, np.ndarray]:
        """(points, boundary flags) at spacing h; every point satisfies contains()."""
        if self.curve_like:
            ch = [c for c in self.chains(h) if c.size]
            pts = np.concatenate(ch) if ch else np.zeros(0, dtype=complex)
            return _dedupe(pts, np.ones(pts.shape, dtype=bool))
        box = self.bbox()
        if box is None:
            return np.zeros(0, dtype=complex), np.zeros(0, dtype=bool)
        pts, flags = lattice_sample(self.contains, box, h)
        eb = self.explicit_boundary(h)
        if eb.size:
            eb = eb[np.asarray(self.contains(eb), dtype=bool)]
            pts = np.concatenate([pts, eb])
            flags = np.concatenate([flags, np.ones(eb.shape, dtype=bool)])
        return _dedupe(pts, flags)

    def dist(self, z: Any) -> np.ndarray:
        raise NotImplementedError(f"{self.kind} has no distance oracle")

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Empty(Descriptor):
    kind: str = field(default="empty", init=False)

    def contains(self, z: Any) -> np.ndarray:
        return np.zeros(np.shape(z), dtype=bool)

    def bbox(self) -> None:
        return None

    def to_json(self) -> dict:
        return {"kind": "empty"}


@dataclass(frozen=True)
class PointSet(Descriptor):
    points: tuple[complex, ...]
    kind: str = field(default="points", init=False)
    curve_like = True

    def contains(self, z: Any) -> np.ndarray:
        z = _c(z)
        return np.isin(z, np.asarray(self.points, dtype=complex))

    def bbox(self) -> tuple[float, float, float, float] | None:
        if not self.points:
            return None
        p = np.asarray(self.points)
        return p.real.min(), p.real.max(), p.imag.min(), p.imag.max()

    def chains(self, h: float) -> list[np.ndarray]:
        return [np.asarray(self.points, dtype=complex)]

    def dist(self, z: Any) -> np.ndarray:
        z = _c(z)
        if not self.points:
            return np.full(z.shape, np.inf)
        return np.min(np.abs(z[..., None] - np.asarray(self.points)), axis=-1)

    def to_json(self) -> dict:
        return {"kind": "points", "points": [_pair(complex(p)) for p in self.points]}


@dataclass(frozen=True)
class Polyline(Descriptor):
    """A closed segment (two vertices) or a chain of segments."""

    vertices: tuple[complex, ...]
    kind: str = field(default="polyline", init=False)
    curve_like = True

    def __post_init__(self) -> None:
        if len(self.vertices) < 2:
            raise ValueError("a polyline needs at least two vertices")

    def dist(self, z: Any) -> np.ndarray:
        z = _c(z)
        v = self.vertices
        best = np.full(z.shape, np.inf)
        for a, b in zip(v, v[1:]):
            best = np.minimum(best, _seg_dist(z, a, b))
        return best

    def contains(self, z: Any) -> np.ndarray:
        return self.dist(z) <= 1e-12

    def bbox(self) -> tuple[float, float, float, float]:
        p = np.asarray(self.vertices)
        return p.real.min(), p.real.max(), p.imag.min(), p.imag.max()

    def chains(self, h: float) -> list[np.ndarray]:
        parts = []
        for a, b in zip(self.vertices, self.vertices[1:]):
            n = max(2, int(math.ceil(abs(b - a) / h)) + 1)
            parts.append(a + np.linspace(0.0, 1.0, n) * (b - a))
        return [np.concatenate(parts)]

    def to_json(self) -> dict:
        if len(self.vertices) == 2:
            return {"kind": "segment", "a": _pair(complex(self.vertices[0])), "b": _pair(complex(self.vertices[1]))}
        return {"kind": "polyline", "vertices": [_pair(complex(v)) for v in self.vertices]}


def Segment(a: complex, b: complex) -> Polyline:
    return Polyline((complex(a), complex(b)))


@dataclass(frozen=True)
class Ball(Descriptor):
    center: complex
    radius: float
    kind: str = field(default="ball", init=False)

    def contains(self, z: Any) -> np.ndarray:
        return np.abs(_c(z) - self.center) <= self.radius

    def bbox(self) -> tuple[float, float, float, float]:
        c, r = complex(self.center), self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    def explicit_boundary(self, h: float) -> np.ndarray:
        if self.radius == 0:
            return np.array([complex(self.center)])
        n = max(8, int(math.ceil(2 * math.pi * self.radius / h)))
        pts = self.center + self.radius * np.exp(2j * np.pi * np.arange(n) / n)
        # rounding can put a circle point a hair outside; pull it back in
        return self.center + (pts - self.center) * (1 - 1e-15)

    def dist(self, z: Any) -> np.ndarray:
        return np.maximum(np.abs(_c(z) - self.center) - self.radius, 0.0)

    def to_json(self) -> dict:
        return {"kind": "ball", "center": _pair(complex(self.center)), "radius": float(self.radius)}


@dataclass(frozen=True)
class Annulus(Descriptor):
    center: complex
    inner: float
    outer: float
    kind: str = field(default="annulus", init=False)

    def contains(self, z: Any) -> np.ndarray:
        r = np.abs(_c(z) - self.center)
        return (r >= self.inner) & (r <= self.outer)

    def bbox(self) -> tuple[float, float, float, float]:
        c, r = complex(self.center), self.outer
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    def explicit_boundary(self, h: float) -> np.ndarray:
        out = []
        for r, s in ((self.inner, 1 + 1e-15), (self.outer, 1 - 1e-15)):
            n = max(8, int(math.ceil(2 * math.pi * r / h)))
            out.append(self.center + s * r * np.exp(2j * np.pi * np.arange(n) / n))
        return np.concatenate(out)

    def to_json(self) -> dict:
        return {"kind": "annulus", "center": _pair(complex(self.center)), "inner": self.inner, "outer": self.outer}


@dataclass(frozen=True)
class Box(Descriptor):
    x0: float
    x1: float
    y0: float
    y1: float
    kind: str = field(default="box", init=False)

    def contains(self, z: Any) -> np.ndarray:
        z = _c(z)
        return (z.real >= self.x0) & (z.real <= self.x1) & (z.imag >= self.y0) & (z.imag <= self.y1)

    def bbox(self) -> tuple[float, float, float, float]:
        return self.x0, self.x1, self.y0, self.y1

    def explicit_boundary(self, h: float) -> np.ndarray:
        c = [complex(self.x0, self.y0), complex(self.x1, self.y0), complex(self.x1, self.y1), complex(self.x0, self.y1)]
        return Polyline((*c, c[0])).chains(h)[0]

    def dist(self, z: Any) -> np.ndarray:
        z = _c(z)
        dx = np.maximum(np.maximum(self.x0 - z.real, z.real - self.x1), 0)
        dy = np.maximum(np.maximum(self.y0 - z.imag, z.imag - self.y1), 0)
        return np.hypot(dx, dy)

    def to_json(self) -> dict:
        return {"kind": "box", "x0": self.x0, "x1": self.x1, "y0": self.y0, "y1": self.y1}


@dataclass(frozen=True)
class Union(Descriptor):
    parts: tuple[Descriptor, ...]
    kind: str = field(default="union", init=False)

    def contains(self, z: Any) -> np.ndarray:
        out = np.zeros(np.shape(z), dtype=bool)
        for p in self.parts:
            out |= p.contains(z)
        return out

    def bbox(self) -> tuple[float, float, float, float] | None:
        boxes = [b for b in (p.bbox() for p in self.parts) if b is not None]
        if not boxes:
            return None
        return min(b[0] for b in boxes), max(b[1] for b in boxes), min(b[2] for b in boxes), max(b[3] for b in boxes)

    def sample(self, h: float) -> tuple[np.ndarray, np.ndarray]:
        got = [p.sample(h) for p in self.parts]
        if not got:
            return np.zeros(0, dtype=complex), np.zeros(0, dtype=bool)
        return _dedupe(np.concatenate([g[0] for g in got]), np.concatenate([g[1] for g in got]))

    def dist(self, z: Any) -> np.ndarray:
        return np.min([p.dist(z) for p in self.parts], axis=0)

    def to_json(self) -> dict:
        return {"kind": "union", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class ExhaustionCell(Descriptor):
    """closure(Omega) ∩ closed ball(0, n) ∩ {dist(z, boundary minus S) >= 1/n}."""

    domain: DomainSpec
    portion: BoundaryPortion
    n: int
    kind: str = field(default="exhaustion", init=False)

    def contains(self, z: Any) -> np.ndarray:
        z = _c(z)
        return (
            np.asarray(self.domain.closure_contains(z), dtype=bool)
            & (np.abs(z) <= self.n)
            & (dist_to_boundary_minus(self.domain, self.portion, z) >= 1.0 / self.n)
        )

    def bbox(self) -> tuple[float, float, float, float]:
        n = float(self.n)
        return -n, n, -n, n

    def explicit_boundary(self, h: float) -> np.ndarray:
        # the circle |z| = n is part of the boundary whenever it meets the set
        m = max(8, int(math.ceil(2 * math.pi * self.n / h)))
        return self.n * (1 - 1e-15) * np.exp(2j * np.pi * np.arange(m) / m)

    def to_json(self) -> dict:
        return {"kind": "exhaustion", "domain": self.domain.to_json(), "portion": self.portion.to_json(), "n": self.n}


@dataclass(frozen=True)
class Shrunk(Descriptor):
    """base ∩ {dist(z, closed) >= 1/m}."""

    base: Descriptor
    closed: Any  # anything with dist(z)
    m: int
    kind: str = field(default="shrunk", init=False)

    @property
    def curve_like(self) -> bool:  # type: ignore[override]
        return self.base.curve_like

    def contains(self, z: Any) -> np.ndarray:
        z = _c(z)
        return np.asarray(self.base.contains(z), dtype=bool) & (self.closed.dist(z) >= 1.0 / self.m)

    def bbox(self) -> tuple[float, float, float, float] | None:
        return self.base.bbox()

    def chains(self, h: float) -> list[np.ndarray]:
        out = []
        for ch in self.base.chains(h):
            m = np.asarray(self.contains(ch), dtype=bool)
            if m.all():
                out.append(ch)
            else:
                out.append(chain_filter(self.contains, ch)[0])
        return out

    def explicit_boundary(self, h: float) -> np.ndarray:
        return self.base.explicit_boundary(h)

    def to_json(self) -> dict:
        return {"kind": "shrunk", "base": self.base.to_json(), "closed": self.closed.to_json(), "m": self.m}


def descriptor_from_json(doc: dict) -> Descriptor:
    kind = doc["kind"]
    if kind == "empty":
        return Empty()
    if kind == "points":
        return PointSet(tuple(complex(*p) for p in doc["points"]))
    if kind == "point":
        return PointSet((complex(*doc["z"]),))
    if kind == "segment":
        return Segment(complex(*doc["a"]), complex(*doc["b"]))
    if kind == "polyline":
        return Polyline(tuple(complex(*p) for p in doc["vertices"]))
    if kind == "ball":
        if float(doc["radius"]) < 0:
            raise ValueError("ball radius must be nonnegative")
        return Ball(complex(*doc["center"]), float(doc["radius"]))
    if kind == "annulus":
        return Annulus(complex(*doc["center"]), float(doc["inner"]), float(doc["outer"]))
    if kind == "box":
        return Box(float(doc["x0"]), float(doc["x1"]), float(doc["y0"]), float(doc["y1"]))
    if kind == "union":
        return Union(tuple(descriptor_from_json(p) for p in doc["parts"]))
    if kind == "exhaustion":
        return ExhaustionCell(domain_from_json(doc["domain"]), portion_from_json(doc["portion"]), int(doc["n"]))
    if kind == "shrunk":
        return Shrunk(descriptor_from_json(doc["base"]), closed_set_from_json(doc["closed"]), int(doc["m"]))
    raise ValueError(f"unknown compact kind {kind!r}")


def closed_set_from_json(doc: dict) -> Any:
    if doc["kind"] == "portion-closure":
        return PortionClosure(domain_from_json(doc["domain"]), portion_from_json(doc["portion"]))
    return descriptor_from_json(doc)


# --- sampled compacts ---

@dataclass(frozen=True)
class PlanarCompact:
    descriptor: Descriptor
    fit_points: np.ndarray = field(repr=False)
    validation_points: np.ndarray = field(repr=False)
    h_grid: float
    fit_boundary: np.ndarray = field(repr=False)
    validation_boundary: np.ndarray = field(repr=False)

    @classmethod
    def from_descriptor(cls, desc: Descriptor, h: float, fit_h: float | None = None) -> "PlanarCompact":
        if not h > 0:
            raise ValueError("grid spacing must be positive")
        vp, vb = desc.sample(h)
        fp, fb = desc.sample(fit_h if fit_h is not None else 2 * h)
        return cls(desc, fp, vp, float(h), fb, vb)

    def is_empty(self) -> bool:
        return self.validation_points.size == 0

    def refined_fit(self, min_count: int, boundary_only: bool = False) -> np.ndarray:
        """Fit points, resampled finer until at least min_count are available."""
        pts, flags = self.fit_points, self.fit_boundary
        h = 2 * self.h_grid
        for _ in range(12):
            sel = pts[flags] if boundary_only and not self.descriptor.curve_like else pts
            if sel.size >= min_count or self.descriptor.kind == "points":
                return sel
            h /= 2
            pts, flags = self.descriptor.sample(h)
        return pts[flags] if boundary_only and not self.descriptor.curve_like else pts

    def extremal_points(self) -> np.ndarray:
        """Validation points on which a holomorphic modulus attains its max."""
        if self.descriptor.curve_like:
            return self.validation_points
        return self.validation_points[self.validation_boundary]

    def centroid_and_radius(self) -> tuple[complex, float]:
        p = self.validation_points
        if p.size == 0:
            return 0j, 1.0
        c = complex(0.5 * (p.real.min() + p.real.max()), 0.5 * (p.imag.min() + p.imag.max()))
        r = float(np.max(np.abs(p - c)))
        return c, (r if r > 0 else 1.0)

    def resampled(self, factor: float) -> "PlanarCompact":
        """Fresh grids at spacing h / factor."""
        return PlanarCompact.from_descriptor(self.descriptor, self.h_grid / factor)

    def to_csv_rows(self, factor_index: int) -> list[tuple[float, float, int, str]]:
        rows = [(float(z.real), float(z.imag), factor_index, "fit") for z in self.fit_points]
        rows += [(float(z.real), float(z.imag), factor_index, "validation") for z in self.validation_points]
        return rows


@dataclass(frozen=True)
class ProductCompact:
    factors: tuple[PlanarCompact, ...]
    certificates: tuple[Any, ...] = ()

    @property
    def dim(self) -> int:
        return len(self.factors)

    def is_empty(self) -> bool:
        return any(f.is_empty() for f in self.factors)

    def _product(self, parts: list[np.ndarray]) -> np.ndarray:
        if any(p.size == 0 for p in parts):
            return np.zeros((0, self.dim), dtype=complex)
        if len(parts) == 1:
            return parts[0].reshape(-1, 1)
        return np.array(list(iproduct(*parts)), dtype=complex)

    def validation_array(self) -> np.ndarray:
        """Points for sup norms: all points for d = 1, products of extremal points otherwise."""
        if self.dim == 1:
            return self.factors[0].validation_points.reshape(-1, 1)
        return self._product([f.extremal_points() for f in self.factors])

    def fit_array(self, min_count: int = 0) -> np.ndarray:
        if self.dim == 1:
            return self.factors[0].refined_fit(min_count).reshape(-1, 1)
        per = max(4, int(math.ceil(min_count ** (1.0 / self.dim))))
        return self._product([f.refined_fit(per, boundary_only=True) for f in self.factors])

    def resampled(self, factor: float) -> "ProductCompact":
        return ProductCompact(tuple(f.resampled(factor) for f in self.factors), self.certificates)

    def to_json(self) -> dict:
        return {"factors": [f.descriptor.to_json() for f in self.factors]}
