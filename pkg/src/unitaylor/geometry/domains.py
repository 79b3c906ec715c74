"""Planar simply connected domains, their boundary curves, and boundary portions."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

TWO_PI = 2 * math.pi


# boundary points computed from a parametrisation may land a few ulps outside
CLOSURE_SLACK = 1e-12


def _c(z: Any) -> np.ndarray:
    return np.asarray(z, dtype=complex)


def _seg_dist(z: np.ndarray, a: complex, b: complex) -> np.ndarray:
    """Distance from z to the closed segment [a, b] (a == b allowed)."""
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0:
        return np.abs(z - a)
    t = np.clip(((z - a) * np.conj(d)).real / L2, 0.0, 1.0)
    return np.abs(z - (a + t * d))


# --- boundary curves ---

class Curve:
    """A boundary component parametrized by a real t."""

    period: float | None = None

    def point(self, t: Any) -> np.ndarray:
        raise NotImplementedError

    def dist_to_arc(self, z: Any, t0: float, t1: float) -> np.ndarray:
        """Distance from z to the closed parameter arc [t0, t1]."""
        raise NotImplementedError

    def dist(self, z: Any) -> np.ndarray:
        if self.period is None:
            return self.dist_to_arc(z, -math.inf, math.inf)
        return self.dist_to_arc(z, 0.0, self.period)

    def sample_arc(self, t0: float, t1: float, h: float, reach: float = 1e3) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class CircleCurve(Curve):
    center: complex
    radius: float
    period: float = TWO_PI

    def point(self, t: Any) -> np.ndarray:
        return self.center + self.radius * np.exp(1j * np.asarray(t, dtype=float))

    def dist_to_arc(self, z: Any, t0: float, t1: float) -> np.ndarray:
        z = _c(z)
        w = z - self.center
        on_circle = np.abs(np.abs(w) - self.radius)
        if t1 - t0 >= TWO_PI:
            return on_circle
        delta = np.mod(np.angle(w) - t0, TWO_PI)
        inside = delta <= (t1 - t0)
        ends = np.minimum(np.abs(z - complex(self.point(t0))), np.abs(z - complex(self.point(t1))))
        return np.where(inside, on_circle, ends)

    def sample_arc(self, t0: float, t1: float, h: float, reach: float = 1e3) -> np.ndarray:
        length = min(t1 - t0, TWO_PI) * self.radius
        n = max(2, int(math.ceil(length / h)) + 1)
        return self.point(np.linspace(t0, t0 + min(t1 - t0, TWO_PI), n))


@dataclass(frozen=True)
class LineCurve(Curve):
    origin: complex
    direction: complex  # unit vector
    period: None = None

    def point(self, t: Any) -> np.ndarray:
        return self.origin + np.asarray(t, dtype=float) * self.direction

    def param(self, z: Any) -> np.ndarray:
        return ((_c(z) - self.origin) * np.conj(self.direction)).real

    def dist_to_arc(self, z: Any, t0: float, t1: float) -> np.ndarray:
        z = _c(z)
        t = np.clip(self.param(z), t0, t1)
        return np.abs(z - self.point(t))

    def sample_arc(self, t0: float, t1: float, h: float, reach: float = 1e3) -> np.ndarray:
        a, b = max(t0, -reach), min(t1, reach)
        if a > b:
            return np.zeros(0, dtype=complex)
        n = max(2, int(math.ceil((b - a) / h)) + 1)
        return self.point(np.linspace(a, b, n))


@dataclass(frozen=True)
class PolygonCurve(Curve):
    vertices: tuple[complex, ...]

    @property
    def period(self) -> float:  # type: ignore[override]
        return float(len(self.vertices))

    def _edge(self, k: int) -> tuple[complex, complex]:
        n = len(self.vertices)
        return self.vertices[k % n], self.vertices[(k + 1) % n]

    def point(self, t: Any) -> np.ndarray:
        t = np.mod(np.asarray(t, dtype=float), self.period)
        k = np.floor(t).astype(int)
        frac = t - k
        v = np.asarray(self.vertices, dtype=complex)
        return v[k] + frac * (v[(k + 1) % len(v)] - v[k])

    def _pieces(self, t0: float, t1: float) -> list[tuple[complex, complex]]:
        if t1 - t0 >= self.period:
            return [self._edge(k) for k in range(len(self.vertices))]
        out = []
        t = t0
        while t < t1:
            nxt = min(math.floor(t) + 1.0, t1)
            out.append((complex(self.point(t)), complex(self.point(nxt))))
            t = nxt
        if not out:
            p = complex(self.point(t0))
            out.append((p, p))
        return out

    def dist_to_arc(self, z: Any, t0: float, t1: float) -> np.ndarray:
        z = _c(z)
        best = np.full(z.shape, np.inf)
        for a, b in self._pieces(t0, t1):
            best = np.minimum(best, _seg_dist(z, a, b))
        return best

    def sample_arc(self, t0: float, t1: float, h: float, reach: float = 1e3) -> np.ndarray:
        pts = []
        for a, b in self._pieces(t0, t1):
            n = max(2, int(math.ceil(abs(b - a) / h)) + 1)
            pts.append(a + np.linspace(0, 1, n) * (b - a))
        return np.concatenate(pts)


# --- domains ---

class DomainSpec:
    kind: str = ""

    def contains(self, z: Any) -> np.ndarray:
        """Membership in the open domain."""
        raise NotImplementedError

    def closure_contains(self, z: Any) -> np.ndarray:
        raise NotImplementedError

    def components(self) -> list[Curve]:
        raise NotImplementedError

    def extent(self) -> float:
        """A radius around 0 that shows all the finite features of the domain."""
        raise NotImplementedError

    def validate(self) -> None:
        pass

    def to_json(self) -> dict:
        raise NotImplementedError


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True)
class Disk(DomainSpec):
    center: complex
    radius: float
    kind: str = field(default="disk", init=False)

    def contains(self, z: Any) -> np.ndarray:
        return np.abs(_c(z) - self.center) < self.radius

    def closure_contains(self, z: Any) -> np.ndarray:
        return np.abs(_c(z) - self.center) <= self.radius + CLOSURE_SLACK

    def components(self) -> list[Curve]:
        return [CircleCurve(complex(self.center), float(self.radius))]

    def extent(self) -> float:
        return abs(self.center) + self.radius

    def validate(self) -> None:
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def to_json(self) -> dict:
        return {"kind": "disk", "center": _pair(complex(self.center)), "radius": float(self.radius)}


def unit(angle: float) -> complex:
    """e^{i angle}, exact at multiples of a quarter turn."""
    q = angle / (math.pi / 2)
    if abs(q - round(q)) < 1e-12:
        return (1, 1j, -1, -1j)[int(round(q)) % 4]
    return cmath.exp(1j * angle)


@dataclass(frozen=True)
class HalfPlane(DomainSpec):
    """{z : Re(z e^{-i angle}) > offset}; the boundary is traversed along -i e^{i angle}."""

    angle: float
    offset: float
    kind: str = field(default="half-plane", init=False)

    def _normal(self) -> complex:
        return unit(self.angle)

    def _h(self, z: Any) -> np.ndarray:
        return (_c(z) * np.conj(self._normal())).real

    def contains(self, z: Any) -> np.ndarray:
        return self._h(z) > self.offset

    def closure_contains(self, z: Any) -> np.ndarray:
        return self._h(z) >= self.offset - CLOSURE_SLACK

    def components(self) -> list[Curve]:
        n = self._normal()
        return [LineCurve(self.offset * n, -1j * n)]

    def extent(self) -> float:
        return abs(self.offset) + 1.0

    def to_json(self) -> dict:
        return {"kind": "half-plane", "angle": float(self.angle), "offset": float(self.offset)}


@dataclass(frozen=True)
class Strip(DomainSpec):
    """{z : |Im(z e^{-i angle})| < half_width}; component 0 is the lower line, 1 the upper."""

    angle: float
    half_width: float
    kind: str = field(default="strip", init=False)

    def _u(self) -> complex:
        return unit(self.angle)

    def _h(self, z: Any) -> np.ndarray:
        return (_c(z) * np.conj(self._u())).imag

    def contains(self, z: Any) -> np.ndarray:
        return np.abs(self._h(z)) < self.half_width

    def closure_contains(self, z: Any) -> np.ndarray:
        return np.abs(self._h(z)) <= self.half_width + CLOSURE_SLACK

    def components(self) -> list[Curve]:
        u = self._u()
        return [LineCurve(-1j * self.half_width * u, u), LineCurve(1j * self.half_width * u, u)]

    def extent(self) -> float:
        return self.half_width + 1.0

    def validate(self) -> None:
        if not self.half_width > 0:
            raise ValueError("strip half-width must be positive")

    def to_json(self) -> dict:
        return {"kind": "strip", "angle": float(self.angle), "half_width": float(self.half_width)}


def _segments_cross(a: complex, b: complex, c: complex, d: complex) -> bool:
    def orient(p: complex, q: complex, r: complex) -> float:
        return ((q - p) * np.conj(r - p)).imag

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    for p, q, r, o in ((a, b, c, o1), (a, b, d, o2), (c, d, a, o3), (c, d, b, o4)):
        if o == 0 and min(p.real, q.real) <= r.real <= max(p.real, q.real) and \
                min(p.imag, q.imag) <= r.imag <= max(p.imag, q.imag):
            return True
    return False


@dataclass(frozen=True)
class Polygon(DomainSpec):
    vertices: tuple[complex, ...]
    kind: str = field(default="polygon", init=False)

    def _boundary_dist(self, z: np.ndarray) -> np.ndarray:
        return self.components()[0].dist(z)

    def _inside(self, z: np.ndarray) -> np.ndarray:
        # even-odd ray casting to the right
        x, y = z.real, z.imag
        inside = np.zeros(z.shape, dtype=bool)
        v = self.vertices
        n = len(v)
        for k in range(n):
            a, b = v[k], v[(k + 1) % n]
            cond = (a.imag > y) != (b.imag > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            inside ^= cond & (x < xint)
        return inside

    def contains(self, z: Any) -> np.ndarray:
        z = _c(z)
        return self._inside(z) & (self._boundary_dist(z) > 0)

    def closure_contains(self, z: Any) -> np.ndarray:
        z = _c(z)
        return self._inside(z) | (self._boundary_dist(z) <= CLOSURE_SLACK)

    def components(self) -> list[Curve]:
        return [PolygonCurve(tuple(complex(v) for v in self.vertices))]

    def extent(self) -> float:
        return max(abs(v) for v in self.vertices)

    def validate(self) -> None:
        v = self.vertices
        n = len(v)
        if n < 3:
            raise ValueError("polygon needs at least 3 vertices")
        area = 0.5 * sum((v[k] * np.conj(v[(k + 1) % n])).imag for k in range(n))
        if abs(area) < 1e-12:
            raise ValueError("polygon is degenerate")
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                    raise ValueError(f"polygon is not simple: edges {i} and {j} meet")

    def to_json(self) -> dict:
        return {"kind": "polygon", "vertices": [_pair(complex(z)) for z in self.vertices]}


def domain_from_json(doc: dict) -> DomainSpec:
    kind = doc["kind"]
    if kind == "disk":
        dom: DomainSpec = Disk(complex(*doc["center"]), float(doc["radius"]))
    elif kind == "half-plane":
        dom = HalfPlane(float(doc["angle"]), float(doc["offset"]))
    elif kind == "strip":
        dom = Strip(float(doc["angle"]), float(doc["half_width"]))
    elif kind == "polygon":
        dom = Polygon(tuple(complex(*p) for p in doc["vertices"]))
    else:
        raise ValueError(f"unknown domain kind {kind!r}")
    dom.validate()
    return dom


# --- boundary portions ---

@dataclass(frozen=True)
class Arc:
    """Parameter interval (t0, t1) on one boundary component; endpoints open unless marked."""

    component: int
    t0: float
    t1: float
    closed: tuple[bool, bool] = (False, False)

    def to_json(self) -> dict:
        out: dict = {"component": self.component, "t0": _num(self.t0), "t1": _num(self.t1)}
        if any(self.closed):
            out["closed"] = list(self.closed)
        return out


def _num(t: float) -> float | str:
    if math.isinf(t):
        return "inf" if t > 0 else "-inf"
    return float(t)


def _parse_num(t: Any) -> float:
    return float(t)


@dataclass(frozen=True)
class DenseMarks:
    """A countable dense subset of one boundary component, e.g. its rational parameters."""

    component: int
    label: str = "rationals"

    def to_json(self) -> dict:
        return {"component": self.component, "label": self.label}


@dataclass(frozen=True)
class BoundaryPortion:
    arcs: tuple[Arc, ...] = ()
    dense: tuple[DenseMarks, ...] = ()

    def is_empty(self) -> bool:
        return not self.arcs and not self.dense

    def validate(self, domain: DomainSpec) -> None:
        comps = domain.components()
        for a in self.arcs:
            if not 0 <= a.component < len(comps):
                raise ValueError(f"arc refers to missing boundary component {a.component}")
            if not a.t0 < a.t1:
                raise ValueError(f"arc ({a.t0}, {a.t1}) is empty")
            if comps[a.component].period is not None and (math.isinf(a.t0) or math.isinf(a.t1)):
                raise ValueError("closed boundary curves need finite arc parameters")
        for dm in self.dense:
            if not 0 <= dm.component < len(comps):
                raise ValueError(f"dense marks refer to missing component {dm.component}")
        for c, curve in enumerate(comps):
            ivs = _normalized(self.arcs, c, curve.period)
            for (a0, a1), (b0, b1) in zip(ivs, ivs[1:]):
                if b0 < a1:
                    raise ValueError(f"arcs overlap on component {c}")
            if curve.period is not None and len(ivs) > 1 and ivs[0][0] + curve.period < ivs[-1][1]:
                raise ValueError(f"arcs overlap on component {c}")

    def to_json(self) -> dict:
        out: dict = {"arcs": [a.to_json() for a in self.arcs]}
        if self.dense:
            out["dense_marks"] = [d.to_json() for d in self.dense]
        return out


def portion_from_json(doc: dict | None) -> BoundaryPortion:
    if not doc:
        return BoundaryPortion()
    arcs = tuple(
        Arc(int(a["component"]), _parse_num(a["t0"]), _parse_num(a["t1"]), tuple(a.get("closed", (False, False))))
        for a in doc.get("arcs", [])
    )
    dense = tuple(DenseMarks(int(d["component"]), d.get("label", "rationals")) for d in doc.get("dense_marks", []))
    return BoundaryPortion(arcs, dense)


def _normalized_marked(arcs: tuple[Arc, ...], comp: int, period: float | None) -> list[tuple[float, float, bool, bool]]:
    ivs = []
    for a in arcs:
        if a.component != comp:
            continue
        if period is None:
            ivs.append((a.t0, a.t1, *a.closed))
        elif a.t1 - a.t0 >= period:
            ivs.append((0.0, period, True, True))
        else:
            s = a.t0 % period
            ivs.append((s, s + (a.t1 - a.t0), *a.closed))
    return sorted(ivs)


def _normalized(arcs: tuple[Arc, ...], comp: int, period: float | None) -> list[tuple[float, float]]:
    return [(a, b) for a, b, _, _ in _normalized_marked(arcs, comp, period)]


def covers_component(portion: BoundaryPortion, comp: int, period: float | None) -> bool:
    ivs = _normalized(portion.arcs, comp, period)
    if period is None:
        return any(a == -math.inf and b == math.inf for a, b in ivs)
    return any(b - a >= period for a, b in ivs)


def complement_pieces(domain: DomainSpec, portion: BoundaryPortion) -> list[tuple[int, float, float]]:
    """Closed parameter intervals making up the boundary minus the portion (closure taken)."""
    pieces = []
    for c, curve in enumerate(domain.components()):
        if any(d.component == c for d in portion.dense):
            # the complement of a countable dense set is dense: its closure is everything
            pieces.append((c, *_full(curve)))
            continue
        if covers_component(portion, c, curve.period):
            continue
        ivs = _normalized_marked(portion.arcs, c, curve.period)
        if not ivs:
            pieces.append((c, *_full(curve)))
            continue
        if curve.period is None:
            gaps = [(-math.inf, False, ivs[0][0], ivs[0][2])]
            gaps += [(b, cb, na, ca) for (_, b, _, cb), (na, _, ca, _) in zip(ivs, ivs[1:])]
            gaps.append((ivs[-1][1], ivs[-1][3], math.inf, False))
        else:
            P = curve.period
            nxt = ivs[1:] + [(ivs[0][0] + P, 0.0, ivs[0][2], False)]
            gaps = [(b, cb, na, ca) for (_, b, _, cb), (na, _, ca, _) in zip(ivs, nxt)]
        for lo, lo_in_s, hi, hi_in_s in gaps:
            if lo > hi or (lo == hi and (math.isinf(lo) or lo_in_s or hi_in_s)):
                continue
            pieces.append((c, lo, hi))
    return pieces


def _full(curve: Curve) -> tuple[float, float]:
    return (-math.inf, math.inf) if curve.period is None else (0.0, curve.period)


def dist_to_boundary_minus(domain: DomainSpec, portion: BoundaryPortion, z: Any) -> np.ndarray:
    """dist(z, boundary minus S); +inf when S is the whole boundary."""
    z = _c(z)
    comps = domain.components()
    best = np.full(z.shape, np.inf)
    for c, t0, t1 in complement_pieces(domain, portion):
        best = np.minimum(best, comps[c].dist_to_arc(z, t0, t1))
    return best


@dataclass(frozen=True)
class PortionClosure:
    """The closed set S-bar of a boundary portion, as a distance oracle."""

    domain: DomainSpec
    portion: BoundaryPortion

    def dist(self, z: Any) -> np.ndarray:
        z = _c(z)
        comps = self.domain.components()
        best = np.full(z.shape, np.inf)
        for a in self.portion.arcs:
            best = np.minimum(best, comps[a.component].dist_to_arc(z, a.t0, a.t1))
        for d in self.portion.dense:
            best = np.minimum(best, comps[d.component].dist(z))
        return best

    def is_empty(self) -> bool:
        return self.portion.is_empty()

    def to_json(self) -> dict:
        return {"kind": "portion-closure", "domain": self.domain.to_json(), "portion": self.portion.to_json()}
