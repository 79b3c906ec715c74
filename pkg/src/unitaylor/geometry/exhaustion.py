"""Exhaustions of a domain plus boundary portion, shrinking, and the absorbing-family test."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compacts import ExhaustionCell, PlanarCompact, Shrunk
from .domains import BoundaryPortion, DomainSpec, PortionClosure, _normalized_marked

DEFAULT_H = 0.05


def exhaustion_set(domain: DomainSpec, portion: BoundaryPortion, n: int, h: float = DEFAULT_H) -> PlanarCompact:
    """The n-th compact of the exhaustion of domain ∪ portion; may be empty."""
    if n < 1:
        raise ValueError("exhaustion index must be >= 1")
    return PlanarCompact.from_descriptor(ExhaustionCell(domain, portion, int(n)), h)


def shrink_from_portion(k: PlanarCompact, closure: PortionClosure | object, m: int) -> PlanarCompact:
    """k ∩ {z : dist(z, closure) >= 1/m}."""
    if m < 1:
        raise ValueError("shrink parameter must be >= 1")
    if isinstance(closure, PortionClosure) and closure.is_empty():
        return k
    return PlanarCompact.from_descriptor(Shrunk(k.descriptor, closure, int(m)), k.h_grid)


def absorption_level(domain: DomainSpec, portion: BoundaryPortion, pts: np.ndarray, n_max: int = 64) -> int | None:
    """Smallest n <= n_max whose exhaustion cell contains every point, if any."""
    for n in range(1, n_max + 1):
        if np.all(ExhaustionCell(domain, portion, n).contains(pts)):
            return n
    return None


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    clopen: bool
    witness: complex | None = None
    witness_param: tuple[int, float] | None = None
    reason: str = ""
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out: dict = {"feasible": self.feasible, "clopen": self.clopen, "reason": self.reason}
        if self.witness is not None:
            out["witness"] = [self.witness.real, self.witness.imag]
            out["witness_component"], out["witness_parameter"] = self.witness_param
        return out


def _merge(ivs: list[tuple[float, float, bool, bool]]) -> list[list]:
    merged: list[list] = []
    for a, b, ca, cb in ivs:
        if merged and (a < merged[-1][1] or (a == merged[-1][1] and (ca or merged[-1][3]))):
            last = merged[-1]
            if b > last[1] or (b == last[1] and cb):
                last[1], last[3] = b, cb
        else:
            merged.append([a, b, ca, cb])
    return merged


def absorbing_family_check(domain: DomainSpec, portion: BoundaryPortion,
                           closed_flags: list[tuple[bool, bool]] | None = None) -> FeasibilityReport:
    """Decide whether domain ∪ portion admits an absorbing exhaustion by compacts.

    This holds iff the portion is relatively open in the boundary. `closed_flags`
    overrides the per-arc endpoint marks. The clopen flag reports whether the
    portion is also relatively closed, i.e. a union of whole boundary components.
    """
    arcs = list(portion.arcs)
    if closed_flags is not None:
        if len(closed_flags) != len(arcs):
            raise ValueError("one closed/open mark pair per arc is required")
        arcs = [type(a)(a.component, a.t0, a.t1, tuple(bool(x) for x in f)) for a, f in zip(arcs, closed_flags)]
    comps = domain.components()
    for dm in portion.dense:
        curve = comps[dm.component]
        t = 0.0
        return FeasibilityReport(
            False, False, complex(curve.point(t)), (dm.component, t),
            f"dense marks ({dm.label}) on component {dm.component} are not relatively open: "
            "every neighbourhood of a marked point meets unmarked boundary points",
        )
    clopen = True
    for c, curve in enumerate(comps):
        period = curve.period
        ivs = _normalized_marked(tuple(arcs), c, period)
        if not ivs:
            continue
        merged = _merge(ivs)
        if period is not None and len(merged) > 1:
            first, last = merged[0], merged[-1]
            if last[1] > first[0] + period or (last[1] == first[0] + period and (last[3] or first[2])):
                last[1], last[3] = first[1] + period, first[3]
                merged = merged[1:]
        full = False
        for a, b, ca, cb in merged:
            if period is None:
                if a == -math.inf and b == math.inf:
                    full = True
                    continue
            elif b - a >= period:
                full = True
                continue
            for t, closed in ((a, ca), (b, cb)):
                if closed and not math.isinf(t):
                    return FeasibilityReport(
                        False, False, complex(curve.point(t)), (c, float(t)),
                        f"closed endpoint t={t:g} on component {c} is a marked point "
                        "with unmarked boundary points arbitrarily close",
                    )
        if not full:
            clopen = False
    return FeasibilityReport(True, clopen, reason="portion is relatively open in the boundary")
