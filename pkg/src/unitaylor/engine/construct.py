"""Stage-by-stage construction of a polynomial whose partial sums meet a finite schedule.

Stage r adds a polynomial P_r whose Taylor coefficients at the center vanish
below the previous cut, so every earlier partial sum S_{λ_i}(f, ζ0) is left
exactly unchanged. P_r must make S_{λ_r}(f) close to h_r on K_r and must be
small on every earlier exhaustion level L_{m_i}, where requirement i reserves
ε_i / 2^{r-i+1} of its return budget for stage r.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import ENUMERATION_RULE, DomainScene, Mu, ProductCompact
from ..polyalg import (
    RULE_ID, DerivativeFamily, Poly, derivative, evaluate, multi_index, poly_from_json, poly_to_json, recenter, seminorm,
    truncate,
)
from .requirement import UNIFORM, Requirement, check_requirement, exhaustion_compact
from .stage import DPS, StageConstraint, StageSolver

log = logging.getLogger(__name__)

CERT_SCHEMA = "unitaylor-certificate/1"
MIN_SMALLNESS = 1e-14


@dataclass(frozen=True)
class Caps:
    """Surrogate limits: new basis terms per stage, retries, fit points per constraint."""

    max_terms: int = 60
    retries: int = 3
    fit_points: int = 128

    def to_json(self) -> dict:
        return {"max_terms": self.max_terms, "retries": self.retries, "fit_points": self.fit_points}


class ConstructionFailure(RuntimeError):
    def __init__(self, message: str, stage: int, requirement: str, binding: str = "", details: dict | None = None):
        super().__init__(message)
        self.stage = stage
        self.requirement = requirement
        self.binding = binding
        self.details = details or {}

    def to_json(self) -> dict:
        return {
            "status": "failure",
            "message": str(self),
            "stage": self.stage,
            "requirement": self.requirement,
            "binding": self.binding,
            "details": self.details,
        }


@dataclass
class StagePlan:
    stage: int
    requirement: str
    reservations: list[tuple[str, float]]
    cut_rule: str

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "requirement": self.requirement,
            "reservations": [{"requirement": i, "amount": a} for i, a in self.reservations],
            "cut_rule": self.cut_rule,
        }


def plan_schedule(requirements: list[Requirement], mu: Mu) -> list[StagePlan]:
    """Stages in the given order with their budget reservations for earlier requirements."""
    seen = set()
    for r in requirements:
        if r.id in seen:
            raise ValueError(f"duplicate requirement id {r.id!r}")
        seen.add(r.id)
    rule = f"least element of mu ({json.dumps(mu.to_json(), sort_keys=True)}) >= max support index"
    plans = []
    for s, req in enumerate(requirements, start=1):
        res = [(requirements[i - 1].id, requirements[i - 1].epsilon / 2 ** (s - i + 1)) for i in range(1, s)]
        plans.append(StagePlan(s, req.id, res, rule))
    return plans


def cut_for(mu: Mu, support_index: int, previous_cut: int = -1) -> int:
    """min{λ in mu : λ >= support index}, kept strictly above the previous cut."""
    return mu.least_at_least(max(support_index, previous_cut + 1))


def row_sample(points: np.ndarray, count: int) -> np.ndarray:
    """At most `count` points spread evenly along the angular order around the centroid."""
    if points.shape[0] <= count:
        return points
    c = points.mean()
    order = np.lexsort((np.abs(points - c), np.angle(points - c)))
    pick = np.linspace(0, points.shape[0] - 1, count).round().astype(int)
    return points[order][pick]


def fit_points(compact: ProductCompact, count: int) -> np.ndarray:
    """Fit rows: boundary points of area-like factors, whole curves otherwise."""
    per = count if compact.dim == 1 else max(8, int(round(count ** (1.0 / compact.dim))))
    parts = []
    for f in compact.factors:
        if f.is_empty():
            return np.zeros((0, compact.dim), dtype=complex)
        pts = f.refined_fit(per, boundary_only=True)
        parts.append(row_sample(pts, per))
    if compact.dim == 1:
        return parts[0].reshape(-1, 1)
    grids = np.meshgrid(*parts, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def k_error(f: Poly, cut: int, req: Requirement, compact: ProductCompact | None = None) -> float:
    """sup over K of |D_beta (S_cut(f) - h)| for beta in the K family."""
    s = truncate(f, cut)
    pts = (compact or req.compact).validation_array()
    best = 0.0
    for beta in req.k_family():
        diff = evaluate(derivative(s, beta), pts) - req.target.derivative_values(beta, pts)
        best = max(best, float(np.max(np.abs(diff))))
    return best


def l_error(f: Poly, cut: int, fam: DerivativeFamily, L: ProductCompact) -> float:
    """seminorm(S_cut(f) - f, L, fam) = seminorm of the tail of f beyond the cut."""
    tail = Poly(f.center, {a: c for a, c in f.coeffs.items() if a not in truncate(f, cut).coeffs})
    return seminorm(tail, L, fam)


def budget_radius(scene: DomainScene, L: ProductCompact, centers: ProductCompact | None = None) -> list[float]:
    """Per-factor radius ρ_i: polydisks of radius ρ_i around the center (or every point
    of the center compact) stay inside L, judged against L's boundary sample."""
    out = []
    for i, fac in enumerate(L.factors):
        b = fac.validation_points[fac.validation_boundary]
        if b.size == 0:
            out.append(0.0)
            continue
        zs = np.array([scene.center[i]]) if centers is None else centers.factors[i].validation_points
        out.append(float(min(np.min(np.abs(b - z)) for z in zs)))
    return out


def cauchy_sum(cut: int, dim: int, rho: list[float], reach: list[float], fam: DerivativeFamily) -> float:
    """Bound on sup |D_beta S_cut(P, ζ)| over the target sets per unit of sup |P| on the polydisk.

    Coefficients of P at ζ satisfy |c_alpha| <= sup|P| / ρ^alpha (Cauchy), and
    |D_beta (z - ζ)^alpha| <= perm(alpha, beta) reach^(alpha - beta).
    """
    if any(r <= 0 for r in rho):
        return math.inf
    total = 0.0
    for k in range(cut + 1):
        alpha = multi_index(k, dim)
        best = 0.0
        for beta in fam:
            if any(a < b for a, b in zip(alpha, beta)):
                continue
            term = 1.0
            for a, b, r, d in zip(alpha, beta, rho, reach):
                term *= math.perm(a, b) * d ** (a - b) / r ** a
            best = max(best, term)
        total += best
    return total


@dataclass
class Certificate:
    scene_hash: str
    f: Poly
    cuts: list[int]
    requirements: list[dict]
    stages: list[dict] = field(default_factory=list)
    budget_radius: list[float] = field(default_factory=list)
    surrogate: dict = field(default_factory=dict)
    enumeration_rule: str = RULE_ID
    compact_rule: str = ENUMERATION_RULE

    def to_json(self) -> dict:
        return {
            "schema": CERT_SCHEMA,
            "status": "success",
            "scene_hash": self.scene_hash,
            "enumeration_rule": self.enumeration_rule,
            "compact_rule": self.compact_rule,
            "f": poly_to_json(self.f),
            "cuts": list(self.cuts),
            "requirements": self.requirements,
            "stages": self.stages,
            "budget_radius": self.budget_radius,
            "surrogate": self.surrogate,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, doc: dict) -> "Certificate":
        if doc.get("schema") != CERT_SCHEMA:
            raise ValueError(f"unsupported certificate schema {doc.get('schema')!r}")
        return cls(
            doc["scene_hash"], poly_from_json(doc["f"]), [int(c) for c in doc["cuts"]], doc["requirements"],
            doc.get("stages", []), doc.get("budget_radius", []), doc.get("surrogate", {}),
            doc["enumeration_rule"], doc.get("compact_rule", ENUMERATION_RULE),
        )


class _Context:
    """Construction-grid compacts shared by the stages."""

    def __init__(self, scene: DomainScene, reqs: list[Requirement]):
        self.scene = scene
        self.L: dict[int, ProductCompact] = {}
        for r in reqs:
            if r.m not in self.L:
                self.L[r.m] = exhaustion_compact(scene, r.m)
                if self.L[r.m].is_empty():
                    raise ValueError(f"exhaustion level L_{r.m} is empty; choose a larger m")


def _uniform_errors(f: Poly, cut: int, req: Requirement, L: ProductCompact) -> tuple[float, float]:
    from .verify import uniform_center_errors  # verify imports this module
    return uniform_center_errors(f, cut, req, req.compact, L, req.center_compact)


def _errors(f: Poly, cut: int, req: Requirement, L: ProductCompact) -> tuple[float, float]:
    if req.mode == UNIFORM:
        return _uniform_errors(f, cut, req, L)
    return k_error(f, cut, req), l_error(f, cut, req.fam, L)


def construct(scene: DomainScene, requirements: list[Requirement], caps: Caps = Caps(),
              seed: Poly | None = None) -> Certificate:
    """Run the schedule; raise ConstructionFailure naming the blocking requirement."""
    scene.validate()
    plan_schedule(requirements, scene.mu)
    for r in requirements:
        check_requirement(r, scene)
    ctx = _Context(scene, requirements)
    zeta0 = scene.center
    f = Poly.zero(zeta0) if seed is None else seed
    if f.center != tuple(zeta0):
        f = recenter(f, zeta0)
    cuts: list[int] = []
    infos: list[dict] = []
    stages: list[dict] = []
    errors: dict[str, tuple[float, float]] = {}
    m_min = min((r.m for r in requirements), default=1)
    radius = budget_radius(scene, ctx.L[m_min]) if requirements else []

    for s, req in enumerate(requirements, start=1):
        n0 = 0 if s == 1 else cuts[-1] + 1
        scale = 1.0
        max_terms = caps.max_terms
        failure = None
        for attempt in range(caps.retries + 1):
            cons, budget = _stage_constraints(f, req, requirements[: s - 1], cuts, ctx, s, scale, caps)
            res = StageSolver(zeta0, n0, cons).solve(max_terms)
            log.info(json.dumps({"event": "stage", "stage": s, "attempt": attempt, "terms": res.terms,
                                 "ratio": res.ratio, "binding": res.binding()}, sort_keys=True))
            f_new = f + res.poly
            cut = cut_for(scene.mu, f_new.max_enum_index, cuts[-1] if cuts else -1)
            new_errors = {}
            for i, r in enumerate(requirements[: s - 1]):
                new_errors[r.id] = _errors(f_new, cuts[i], r, ctx.L[r.m])
            new_errors[req.id] = _errors(f_new, cut, req, ctx.L[req.m])
            bad = [rid for rid, (ek, el) in new_errors.items()
                   if not (ek < _eps(requirements, rid) and el < _eps(requirements, rid))]
            if res.ok and not bad:
                break
            failure = (res, bad)
            scale *= 0.5
            max_terms = int(math.ceil(max_terms * 1.5))
        else:
            res, bad = failure
            raise ConstructionFailure(
                f"stage {s} ({req.id}) failed after {caps.retries} retries; binding constraint "
                f"{res.binding()} at {res.ratio:.3g} x its tolerance"
                + (f"; re-verification failed for {bad}" if bad else "")
                + "; consider moving requirements with large epsilon earlier or raising the caps",
                s, req.id, res.binding(),
                {"errors": res.errors, "tolerances": res.tolerances, "terms": res.terms, "trace": res.trace},
            )
        ledger = []
        for i, r in enumerate(requirements[: s - 1], start=1):
            before, after = errors[r.id], new_errors[r.id]
            ledger.append({
                "stage": s,
                "requirement": r.id,
                "reserved": r.epsilon / 2 ** (s - i + 1),
                "cauchy_estimate": budget[r.id]["cauchy_estimate"](res.errors),
                "measured_K_change": abs(after[0] - before[0]),
                "measured_L_change": abs(after[1] - before[1]),
            })
            infos[i - 1]["budget"].extend(ledger[-1:])
        f = f_new
        cuts.append(cut)
        errors = new_errors
        infos.append({
            "id": req.id,
            "epsilon": req.epsilon,
            "m": req.m,
            "mode": req.mode,
            "family": req.fam.to_json(),
            "cut": cut,
            "support_index": f.max_enum_index,
            "stage_fit": {
                "terms": res.terms,
                "log_regularisation": res.log_weight,
                "errors": {k: v for k, v in sorted(res.errors.items())},
                "tolerances": {k: v for k, v in sorted(res.tolerances.items())},
                "trace": [[t, r] for t, r in res.trace],
                "attempts": attempt + 1,
            },
            "budget": [],
        })
        stages.append({
            "stage": s,
            "requirement": req.id,
            "cut": cut,
            "support_index": f.max_enum_index,
            "vanishing_order": n0,
            "errors": {rid: {"K": ek, "L": el} for rid, (ek, el) in sorted(errors.items())},
        })
    for info in infos:
        ek, el = errors[info["id"]]
        info["E_K"], info["E_L"] = ek, el
    return Certificate(
        scene.hash(), f, cuts, infos, stages, radius,
        {
            "grid": {"fit_density": scene.grid.fit_density, "validation_density": scene.grid.validation_density},
            "caps": caps.to_json(),
            "solver": {"kind": "tikhonov-monomial", "digits": DPS},
        },
    )


def _eps(reqs: list[Requirement], rid: str) -> float:
    return next(r.epsilon for r in reqs if r.id == rid)


def _stage_constraints(f: Poly, req: Requirement, earlier: list[Requirement], cuts: list[int], ctx: _Context,
                       s: int, scale: float, caps: Caps) -> tuple[list[StageConstraint], dict]:
    scene = ctx.scene
    cons = [StageConstraint(
        "K", fit_points(req.compact, caps.fit_points), req.compact.validation_array(), req.k_family(),
        scale * req.epsilon / 2, req.target.minus_poly(f),
    )]
    # smallness on exhaustion levels, merged per (level, family) with the tightest tolerance
    small: dict[tuple, float] = {(req.m, req.fam): scale * req.epsilon / 2}
    budget: dict[str, dict] = {}
    for i, r in enumerate(earlier, start=1):
        reserve = r.epsilon / 2 ** (s - i + 1)
        key = (r.m, r.fam)
        tol = scale * reserve
        if r.mode == UNIFORM:
            L = ctx.L[r.m]
            rho = budget_radius(scene, L, r.center_compact)
            reach = []
            for j in range(scene.dim):
                zs = r.center_compact.factors[j].validation_points
                tgt = np.concatenate([r.compact.factors[j].validation_points, L.factors[j].validation_points])
                reach.append(float(max(np.max(np.abs(tgt - z)) for z in zs)))
            csum = cauchy_sum(cuts[i - 1], scene.dim, rho, reach, r.fam) + 1.0
            need = scale * reserve / csum
            if need < MIN_SMALLNESS:
                raise ConstructionFailure(
                    f"infeasible budget at stage {s}: keeping requirement {r.id} within its reservation "
                    f"{reserve:.2e} needs smallness {need:.2e} < {MIN_SMALLNESS:g} on L_{r.m} "
                    f"(Cauchy factor {csum:.2e}, polydisk radii {rho}); consider reordering requirements",
                    s, req.id, f"budget:{r.id}", {"required_smallness": need, "cauchy_factor": csum, "radius": rho},
                )
            tol = min(tol, need)
            budget[r.id] = {"cauchy_estimate": (lambda e, c=csum, k=f"L{r.m}": c * e.get(k, 0.0))}
        else:
            # coefficients up to the earlier cut are identically zero in P_s
            budget[r.id] = {"cauchy_estimate": (lambda e: 0.0)}
        small[key] = min(small.get(key, math.inf), tol)
    # several families on one level: keep each as its own constraint
    for (m, fam), tol in sorted(small.items(), key=lambda kv: (kv[0][0], kv[0][1].indices)):
        L = ctx.L[m]
        name = f"L{m}" if sum(1 for k in small if k[0] == m) == 1 else f"L{m}:{fam.to_json()}"
        cons.append(StageConstraint(name, fit_points(L, caps.fit_points), L.validation_array(), fam, tol))
    return cons, budget
