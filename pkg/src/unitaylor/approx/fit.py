"""Least-squares polynomial approximation on sampled compacts.

The basis is the monomials in (z_i - c_i) / r_i, with (c, r) the center and
radius of the bounding box of all constraint sets. Errors in a FitReport are
always measured afresh on validation grids, never taken from the fit residual.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..polyalg import DerivativeFamily, Poly, count_leq, derivative, evaluate, multi_index
from .targets import TargetFunction

COND_LIMIT = 1e15


@dataclass
class FitReport:
    errors: dict[str, float]
    degree: int
    condition: float = 1.0
    rank: int = 0
    unknowns: int = 0
    residual: float = 0.0
    trace: list[tuple[int, float]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    def to_json(self) -> dict:
        return {
            "errors": {k: float(v) for k, v in sorted(self.errors.items())},
            "degree": self.degree,
            "condition": float(self.condition),
            "rank": self.rank,
            "unknowns": self.unknowns,
            "residual": float(self.residual),
            "trace": [[d, float(e)] for d, e in self.trace],
            "notes": list(self.notes),
        }


class FitFailure(RuntimeError):
    """Raised when no degree up to the cap meets the tolerance; carries the best attempt."""

    def __init__(self, message: str, report: FitReport, best: Poly | None = None):
        super().__init__(message)
        self.report = report
        self.best = best


@dataclass
class Constraint:
    """Demand |D_alpha (P - target)| small on a compact for every alpha in fam."""

    name: str
    compact: Any  # ProductCompact
    target: TargetFunction
    fam: DerivativeFamily

    def points(self, min_count: int) -> np.ndarray:
        return self.compact.fit_array(min_count)

    def validation(self) -> np.ndarray:
        return self.compact.validation_array()


def measure(p: Poly, c: Constraint, pts: np.ndarray | None = None) -> float:
    """max over alpha in fam of the max over validation points of |D_alpha (p - target)|."""
    pts = c.validation() if pts is None else pts
    if pts.shape[0] == 0:
        return 0.0
    best = 0.0
    for alpha in c.fam:
        diff = evaluate(derivative(p, alpha), pts) - c.target.derivative_values(alpha, pts)
        best = max(best, float(np.max(np.abs(diff))))
    return best


def basis_frame(constraints: Sequence[Constraint], dim: int) -> tuple[np.ndarray, np.ndarray]:
    pts = [c.validation() for c in constraints if c.validation().shape[0]]
    if not pts:
        return np.zeros(dim, dtype=complex), np.ones(dim)
    allp = np.concatenate(pts)
    lo = allp.real.min(axis=0) + 1j * allp.imag.min(axis=0)
    hi = allp.real.max(axis=0) + 1j * allp.imag.max(axis=0)
    center = 0.5 * (lo + hi)
    radius = np.max(np.abs(allp - center[None, :]), axis=0)
    return center, np.where(radius > 0, radius, 1.0)


def design_matrix(pts: np.ndarray, alphas: list[tuple], center: np.ndarray, scale: np.ndarray,
                  beta: tuple) -> np.ndarray:
    """Rows D_beta of the scaled monomials at the points."""
    m, d = pts.shape
    t = (pts - center[None, :]) / scale[None, :]
    top = max((max(a) for a in alphas), default=0)
    powers = [np.ones((m, top + 1), dtype=complex) for _ in range(d)]
    for i in range(d):
        for k in range(1, top + 1):
            powers[i][:, k] = powers[i][:, k - 1] * t[:, i]
    A = np.ones((m, len(alphas)), dtype=complex)
    for j, a in enumerate(alphas):
        for i in range(d):
            if a[i] < beta[i]:
                A[:, j] = 0
                break
            if beta[i]:
                A[:, j] *= math.perm(a[i], beta[i]) / scale[i] ** beta[i]
            A[:, j] *= powers[i][:, a[i] - beta[i]]
    return A


def to_poly(coef: np.ndarray, alphas: list[tuple], center: np.ndarray, scale: np.ndarray) -> Poly:
    out = {}
    for a, c in zip(alphas, coef):
        s = 1.0
        for i, k in enumerate(a):
            s *= scale[i] ** k
        out[a] = c / s
    return Poly(tuple(complex(z) for z in center), out)


def fit_at_degree(constraints: Sequence[Constraint], degree: int, dim: int,
                  frame: tuple[np.ndarray, np.ndarray] | None = None) -> tuple[Poly, FitReport]:
    """One least-squares solve over all constraints at a fixed total degree."""
    center, scale = frame if frame is not None else basis_frame(constraints, dim)
    alphas = [multi_index(k, dim) for k in range(count_leq(degree, dim))]
    rows, rhs = [], []
    for c in constraints:
        pts = c.points(4 * len(alphas))
        if pts.shape[0] == 0:
            continue
        for beta in c.fam:
            rows.append(design_matrix(pts, alphas, center, scale, beta))
            rhs.append(c.target.derivative_values(beta, pts))
    if not rows:
        return Poly.zero(tuple(complex(z) for z in center)), FitReport({c.name: 0.0 for c in constraints}, -1)
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    # column equilibration keeps lstsq's rank cut meaningful
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    coef, res, rank, sv = np.linalg.lstsq(A / norms, b, rcond=None)
    coef = coef / norms
    p = to_poly(coef, alphas, center, scale)
    cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else math.inf
    errors = {c.name: measure(p, c) for c in constraints}
    resid = float(np.linalg.norm(A @ coef - b))
    return p, FitReport(errors, degree, cond, int(rank), len(alphas), resid)


def escalate(constraints: Sequence[Constraint], degree_cap: int, eps: float, dim: int,
             start: int | None = None) -> tuple[Poly, FitReport]:
    """Raise the total degree until every constraint error is below eps."""
    if not eps > 0:
        raise ValueError("tolerance must be positive")
    frame = basis_frame(constraints, dim)
    lo = max(4, math.ceil(degree_cap / 4)) if start is None else start
    lo = min(lo, degree_cap)
    trace: list[tuple[int, float]] = []
    best: tuple[float, Poly, FitReport] | None = None
    for deg in range(lo, degree_cap + 1):
        p, rep = fit_at_degree(constraints, deg, dim, frame)
        trace.append((deg, rep.max_error))
        if best is None or rep.max_error < best[0]:
            best = (rep.max_error, p, rep)
        if rep.max_error < eps:
            rep.trace = trace
            return p, rep
    err, p, rep = best
    rep.trace = trace
    if rep.condition > COND_LIMIT:
        rep.notes.append(f"ill-conditioned least-squares system (condition {rep.condition:.1e})")
    raise FitFailure(f"degree cap {degree_cap} reached; best error {err:.3e} >= {eps:.3e}", rep, p)


def ls_fit(k: Any, target: TargetFunction, degree_cap: int, fam: DerivativeFamily, eps: float,
           extra: Sequence[Constraint] = ()) -> tuple[Poly, FitReport]:
    """Polynomial P with seminorm(P - target, k, fam) < eps on the validation grid."""
    main = Constraint("K", k, target, fam)
    return escalate([main, *extra], degree_cap, eps, target.dim)
