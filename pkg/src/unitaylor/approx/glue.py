"""Bump polynomials and the gluing step that localises a polynomial to one product compact."""
from __future__ import annotations

import math
from typing import Any

import numpy as np
from scipy.spatial import cKDTree

from ..geometry import ProductCompact, Union, complement_connected
from ..polyalg import DerivativeFamily, Poly, derivative, embed, recenter
from .fit import Constraint, FitFailure, FitReport, escalate, measure
from .targets import TargetFunction

MIN_EPS = 1e-14


class GlueInfeasible(ValueError):
    pass


def _single(c: Any) -> ProductCompact:
    return c if isinstance(c, ProductCompact) else ProductCompact((c,))


def min_distance(a: np.ndarray, b: np.ndarray) -> float:
    if a.size == 0 or b.size == 0:
        return math.inf
    pa = np.column_stack([a.real, a.imag])
    pb = np.column_stack([b.real, b.imag])
    d, _ = cKDTree(pb).query(pa, k=1)
    return float(np.min(d))


def bump(a: Any, b: Any, fam: DerivativeFamily, eps: float, degree_cap: int,
         a_fam: DerivativeFamily | None = None) -> tuple[Poly, FitReport]:
    """One-variable q with |q - 1| < eps on a and |q^(k)| < eps on b for k in fam.

    With `a_fam`, the derivatives of q - 1 in that family are also kept small on a.
    """
    if a.is_empty():
        return Poly.zero(0j), FitReport({"a": 0.0, "b": 0.0}, -1)
    if b.is_empty():
        return Poly.constant(0j, 1.0), FitReport({"a": 0.0, "b": 0.0}, 0)
    gap = min_distance(a.validation_points, b.validation_points)
    if not gap > 0:
        raise ValueError("bump needs disjoint compacts")
    cert = complement_connected(Union((a.descriptor, b.descriptor)), 1.0, min(0.05, gap / 4))
    if cert.verdict != "connected":
        raise ValueError(f"bump needs a connected complement of the union; certifier says {cert.verdict}")
    cons = [
        Constraint("a", _single(a), TargetFunction.expression("1"), a_fam or DerivativeFamily.values(1)),
        Constraint("b", _single(b), TargetFunction.zero(1), fam),
    ]
    return escalate(cons, degree_cap, eps, 1)


def sup_majorant(g: Poly, radii: tuple[float, ...]) -> float:
    """sum |c_gamma| prod radii_i^gamma_i: a bound for |g| on the polydisk around g's center."""
    total = 0.0
    for alpha, c in g.coeffs.items():
        term = abs(c)
        for r, k in zip(radii, alpha):
            term *= r ** k
        total += term
    return total


def leibniz_constant(g: Poly, fam: DerivativeFamily, axis: int, radii: tuple[float, ...]) -> float:
    """max over alpha in fam of sum_k C(alpha_axis, k) sup |D_{alpha - k e_axis} g|."""
    best = 0.0
    for alpha in fam:
        total = 0.0
        for k in range(alpha[axis] + 1):
            beta = list(alpha)
            beta[axis] -= k
            total += math.comb(alpha[axis], k) * sup_majorant(derivative(g, tuple(beta)), radii)
        best = max(best, total)
    return best


def glue(g_tilde: Poly, k_tau: ProductCompact, l_tilde: ProductCompact, i0: int, fam: DerivativeFamily,
         eps: float, degree_cap: int) -> tuple[Poly, FitReport]:
    """P = g_tilde * q(z_i0), close to g_tilde on k_tau and small on l_tilde.

    `i0` is the 1-based separating factor. The bump tolerance is eps / (2 M),
    with M the Leibniz constant of g_tilde over the bounding polydisk of both
    compacts; the returned report holds the directly measured seminorms.
    The result is expanded around g_tilde's center except on axis i0.
    """
    dim = g_tilde.dim
    axis = i0 - 1
    zero_t = TargetFunction.zero(dim)
    near = Constraint("K", k_tau, TargetFunction.polynomial(g_tilde), fam)
    if g_tilde.is_zero():
        return g_tilde, FitReport({"K": 0.0, "L": 0.0}, -1)
    if l_tilde.is_empty():
        return g_tilde, FitReport({"K": 0.0, "L": 0.0}, g_tilde.degree)
    radii = []
    for i in range(dim):
        pts = np.concatenate([k_tau.factors[i].validation_points, l_tilde.factors[i].validation_points])
        radii.append(float(np.max(np.abs(pts - g_tilde.center[i]))) if pts.size else 0.0)
    M = leibniz_constant(g_tilde, fam, axis, tuple(radii))
    eps_q = eps / (2 * M)
    if eps_q < MIN_EPS:
        raise GlueInfeasible(f"bump tolerance {eps_q:.2e} below {MIN_EPS:g}: derivative bound {M:.2e} too large")
    order = fam.max_order(axis)
    fam_q = DerivativeFamily.up_to_order(1, order)
    try:
        q, qrep = bump(k_tau.factors[axis], l_tilde.factors[axis], fam_q, eps_q, degree_cap, a_fam=fam_q)
    except FitFailure as exc:
        exc.report.notes.append(f"bump tolerance was {eps_q:.3e} (Leibniz constant {M:.3e})")
        raise
    # expand around the bump's own center on the separating axis: recentering a
    # high-degree bump to a distant point loses accuracy, recentering g_tilde does not
    center = list(g_tilde.center)
    center[axis] = q.center[0]
    g_shift = recenter(g_tilde, tuple(center))
    p = g_shift * embed(q, axis, g_shift.center)
    far = Constraint("L", l_tilde, zero_t, fam)
    rep = FitReport({"K": measure(p, near), "L": measure(p, far)}, p.degree, qrep.condition, qrep.rank,
                    qrep.unknowns, qrep.residual, qrep.trace)
    rep.notes.append(f"bump degree {qrep.degree}, bump tolerance {eps_q:.3e}, Leibniz constant {M:.3e}")
    return p, rep
