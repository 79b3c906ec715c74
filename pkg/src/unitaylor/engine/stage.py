"""One construction stage: a polynomial with prescribed vanishing order at the center.

The stage polynomial is P = sum_k a_k prod_i ((z_i - zeta_i) / R_i)^{alpha(k)_i}
over enumeration indices k = n0, n0 + 1, ... so that every partial sum of the
current function with index below n0 is left untouched. The weighted
least-squares problem (rows scaled by 1 / tolerance) is solved with Tikhonov
regularisation in extended precision: the monomial Gram matrix is far too
ill-conditioned for float64, while the resulting coefficients are stored and
validated in float64.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from ..approx import TargetFunction
from ..polyalg import DerivativeFamily, Poly, derivative, evaluate, multi_index

DPS = 50
LOG_WEIGHTS = tuple(-6.0 - 0.5 * k for k in range(29))  # 1e-6 .. 1e-20


@dataclass
class StageConstraint:
    """Keep |D_beta (P - target)| < tol on a point set for every beta in fam (target None means 0)."""

    name: str
    fit_points: np.ndarray
    validation: np.ndarray
    fam: DerivativeFamily
    tol: float
    target: TargetFunction | None = None


@dataclass
class StageResult:
    poly: Poly
    errors: dict[str, float]
    tolerances: dict[str, float]
    terms: int
    log_weight: float
    trace: list[tuple[int, float]] = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return max((self.errors[k] / self.tolerances[k] for k in self.errors), default=0.0)

    @property
    def ok(self) -> bool:
        return self.ratio < 1.0

    def binding(self) -> str:
        return max(self.errors, key=lambda k: self.errors[k] / self.tolerances[k]) if self.errors else ""


class StageSolver:
    def __init__(self, zeta0: tuple[complex, ...], n0: int, constraints: list[StageConstraint]):
        self.zeta0 = tuple(complex(z) for z in zeta0)
        self.dim = len(self.zeta0)
        self.n0 = n0
        self.constraints = constraints
        allpts = [c.fit_points for c in constraints if c.fit_points.shape[0]]
        allpts += [c.validation for c in constraints if c.validation.shape[0]]
        z0 = np.asarray(self.zeta0)
        if allpts:
            rad = np.max(np.abs(np.concatenate(allpts) - z0[None, :]), axis=0)
        else:
            rad = np.ones(self.dim)
        self.R = [float(r) if r > 0 else 1.0 for r in rad]
        self._ctx = mpmath.mp.clone()
        self._ctx.dps = DPS
        self._rows: list[tuple[list, list, tuple, mpmath.mpf]] = []  # (power tables, t, beta, weight)
        rhs = []
        ctx = self._ctx
        for c in constraints:
            w = ctx.mpf(1) / ctx.mpf(c.tol)
            for beta in c.fam:
                vals = c.target.derivative_values(beta, c.fit_points) if c.target is not None else None
                for r, p in enumerate(c.fit_points):
                    t = [ctx.mpc(complex(p[i] - self.zeta0[i])) / self.R[i] for i in range(self.dim)]
                    self._rows.append(([[ctx.mpc(1)] for _ in range(self.dim)], t, beta, w))
                    rhs.append(w * ctx.mpc(complex(vals[r])) if vals is not None else ctx.mpc(0))
        self._rhs = rhs
        self._cols: list[list] = []
        self._G: list[list] = []
        self._g: list = []
        # target values on validation points, per constraint and derivative order
        self._vtargets = []
        for c in constraints:
            tv = {}
            for beta in c.fam:
                if c.target is None:
                    tv[beta] = np.zeros(c.validation.shape[0], dtype=complex)
                else:
                    tv[beta] = c.target.derivative_values(beta, c.validation)
            self._vtargets.append(tv)

    @staticmethod
    def _power(tabs: list, t: list, i: int, k: int):
        tab = tabs[i]
        while len(tab) <= k:
            tab.append(tab[-1] * t[i])
        return tab[k]

    def _column(self, idx: int) -> list:
        ctx = self._ctx
        alpha = multi_index(self.n0 + idx, self.dim)
        col = []
        for tabs, t, beta, w in self._rows:
            if any(a < b for a, b in zip(alpha, beta)):
                col.append(ctx.mpc(0))
                continue
            v = w
            for i in range(self.dim):
                if beta[i]:
                    v *= ctx.mpf(math.perm(alpha[i], beta[i])) / ctx.mpf(self.R[i]) ** beta[i]
                v *= self._power(tabs, t, i, alpha[i] - beta[i])
            col.append(v)
        return col

    def _extend(self, terms: int) -> None:
        ctx = self._ctx
        while len(self._cols) < terms:
            j = len(self._cols)
            col = self._column(j)
            cj = [ctx.conj(x) for x in col]
            self._cols.append(col)
            row = [ctx.fdot(cj, self._cols[k]) for k in range(j + 1)]
            for k in range(j):
                self._G[k].append(ctx.conj(row[k]))
            self._G.append(row)
            self._g.append(ctx.fdot(cj, self._rhs))

    def _to_poly(self, a: list) -> Poly:
        coeffs = {}
        for j, aj in enumerate(a):
            alpha = multi_index(self.n0 + j, self.dim)
            s = self._ctx.mpf(1)
            for i in range(self.dim):
                s *= self._ctx.mpf(self.R[i]) ** alpha[i]
            coeffs[alpha] = complex(aj / s)
        return Poly(self.zeta0, coeffs)

    def measure(self, p: Poly) -> dict[str, float]:
        out = {}
        for c, tv in zip(self.constraints, self._vtargets):
            if c.validation.shape[0] == 0:
                out[c.name] = 0.0
                continue
            e = 0.0
            for beta in c.fam:
                diff = evaluate(derivative(p, beta), c.validation) - tv[beta]
                e = max(e, float(np.max(np.abs(diff))))
            out[c.name] = e
        return out

    def _eigen(self, terms: int) -> tuple[list, list, object]:
        """Eigendecomposition of the leading Gram block, plus projected right-hand side."""
        ctx = self._ctx
        self._extend(terms)
        G = ctx.matrix(terms, terms)
        for j in range(terms):
            for k in range(terms):
                G[j, k] = self._G[j][k]
        # mpmath's Cholesky ignores conjugation, so a Hermitian eigensolver is used instead
        E, Q = ctx.eighe(G)
        g = ctx.matrix(self._g[:terms])
        proj = Q.transpose_conj() * g
        diag = sum((self._G[j][j].real for j in range(terms)), ctx.mpf(0)) / terms
        return [E[i] for i in range(terms)], [proj[i] for i in range(terms)], (Q, diag)

    def _tikhonov(self, terms: int, eig: tuple, log_weight: float) -> Poly:
        ctx = self._ctx
        E, proj, (Q, diag) = eig
        w2 = ctx.mpf(10) ** (2 * log_weight) * diag
        y = [proj[i] / (E[i] + w2) for i in range(terms)]
        a = [ctx.fsum(Q[j, i] * y[i] for i in range(terms)) for j in range(terms)]
        return self._to_poly(a)

    def solve_at(self, terms: int, log_weight: float) -> Poly:
        return self._tikhonov(terms, self._eigen(terms), log_weight)

    def solve(self, max_terms: int, start: int = 4, step: int = 2) -> StageResult:
        """Escalate the number of terms; accept the first validated solution."""
        tols = {c.name: c.tol for c in self.constraints}
        best: StageResult | None = None
        trace = []
        terms = min(start, max_terms)
        while terms <= max_terms:
            eig = self._eigen(terms)
            for lw in LOG_WEIGHTS:
                p = self._tikhonov(terms, eig, lw)
                res = StageResult(p, self.measure(p), tols, terms, lw)
                if best is None or res.ratio < best.ratio:
                    best = res
            trace.append((terms, best.ratio))
            if best.ok:
                break
            if terms == max_terms:
                break
            terms = min(terms + step, max_terms)
        best.trace = trace
        return best
