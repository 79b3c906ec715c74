"""Sparse multivariate complex polynomials expanded around a center."""
from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import numpy as np

from .multiindex import MultiIndex, index_of

DROP_BELOW = 1e-30


def as_points(z: Any, d: int) -> tuple[np.ndarray, bool]:
    """Coerce z to an (m, d) complex array; the flag says whether z was one point."""
    arr = np.asarray(z, dtype=complex)
    if isinstance(z, tuple) and arr.ndim == 1:
        if arr.shape[0] != d:
            raise ValueError(f"point has {arr.shape[0]} coordinates, expected {d}")
        return arr.reshape(1, d), True
    if arr.ndim == 0:
        if d != 1:
            raise ValueError(f"scalar point given for dimension {d}")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if d == 1:
            return arr.reshape(-1, 1), False
        if arr.shape[0] != d:
            raise ValueError(f"point has {arr.shape[0]} coordinates, expected {d}")
        return arr.reshape(1, d), True
    if arr.ndim == 2 and arr.shape[1] == d:
        return arr, False
    raise ValueError(f"cannot interpret array of shape {arr.shape} as points in C^{d}")


class Poly:
    """f(z) = sum_alpha a_alpha (z - center)^alpha with a sparse coefficient map."""

    __slots__ = ("center", "coeffs", "_maxidx")

    def __init__(self, center: Sequence[complex] | complex, coeffs: Mapping[MultiIndex, complex] | None = None):
        if np.ndim(center) == 0:
            center = (center,)
        self.center: tuple[complex, ...] = tuple(complex(c) for c in center)
        d = len(self.center)
        clean: dict[MultiIndex, complex] = {}
        for alpha, c in (coeffs or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != d:
                raise ValueError(f"multi-index {alpha} does not match dimension {d}")
            c = complex(c)
            if abs(c) >= DROP_BELOW:
                clean[alpha] = clean.get(alpha, 0j) + c
        self.coeffs: dict[MultiIndex, complex] = {a: c for a, c in clean.items() if abs(c) >= DROP_BELOW}
        self._maxidx: int | None = None

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def max_enum_index(self) -> int:
        if self._maxidx is None:
            self._maxidx = max((index_of(a) for a in self.coeffs), default=-1)
        return self._maxidx

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self.coeffs

    @classmethod
    def zero(cls, center: Sequence[complex] | complex) -> "Poly":
        return cls(center, {})

    @classmethod
    def constant(cls, center: Sequence[complex] | complex, value: complex) -> "Poly":
        c = cls(center)
        return cls(c.center, {(0,) * c.dim: value})

    @classmethod
    def from_dense(cls, center: Sequence[complex] | complex, arr: np.ndarray) -> "Poly":
        arr = np.asarray(arr, dtype=complex)
        coeffs = {tuple(int(i) for i in idx): arr[idx] for idx in zip(*np.nonzero(arr))}
        return cls(center, coeffs)

    def to_dense(self) -> np.ndarray:
        d = self.dim
        if not self.coeffs:
            return np.zeros((1,) * d, dtype=complex)
        shape = tuple(max(a[i] for a in self.coeffs) + 1 for i in range(d))
        arr = np.zeros(shape, dtype=complex)
        for alpha, c in self.coeffs.items():
            arr[alpha] = c
        return arr

    def coefficient(self, alpha: MultiIndex) -> complex:
        return self.coeffs.get(tuple(alpha), 0j)

    def sorted_items(self) -> list[tuple[MultiIndex, complex]]:
        return sorted(self.coeffs.items(), key=lambda kv: index_of(kv[0]))

    def __call__(self, z: Any) -> Any:
        return evaluate(self, z)

    def __add__(self, other: "Poly") -> "Poly":
        other = _aligned(self, other)
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, 0j) + c
        return Poly(self.center, out)

    def __neg__(self) -> "Poly":
        return Poly(self.center, {a: -c for a, c in self.coeffs.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, s: complex) -> "Poly":
        return Poly(self.center, {a: s * c for a, c in self.coeffs.items()})

    def __mul__(self, other: "Poly | complex") -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(complex(other))
        other = _aligned(self, other)
        out: dict[MultiIndex, complex] = {}
        for a, ca in self.coeffs.items():
            for b, cb in other.coeffs.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0j) + ca * cb
        return Poly(self.center, out)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Poly) and self.center == other.center and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        terms = ", ".join(f"{a}: {c:.6g}" for a, c in self.sorted_items()[:8])
        more = "" if len(self.coeffs) <= 8 else f", ... ({len(self.coeffs)} terms)"
        return f"Poly(center={self.center}, {{{terms}{more}}})"


def _aligned(f: Poly, g: Poly) -> Poly:
    if g.dim != f.dim:
        raise ValueError("dimension mismatch")
    if g.center == f.center:
        return g
    return recenter(g, f.center)


def embed(q: Poly, axis: int, center: Sequence[complex]) -> Poly:
    """Lift a one-variable polynomial to the variable `axis` of C^d around `center`."""
    if q.dim != 1:
        raise ValueError("embed expects a one-variable polynomial")
    center = tuple(complex(c) for c in center)
    q = recenter(q, (center[axis],))
    d = len(center)
    coeffs = {}
    for (k,), c in q.coeffs.items():
        alpha = [0] * d
        alpha[axis] = k
        coeffs[tuple(alpha)] = c
    return Poly(center, coeffs)


def _horner(arr: np.ndarray, shifted: np.ndarray) -> np.ndarray:
    out = np.zeros(shifted.shape[0], dtype=complex)
    x = shifted[:, 0]
    if arr.ndim == 1:
        for c in arr[::-1]:
            out = out * x + c
        return out
    for k in range(arr.shape[0] - 1, -1, -1):
        out = out * x + _horner(arr[k], shifted[:, 1:])
    return out


def evaluate(f: Poly, z: Any) -> Any:
    """Value of f at one point (returns complex) or at an (m, d) array of points."""
    pts, single = as_points(z, f.dim)
    shifted = pts - np.asarray(f.center, dtype=complex)[None, :]
    vals = _horner(f.to_dense(), shifted)
    return complex(vals[0]) if single else vals


def derivative(f: Poly, alpha: MultiIndex) -> Poly:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != f.dim:
        raise ValueError("derivative order does not match dimension")
    out = {}
    for beta, c in f.coeffs.items():
        if all(b >= a for b, a in zip(beta, alpha)):
            fac = 1
            for b, a in zip(beta, alpha):
                fac *= math.perm(b, a)
            out[tuple(b - a for b, a in zip(beta, alpha))] = c * fac
    return Poly(f.center, out)


def _taylor_shift_axis(arr: np.ndarray, axis: int, s: complex) -> np.ndarray:
    a = np.moveaxis(arr.copy(), axis, 0)
    n = a.shape[0]
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            a[j] += s * a[j + 1]
    return np.moveaxis(a, 0, axis)


def recenter(f: Poly, zeta_new: Sequence[complex] | complex) -> Poly:
    """Taylor expansion of f around zeta_new, by synthetic division along each axis."""
    if np.ndim(zeta_new) == 0:
        zeta_new = (zeta_new,)
    zeta_new = tuple(complex(c) for c in zeta_new)
    if len(zeta_new) != f.dim:
        raise ValueError("new center has wrong dimension")
    if zeta_new == f.center or f.is_zero():
        return Poly(zeta_new, f.coeffs)
    arr = f.to_dense()
    for ax in range(f.dim):
        s = zeta_new[ax] - f.center[ax]
        if s != 0:
            arr = _taylor_shift_axis(arr, ax, s)
    return Poly.from_dense(zeta_new, arr)


def truncate(f: Poly, n: int) -> Poly:
    """Keep the terms with enumeration index <= n, without recentering."""
    return Poly(f.center, {a: c for a, c in f.coeffs.items() if index_of(a) <= n})


def partial_sum(f: Poly, zeta: Sequence[complex] | complex, n: int) -> Poly:
    """S_n(f, zeta): the Taylor expansion at zeta truncated to enumeration indices <= n."""
    if n < -1:
        raise ValueError("partial sum index must be >= -1")
    return truncate(recenter(f, zeta), n)


def _points_of(k: Any, d: int) -> np.ndarray:
    if hasattr(k, "validation_array"):
        pts = k.validation_array()
    else:
        pts = k
    pts = np.asarray(pts, dtype=complex)
    if pts.size == 0:
        return np.zeros((0, d), dtype=complex)
    return as_points(pts, d)[0]


def seminorm(f: Poly, k: Any, fam: Iterable[MultiIndex]) -> float:
    """max over D_alpha in fam of max over the validation points of k of |D_alpha f|."""
    pts = _points_of(k, f.dim)
    if pts.shape[0] == 0:
        return 0.0
    best = 0.0
    for alpha in fam:
        g = derivative(f, alpha)
        if g.is_zero():
            continue
        best = max(best, float(np.max(np.abs(evaluate(g, pts)))))
    return best


def cauchy_bound(sup_value: float, rho: float | Sequence[float], alpha: MultiIndex) -> float:
    """Upper bound for |a_alpha| of g when |g| <= sup_value on the polydisk of radii rho."""
    if sup_value < 0:
        raise ValueError("sup_value must be nonnegative")
    rhos = [float(rho)] * len(alpha) if np.ndim(rho) == 0 else [float(r) for r in rho]
    if len(rhos) != len(alpha):
        raise ValueError("radius count does not match multi-index")
    if any(r <= 0 for r in rhos):
        raise ValueError("Cauchy radius must be positive")
    if sup_value == 0:
        return 0.0
    denom = 1.0
    for r, a in zip(rhos, alpha):
        denom *= r ** a
    return sup_value / denom


def _cpair(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


def poly_to_json(f: Poly) -> dict:
    return {
        "center": [_cpair(c) for c in f.center],
        "entries": [
            {"alpha": list(a), "re": float(c.real), "im": float(c.imag)} for a, c in f.sorted_items()
        ],
    }


def poly_from_json(doc: Mapping) -> Poly:
    center = tuple(complex(re, im) for re, im in doc["center"])
    coeffs = {tuple(e["alpha"]): complex(e["re"], e["im"]) for e in doc["entries"]}
    return Poly(center, coeffs)
