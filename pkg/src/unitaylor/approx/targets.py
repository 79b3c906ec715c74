"""Target functions for approximation: polynomials, closed-form expressions, sampled tables."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import sympy

from ..polyalg import Poly, as_points, derivative, evaluate, poly_from_json, poly_to_json

MODES = ("AD", "O")


def _symbols(d: int) -> list[sympy.Symbol]:
    return [sympy.Symbol("z")] if d == 1 else [sympy.Symbol(f"z{i + 1}") for i in range(d)]


def _key(p: np.ndarray) -> tuple:
    return tuple((round(float(c.real), 12), round(float(c.imag), 12)) for c in p)


@dataclass
class TargetFunction:
    """A function to approximate, evaluable at points of C^d together with its derivatives.

    kind "polynomial" holds a Poly, kind "expression" a sympy expression in z
    (d = 1) or z1..zd, kind "sampled" a table of point values per derivative order.
    """

    kind: str
    dim: int
    mode: str = "AD"
    poly: Poly | None = None
    source: str = ""
    table: dict[tuple, dict[tuple, complex]] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.kind == "expression":
            syms = _symbols(self.dim)
            expr = sympy.sympify(self.source, locals={s.name: s for s in syms})
            stray = expr.free_symbols - set(syms)
            if stray:
                raise ValueError(f"expression uses unknown symbols {sorted(map(str, stray))}")
            self._cache["expr"] = expr
        elif self.kind == "polynomial":
            if self.poly is None or self.poly.dim != self.dim:
                raise ValueError("polynomial target needs a Poly of matching dimension")
        elif self.kind != "sampled":
            raise ValueError(f"unknown target kind {self.kind!r}")

    @classmethod
    def polynomial(cls, p: Poly, mode: str = "AD") -> "TargetFunction":
        return cls("polynomial", p.dim, mode, poly=p)

    @classmethod
    def expression(cls, source: str, dim: int = 1, mode: str = "AD") -> "TargetFunction":
        return cls("expression", dim, mode, source=str(source))

    @classmethod
    def sampled(cls, points: np.ndarray, values: np.ndarray, dim: int = 1, mode: str = "AD",
                derivatives: dict[tuple, np.ndarray] | None = None) -> "TargetFunction":
        pts = as_points(points, dim)[0]
        table = {(0,) * dim: {_key(p): complex(v) for p, v in zip(pts, np.ravel(values))}}
        for alpha, vals in (derivatives or {}).items():
            table[tuple(alpha)] = {_key(p): complex(v) for p, v in zip(pts, np.ravel(vals))}
        return cls("sampled", dim, mode, table=table)

    @classmethod
    def zero(cls, dim: int) -> "TargetFunction":
        return cls.polynomial(Poly.zero((0j,) * dim))

    def _compiled(self, alpha: tuple) -> Any:
        key = ("fn", alpha)
        if key not in self._cache:
            syms = _symbols(self.dim)
            expr = self._cache["expr"]
            for s, a in zip(syms, alpha):
                if a:
                    expr = sympy.diff(expr, s, a)
            self._cache[key] = sympy.lambdify(syms, expr, modules="numpy")
        return self._cache[key]

    def derivative_values(self, alpha: tuple, z: Any) -> np.ndarray:
        """D_alpha of the target at an (m, d) array of points."""
        alpha = tuple(int(a) for a in alpha)
        pts = as_points(z, self.dim)[0]
        if self.kind == "polynomial":
            return np.asarray(evaluate(derivative(self.poly, alpha), pts), dtype=complex)
        if self.kind == "expression":
            with np.errstate(all="ignore"):
                out = self._compiled(alpha)(*[pts[:, i] for i in range(self.dim)])
            out = np.broadcast_to(np.asarray(out, dtype=complex), (pts.shape[0],)).copy()
            if not np.all(np.isfinite(out)):
                raise ValueError(f"target {self.source!r} is not finite at some requested point")
            return out
        tab = self.table.get(alpha)
        if tab is None:
            raise ValueError(f"sampled target has no data for derivative order {alpha}")
        try:
            return np.array([tab[_key(p)] for p in pts], dtype=complex)
        except KeyError as exc:
            raise ValueError(f"sampled target has no value at point {exc.args[0]}") from None

    def values(self, z: Any) -> np.ndarray:
        return self.derivative_values((0,) * self.dim, z)

    def __call__(self, z: Any) -> np.ndarray:
        return self.values(z)

    def minus_poly(self, p: Poly) -> "TargetFunction":
        """The target h - p (used for stage residuals)."""
        return _Difference(self, p)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "mode": self.mode}
        if self.kind == "polynomial":
            out["poly"] = poly_to_json(self.poly)
        elif self.kind == "expression":
            out["expr"] = self.source
        else:
            out["table"] = [
                {"alpha": list(alpha), "points": [[list(c) for c in k] for k in tab], "values": [[v.real, v.imag] for v in tab.values()]}
                for alpha, tab in sorted(self.table.items())
            ]
        return out

    @classmethod
    def from_json(cls, doc: dict, dim: int) -> "TargetFunction":
        mode = doc.get("mode", "AD")
        kind = doc["kind"]
        if kind == "polynomial":
            return cls.polynomial(poly_from_json(doc["poly"]), mode)
        if kind == "expression":
            return cls.expression(doc["expr"], dim, mode)
        if kind == "constant":
            re, im = doc["value"]
            return cls.expression(f"({float(re)!r}) + ({float(im)!r})*I", dim, mode)
        table = {}
        for entry in doc["table"]:
            keys = [tuple(tuple(c) for c in k) for k in entry["points"]]
            table[tuple(entry["alpha"])] = {k: complex(*v) for k, v in zip(keys, entry["values"])}
        return cls("sampled", dim, mode, table=table)


class _Difference(TargetFunction):
    def __init__(self, base: TargetFunction, p: Poly):
        self.kind, self.dim, self.mode = "difference", base.dim, base.mode
        self.base, self.p = base, p
        self.poly, self.source, self.table, self._cache = None, "", {}, {}

    def derivative_values(self, alpha: tuple, z: Any) -> np.ndarray:
        pts = as_points(z, self.dim)[0]
        return self.base.derivative_values(alpha, pts) - evaluate(derivative(self.p, tuple(alpha)), pts)

    def to_json(self) -> dict:
        raise TypeError("residual targets are not serialized")
