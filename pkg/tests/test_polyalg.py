import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitaylor.polyalg import (
    DerivativeFamily,
    MultiIndexEnum,
    Poly,
    cauchy_bound,
    derivative,
    evaluate,
    index_of,
    multi_index,
    partial_sum,
    poly_from_json,
    poly_to_json,
    recenter,
    seminorm,
)


def brute_order(d, g):
    al = [a for a in product(range(g + 1), repeat=d) if sum(a) <= g]
    return sorted(al, key=lambda a: (sum(a), tuple(-x for x in a)))


# --- enumeration ---

@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_enumeration_matches_brute_force(d):
    order = brute_order(d, 6)
    for j, alpha in enumerate(order):
        assert multi_index(j, d) == alpha
        assert index_of(alpha) == j


def test_enumeration_frozen_values():
    assert index_of((1, 1)) == 4
    assert index_of((0, 2)) == 5
    assert index_of((2, 1)) == 7
    assert index_of((0, 3)) == 9
    assert index_of((1, 0, 1)) == 6
    assert index_of((1, 1, 1)) == 14
    assert MultiIndexEnum(2).prefix(3) == [(0, 0), (1, 0), (0, 1)]


@pytest.mark.parametrize("d", [1, 2, 3])
def test_enumeration_bijective_and_graded_prefix(d):
    prev = -1
    for j in range(0, 10001, 7):
        alpha = multi_index(j, d)
        assert index_of(alpha) == j
        assert sum(alpha) >= prev
        prev = sum(alpha)


def test_enumeration_rejects_bad_input():
    with pytest.raises(ValueError):
        index_of((-1, 2))
    with pytest.raises(ValueError):
        multi_index(-1, 2)
    with pytest.raises(ValueError):
        MultiIndexEnum(2).index_of((1, 2, 3))


# --- eval / derivative / recenter / partial sums: spec examples ---

def test_eval_examples():
    assert evaluate(Poly(0, {(0,): 1, (2,): 1}), 2) == 5
    assert evaluate(Poly.zero(0), 3 + 1j) == 0
    assert evaluate(Poly((0, 0), {(1, 1): 1}), (2, 3)) == 6


def test_eval_vectorized_matches_pointwise():
    f = Poly((0.5, -1j), {(1, 2): 2 - 1j, (0, 0): 3, (3, 0): 0.25})
    pts = np.array([[1 + 1j, 2], [0.1, -0.3j], [2, 2]])
    vals = evaluate(f, pts)
    for p, v in zip(pts, vals):
        assert v == pytest.approx(evaluate(f, tuple(p)))


def test_derivative_examples():
    assert derivative(Poly(0, {(3,): 1}), (1,)).coeffs == {(2,): 3}
    assert derivative(Poly(0, {(0,): 7}), (2,)).is_zero()
    assert derivative(Poly((0, 0), {(2, 1): 1}), (1, 1)).coeffs == {(1, 0): 2}


def test_recenter_examples():
    g = recenter(Poly(0, {(2,): 1}), 1)
    assert g.center == (1,)
    assert g.coeffs == {(0,): 1, (1,): 2, (2,): 1}
    f = Poly(0.3j, {(0,): 1, (4,): 2 - 1j})
    assert recenter(f, 0.3j).coeffs == f.coeffs
    h = recenter(Poly((0, 0), {(1, 1): 1}), (1, 1))
    assert h.coeffs == {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}


def test_recenter_against_symbolic_expansion():
    # frozen from a sympy expansion of 3 + 2i z - z^3 + z^5/2 around 1 - 2i
    f = Poly(0, {(0,): 3, (1,): 2j, (3,): -1, (5,): 0.5})
    g = recenter(f, 1 - 2j)
    expected = [38.5 + 19j, -8.5 + 74j, -58 + 16j, -16 - 20j, 2.5 - 5j, 0.5]
    for k, c in enumerate(expected):
        assert g.coefficient((k,)) == pytest.approx(c, abs=1e-12)
    # z1^2 z2 + 2 z2^3 - i z1 around (1/2, -1)
    f2 = Poly((0, 0), {(2, 1): 1, (0, 3): 2, (1, 0): -1j})
    g2 = recenter(f2, (0.5, -1))
    expected2 = {(0, 0): -2.25 - 0.5j, (0, 1): 6.25, (0, 2): -6, (0, 3): 2,
                 (1, 0): -1 - 1j, (1, 1): 1, (2, 0): -1, (2, 1): 1}
    assert set(g2.coeffs) == set(expected2)
    for a, c in expected2.items():
        assert g2.coeffs[a] == pytest.approx(c, abs=1e-12)


def test_partial_sum_examples():
    assert partial_sum(Poly(0, {(0,): 1, (2,): 1}), 0, 1).coeffs == {(0,): 1}
    s = partial_sum(Poly(0, {(2,): 1}), 1, 1)
    # 1 + 2(z - 1) = 2z - 1
    assert evaluate(s, 0) == pytest.approx(-1)
    assert evaluate(s, 3) == pytest.approx(5)
    f = Poly((0, 0), {(1, 1): 1})
    assert partial_sum(f, (0, 0), index_of((1, 1))).coeffs == f.coeffs
    assert partial_sum(f, (0, 0), -1).is_zero()


def test_max_enum_index():
    assert Poly.zero(0).max_enum_index == -1
    assert Poly((0, 0), {(0, 2): 1, (1, 0): 1}).max_enum_index == 5


def test_canonical_form_drops_tiny_coefficients():
    f = Poly(0, {(0,): 1e-31, (1,): 1})
    assert f.coeffs == {(1,): 1}


def test_seminorm_examples():
    theta = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    disk = np.concatenate([np.exp(1j * theta), 0.5 * np.exp(1j * theta), [0]])
    assert seminorm(Poly.zero(0), disk, [(0,), (1,)]) == 0
    assert seminorm(Poly(0, {(1,): 1}), disk, [(0,)]) == pytest.approx(1, abs=1e-3)
    assert seminorm(Poly(0, {(2,): 1}), disk, [(0,), (1,)]) == pytest.approx(2, abs=1e-3)
    assert seminorm(Poly(0, {(2,): 1}), np.zeros(0), [(0,)]) == 0


def test_cauchy_bound_examples():
    assert cauchy_bound(1e-3, 0.5, (3,)) == pytest.approx(8e-3)
    assert cauchy_bound(0, 0.5, (3,)) == 0
    assert cauchy_bound(1, 1, (7, 2)) == 1
    assert cauchy_bound(1, (0.5, 2), (1, 1)) == pytest.approx(1)
    with pytest.raises(ValueError):
        cauchy_bound(1, 0, (1,))


def test_json_round_trip_is_exact_and_sorted():
    f = Poly((0.1, 2j), {(0, 3): 1 / 3, (1, 0): -2.5j, (0, 0): 1e-7})
    doc = poly_to_json(f)
    assert [e["alpha"] for e in doc["entries"]] == [[0, 0], [1, 0], [0, 3]]
    assert poly_from_json(doc) == f


def test_derivative_family_closure():
    fam = DerivativeFamily([(2, 1)])
    assert not fam.is_gapless()
    cl = fam.closure()
    assert set(cl) == {(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)}
    assert cl.is_gapless()
    assert DerivativeFamily.values(2).indices == ((0, 0),)
    with pytest.raises(ValueError):
        DerivativeFamily([(1,), (1, 0)])


def test_multiplication_and_embed():
    from unitaylor.polyalg import embed
    p = Poly(0, {(0,): 1, (1,): 1})
    sq = p * p
    assert sq.coeffs == {(0,): 1, (1,): 2, (2,): 1}
    q = embed(Poly(1, {(1,): 1}), 1, (0, 0))
    # q(z1, z2) = z2 - 1
    assert evaluate(q, (5, 3)) == pytest.approx(2)


# --- properties ---

def random_poly(rng, d, deg, center=None):
    """Coefficients decay like 2^-|alpha| so values stay O(1) on the unit polydisk."""
    alphas = [a for a in product(range(deg + 1), repeat=d) if sum(a) <= deg]
    coeffs = {}
    for a in alphas:
        if rng.random() < 0.6:
            coeffs[a] = complex(rng.normal(), rng.normal()) * 2.0 ** -sum(a)
    if center is None:
        center = tuple(complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)) for _ in range(d))
    return Poly(center, coeffs)


def unit_polydisk_points(rng, d, m):
    r = np.sqrt(rng.uniform(0, 1, (m, d)))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, (m, d)))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 2), deg=st.integers(0, 30))
def test_recentering_preserves_values(seed, d, deg):
    rng = np.random.default_rng(seed)
    f = random_poly(rng, d, deg)
    zeta = tuple(unit_polydisk_points(rng, d, 1)[0])
    g = recenter(f, zeta)
    pts = unit_polydisk_points(rng, d, 20)
    fv, gv = evaluate(f, pts), evaluate(g, pts)
    assert np.all(np.abs(fv - gv) <= 1e-9 * (1 + np.abs(fv)))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 2), deg=st.integers(0, 30))
def test_recentering_round_trip(seed, d, deg):
    rng = np.random.default_rng(seed)
    f = random_poly(rng, d, deg)
    zeta = tuple(unit_polydisk_points(rng, d, 1)[0])
    back = recenter(recenter(f, zeta), f.center)
    scale = max((abs(c) for c in f.coeffs.values()), default=0.0)
    for a in set(f.coeffs) | set(back.coeffs):
        # relative to the coefficient vector, with the 1e-12 absolute floor
        assert abs(f.coefficient(a) - back.coefficient(a)) <= max(1e-12, 1e-9 * scale)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 2), deg=st.integers(0, 20))
def test_truncation_identity(seed, d, deg):
    rng = np.random.default_rng(seed)
    f = random_poly(rng, d, deg)
    zeta = tuple(unit_polydisk_points(rng, d, 1)[0])
    n = recenter(f, zeta).max_enum_index
    s = partial_sum(f, zeta, n + int(rng.integers(0, 5)))
    pts = unit_polydisk_points(rng, d, 20)
    fv = evaluate(f, pts)
    assert np.all(np.abs(evaluate(s, pts) - fv) <= 1e-9 * (1 + np.abs(fv)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 2), deg=st.integers(2, 12))
def test_derivative_second_order_finite_differences(seed, d, deg):
    rng = np.random.default_rng(seed)
    f = random_poly(rng, d, deg)
    # ensure a nonvanishing third derivative in z1 so the error really is O(h^2)
    f = f + Poly(f.center, {(3,) + (0,) * (d - 1): 1.0})
    z = unit_polydisk_points(rng, d, 1)[0] * 0.5
    e1 = np.zeros(d, dtype=complex)
    e1[0] = 1
    df = evaluate(derivative(f, (1,) + (0,) * (d - 1)), tuple(z))
    errs = []
    for h in (1e-2, 1e-3):
        fd = (evaluate(f, tuple(z + h * e1)) - evaluate(f, tuple(z - h * e1))) / (2 * h)
        errs.append(abs(fd - df))
    assert math.log10(errs[0] / errs[1]) >= 1.9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rho=st.sampled_from([0.5, 1.0, 2.0]))
def test_cauchy_soundness(seed, rho):
    rng = np.random.default_rng(seed)
    g = random_poly(rng, 1, 20, center=(0,))
    theta = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
    sup = float(np.max(np.abs(evaluate(g, rho * np.exp(1j * theta)))))
    for alpha, c in g.coeffs.items():
        assert abs(c) <= cauchy_bound(sup, rho, alpha) * (1 + 1e-6)
