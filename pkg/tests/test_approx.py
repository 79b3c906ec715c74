import numpy as np
import pytest

from unitaylor.approx import (
    Constraint, FitFailure, GlueInfeasible, TargetFunction, bump, fit_at_degree, glue, ls_fit, measure,
)
from unitaylor.geometry import Annulus, Ball, Empty, PlanarCompact, ProductCompact, Segment
from unitaylor.polyalg import DerivativeFamily, Poly, evaluate

VALUES1 = DerivativeFamily.values(1)


def compact(desc, h=0.05):
    return ProductCompact((PlanarCompact.from_descriptor(desc, h),))


DISK = compact(Ball(0j, 1.0))


def taylor_error(c, n):
    # sup over the closed unit disk of |1/(z-c) + sum_{k<=n} z^k / c^{k+1}|, attained at z = |c|/c
    return (1 / abs(c)) ** (n + 1) / (abs(c) - 1)


# --- targets ---

def test_expression_target_derivatives():
    t = TargetFunction.expression("exp(2*z) + 1/(z-5)")
    z = np.array([0.1 + 0.2j, -0.3j])
    assert np.allclose(t.values(z), np.exp(2 * z) + 1 / (z - 5))
    assert np.allclose(t.derivative_values((1,), z), 2 * np.exp(2 * z) - 1 / (z - 5) ** 2)


def test_two_variable_expression_and_unknown_symbol():
    t = TargetFunction.expression("z1**2*z2", dim=2)
    pts = np.array([[1 + 1j, 2.0], [0.5, -1j]])
    assert np.allclose(t.derivative_values((1, 1), pts), 2 * pts[:, 0])
    with pytest.raises(ValueError, match="unknown symbols"):
        TargetFunction.expression("w + z")


def test_sampled_target_lookup():
    z = np.array([0.0, 1.0, 1j])
    t = TargetFunction.sampled(z, z ** 2, derivatives={(1,): 2 * z})
    assert np.allclose(t.values(z[::-1]), (z ** 2)[::-1])
    assert np.allclose(t.derivative_values((1,), z), 2 * z)
    with pytest.raises(ValueError):
        t.values(np.array([0.5]))


def test_constant_target_from_json():
    t = TargetFunction.from_json({"kind": "constant", "value": [-1.0, 0.5]}, 1)
    assert np.allclose(t.values(np.array([2.0, 3.0])), -1 + 0.5j)


# --- ls_fit ---

def test_polynomial_target_is_reproduced():
    p0 = Poly(0j, {(k,): (0.3 - 0.1j) ** k / (k + 1) for k in range(6)})
    p, rep = ls_fit(DISK, TargetFunction.polynomial(p0), 8, VALUES1, 1e-9)
    assert rep.errors["K"] <= 1e-9


def test_runge_example_meets_tolerance_and_tracks_taylor():
    t = TargetFunction.expression("1/(z-5)")
    p, rep = ls_fit(DISK, t, 40, VALUES1, 1e-6)
    assert rep.errors["K"] < 1e-6
    # the least-squares error stays within a factor 2 of the geometric-series truncation error
    for n in range(4, 13):
        _, r = fit_at_degree([Constraint("K", DISK, t, VALUES1)], n, 1)
        assert r.errors["K"] <= 2 * taylor_error(5, n)
        assert r.errors["K"] >= 0.5 * taylor_error(5, n) / n


@pytest.mark.parametrize("c", [2.0, 5.0])
def test_runge_monotone_decay_at_rate_one_over_c(c):
    t = TargetFunction.expression(f"1/(z-{c})")
    degs = list(range(4, 19))
    errs = [fit_at_degree([Constraint("K", DISK, t, VALUES1)], n, 1)[1].errors["K"] for n in degs]
    for a, b in zip(errs, errs[1:]):
        assert b <= 1.05 * a
    rate = (errs[-1] / errs[0]) ** (1 / (degs[-1] - degs[0]))
    assert 0.5 / c <= rate <= 2 / c


def test_conjugate_target_fails_with_floor():
    # on N equispaced circle points conj(z) = z^(N-1) is orthogonal to every
    # polynomial of lower degree, so no fit gets below sup error 1
    with pytest.raises(FitFailure) as info:
        ls_fit(DISK, TargetFunction.expression("conjugate(z)"), 24, VALUES1, 1e-3)
    rep = info.value.report
    assert rep.max_error >= 1 - 1e-6
    tail = [e for _, e in rep.trace[-5:]]
    assert max(tail) / min(tail) < 1.1
    assert info.value.best is not None


def test_report_errors_are_recomputed_from_validation_grid():
    t = TargetFunction.expression("exp(z)")
    seg = compact(Segment(2, 3))
    p, rep = ls_fit(seg, t, 20, DerivativeFamily.up_to_order(1, 1), 1e-6)
    again = measure(p, Constraint("K", seg, t, DerivativeFamily.up_to_order(1, 1)))
    assert abs(again - rep.errors["K"]) <= 1e-12


def test_refined_grid_changes_error_by_under_ten_percent():
    t = TargetFunction.expression("1/(z-2)")
    p, rep = ls_fit(DISK, t, 40, VALUES1, 1e-4)
    fine = measure(p, Constraint("K", DISK.resampled(2), t, VALUES1))
    assert abs(fine - rep.errors["K"]) < 0.1 * rep.errors["K"]


# --- bump ---

A = PlanarCompact.from_descriptor(Segment(2, 3), 0.05)
B = PlanarCompact.from_descriptor(Ball(0j, 0.5), 0.05)
FAM01 = DerivativeFamily.up_to_order(1, 1)


def test_bump_with_empty_far_set_is_one():
    q, _ = bump(A, PlanarCompact.from_descriptor(Empty(), 0.05), FAM01, 1e-2, 80)
    assert q == Poly.constant(0j, 1.0) and q.degree == 0


def test_bump_with_empty_near_set_is_zero():
    q, _ = bump(PlanarCompact.from_descriptor(Empty(), 0.05), B, FAM01, 1e-2, 80)
    assert q.is_zero()


def test_bump_segment_versus_disk():
    q, rep = bump(A, B, FAM01, 1e-2, 80)
    assert rep.errors["a"] < 1e-2 and rep.errors["b"] < 1e-2
    assert rep.degree == 20  # regression pin
    v = A.validation_points
    assert np.max(np.abs(evaluate(q, v) - 1)) < 1e-2


def test_bump_preconditions():
    with pytest.raises(ValueError, match="disjoint"):
        bump(A, PlanarCompact.from_descriptor(Ball(2.5, 0.2), 0.05), FAM01, 1e-2, 40)
    with pytest.raises(ValueError, match="connected"):
        bump(PlanarCompact.from_descriptor(Annulus(0j, 1.0, 1.5), 0.05), B, FAM01, 1e-2, 40)


# --- glue ---

def two_dim(a, b, h=0.1):
    return ProductCompact((PlanarCompact.from_descriptor(a, 0.05), PlanarCompact.from_descriptor(b, h)))


K_TAU = two_dim(Segment(2, 3), Ball(0j, 1.0))
L_TILDE = two_dim(Ball(0j, 0.5), Ball(0j, 0.5))


def test_glue_constant_reduces_to_bump():
    g = Poly.constant((0j, 0j), 1.0)
    p, rep = glue(g, K_TAU, L_TILDE, 1, DerivativeFamily.values(2), 1e-2, 80)
    assert rep.errors["K"] < 1e-2 and rep.errors["L"] < 1e-2
    assert all(alpha[1] == 0 for alpha in p.coeffs)
    # measured directly, not inferred
    assert measure(p, Constraint("L", L_TILDE, TargetFunction.zero(2), DerivativeFamily.values(2))) < 1e-2


def test_glue_empty_far_set_and_zero_input():
    g = Poly((0j, 0j), {(1, 0): 2.0, (0, 1): 1j})
    empty = ProductCompact((PlanarCompact.from_descriptor(Empty(), 0.1), PlanarCompact.from_descriptor(Ball(0j, 1), 0.1)))
    p, _ = glue(g, K_TAU, empty, 1, DerivativeFamily.values(2), 1e-2, 40)
    assert p == g
    z = Poly.zero((0j, 0j))
    p, _ = glue(z, K_TAU, L_TILDE, 1, DerivativeFamily.values(2), 1e-2, 40)
    assert p.is_zero()


def test_glue_leibniz_budget_is_sound_for_derivatives():
    g = Poly((0j, 0j), {(0, 0): 1.0, (1, 1): 0.5, (0, 2): -0.25j})
    fam = DerivativeFamily([(0, 0), (1, 0), (0, 1)])
    p, rep = glue(g, K_TAU, L_TILDE, 1, fam, 1e-2, 120)
    assert rep.errors["L"] <= 1e-2
    assert rep.errors["K"] <= 1e-2


def test_glue_infeasible_budget():
    g = Poly((0j, 0j), {(40, 0): 1e14})
    with pytest.raises(GlueInfeasible):
        glue(g, K_TAU, L_TILDE, 1, DerivativeFamily.values(2), 1e-2, 40)
