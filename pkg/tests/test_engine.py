import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unitaylor.engine import (
    Caps, Certificate, ConstructionFailure, RequirementError, compact_from_json, construct, cut_for, k_error,
    plan_schedule, requirement_from_json, universal_point_scan, verify, verify_uniform_center, VerificationRefused,
)
from unitaylor.geometry import BoundaryPortion, Disk, DomainScene, GridConfig, Mu
from unitaylor.polyalg import DerivativeFamily, Poly, derivative, partial_sum, poly_to_json, seminorm, truncate

SEG = {"factors": [{"kind": "segment", "a": [2, 0], "b": [3, 0]}]}
QUARTER = {"factors": [{"kind": "ball", "center": [0, 0], "radius": 0.25}]}


def disk_scene(mu=None, h=0.01):
    return DomainScene((Disk(0j, 1.0),), (BoundaryPortion(),), (0j,), mu or Mu(), grid=GridConfig(2 * h, h))


SCENE = disk_scene()


def req(rid, expr, scene=SCENE, mode="fixed-center", **kw):
    doc = {"id": rid, "compact": SEG, "target": {"kind": "expression", "expr": expr}, "epsilon": 1e-2, "m": 2,
           "mode": mode, **kw}
    if mode == "uniform-center":
        doc["center_compact"] = QUARTER
    return requirement_from_json(doc, scene)


@pytest.fixture(scope="module")
def one():
    reqs = [req("a", "1")]
    return construct(SCENE, reqs), reqs


@pytest.fixture(scope="module")
def two():
    reqs = [req("a", "1"), req("b", "-1")]
    return construct(SCENE, reqs), reqs


def horner(coeffs, z):
    # independent evaluation from the dense coefficient list
    out = np.zeros_like(z)
    for c in coeffs[::-1]:
        out = out * z + c
    return out


def dense(f, cut):
    return [f.coefficient((k,)) for k in range(cut + 1)]


# --- construct ---

def test_empty_schedule():
    cert = construct(SCENE, [])
    assert cert.f.is_zero() and cert.cuts == []
    assert verify(cert, SCENE, []).passed


def test_single_requirement_return_is_exact(one):
    cert, reqs = one
    assert cert.cuts == [cert.f.max_enum_index]
    z = np.linspace(2, 3, 1001)
    assert np.max(np.abs(horner(dense(cert.f, cert.cuts[0]), z) - 1)) < 1e-2
    assert cert.requirements[0]["E_L"] == 0.0


def test_two_requirement_oscillation(two):
    cert, reqs = two
    l1, l2 = cert.cuts
    assert l1 < l2
    z = np.linspace(2, 3, 1537)
    assert np.max(np.abs(horner(dense(cert.f, l1), z) - 1)) < 1e-2
    assert np.max(np.abs(horner(dense(cert.f, l2), z) + 1)) < 1e-2
    assert verify(cert, SCENE, reqs).passed


def test_tampered_cut_fails(two):
    cert, reqs = two
    bad = Certificate.from_json(cert.to_json())
    bad.cuts[1] -= 1
    rep = verify(bad, SCENE, reqs)
    assert not rep.passed
    assert rep.entries[1].E_K > 1e-2


def test_wrong_scene_is_refused(one):
    cert, reqs = one
    with pytest.raises(VerificationRefused):
        verify(cert, disk_scene(Mu.even()), reqs)


def test_cut_identity_at_every_stage(two):
    cert, _ = two
    rng = np.random.default_rng(7)
    z = rng.uniform(-3, 3, 20) + 1j * rng.uniform(-3, 3, 20)
    for cut in cert.cuts:
        fr = truncate(cert.f, cut)
        a = partial_sum(fr, (0j,), cut)(z)
        b = fr(z)
        assert np.all(np.abs(a - b) <= 1e-9 * np.maximum(1, np.abs(b)))


def test_budget_ledger_is_respected(two):
    cert, _ = two
    ledger = cert.requirements[0]["budget"]
    assert [e["reserved"] for e in ledger] == [1e-2 / 4]
    for e in ledger:
        assert e["measured_K_change"] <= e["reserved"]
        assert e["measured_L_change"] <= e["reserved"]
        assert e["cauchy_estimate"] == 0.0


def test_mu_even_cuts():
    scene = disk_scene(Mu.even())
    cert = construct(scene, [req("a", "1", scene), req("b", "-1", scene)])
    assert all(c % 2 == 0 for c in cert.cuts)
    assert cert.cuts[0] < cert.cuts[1]


def test_determinism(one):
    cert, reqs = one
    again = construct(SCENE, reqs)
    assert again.dumps() == cert.dumps()


def test_certificate_round_trip(two):
    cert, _ = two
    assert Certificate.from_json(cert.to_json()).dumps() == cert.dumps()


def test_seed_polynomial_is_kept_below_first_cut():
    seed = Poly((0j,), {(0,): 0.5, (1,): 0.25})
    cert = construct(SCENE, [req("a", "1")], seed=seed)
    z = np.linspace(2, 3, 301)
    assert np.max(np.abs(truncate(cert.f, cert.cuts[0])(z) - 1)) < 1e-2


def test_structured_failure_names_requirement_and_binding():
    with pytest.raises(ConstructionFailure) as info:
        construct(SCENE, [req("hard", "1", epsilon=1e-9)], Caps(max_terms=6, retries=1))
    e = info.value
    assert e.requirement == "hard" and e.binding in ("K", "L2")
    assert e.to_json()["status"] == "failure"


def test_disjointness_violation_is_rejected():
    bad = requirement_from_json({"id": "x", "compact": {"factors": [{"kind": "segment", "a": [0.5, 0], "b": [2, 0]}]},
                                 "target": {"kind": "expression", "expr": "1"}, "epsilon": 1e-2, "m": 2}, SCENE)
    with pytest.raises(RequirementError, match="disjointness"):
        construct(SCENE, [bad])


def test_o_mode_errors_match_symbolic_seminorm():
    target = {"kind": "polynomial", "poly": poly_to_json(Poly((0j,), {(0,): 1.0, (2,): 1.0}))}
    r = requirement_from_json({"id": "o", "compact": SEG, "target": {**target, "mode": "O"}, "family": [[0], [1]],
                               "epsilon": 1e-2, "m": 2}, SCENE)
    cert = construct(SCENE, [r])
    rep = verify(cert, SCENE, [r])
    assert rep.passed
    diff = truncate(cert.f, cert.cuts[0]) - Poly((0j,), {(0,): 1.0, (2,): 1.0})
    K = r.compact.resampled(2)
    assert abs(rep.entries[0].E_K - seminorm(diff, K, DerivativeFamily.up_to_order(1, 1))) <= 1e-12
    # the derivative part on its own, computed from the differentiated polynomial
    d1 = float(np.max(np.abs(derivative(diff, (1,))(K.validation_array()[:, 0]))))
    assert d1 <= rep.entries[0].E_K + 1e-12


# --- uniform-center mode ---

def test_uniform_singleton_equals_fixed(two):
    cert, reqs = two
    point = compact_from_json({"point": [[0, 0]]}, SCENE)
    a = verify(cert, SCENE, reqs)
    b = verify_uniform_center(cert, SCENE, reqs, point)
    for x, y in zip(a.entries, b.entries):
        assert x.E_K == pytest.approx(y.E_K, rel=1e-12, abs=1e-15)
        assert x.E_L == pytest.approx(y.E_L, rel=1e-9, abs=1e-15)


def test_uniform_single_stage_is_center_independent(one):
    cert, reqs = one
    lt = compact_from_json(QUARTER, SCENE)
    a = verify(cert, SCENE, reqs).entries[0]
    b = verify_uniform_center(cert, SCENE, reqs, lt).entries[0]
    assert b.passed
    assert abs(a.E_K - b.E_K) < 1e-6


def test_uniform_two_stage_fails_honestly(two):
    uni = [req("a", "1", mode="uniform-center"), req("b", "-1")]
    with pytest.raises(ConstructionFailure, match="infeasible budget"):
        construct(SCENE, uni)
    cert, reqs = two
    rep = verify_uniform_center(cert, SCENE, reqs, compact_from_json(QUARTER, SCENE))
    assert not rep.passed and not rep.entries[0].passed


# --- plan_schedule ---

def test_plan_schedule_reservations():
    plans = plan_schedule([req("a", "1"), req("b", "-1")], Mu())
    assert plans[0].reservations == []
    assert plans[1].reservations == [("a", 1e-2 / 4)]
    with pytest.raises(ValueError, match="duplicate"):
        plan_schedule([req("a", "1"), req("a", "-1")], Mu())


def test_cut_rule_examples():
    assert cut_for(Mu.even(), 7) == 8
    assert cut_for(Mu(), 7) == 7
    assert cut_for(Mu(), 3, previous_cut=5) == 6


@given(st.integers(1, 7), st.integers(0, 200), st.data())
@settings(max_examples=60, deadline=None)
def test_cuts_are_in_mu_and_minimal(modulus, n, data):
    residues = tuple(data.draw(st.sets(st.integers(0, modulus - 1), min_size=1)))
    mu = Mu("residues", modulus, residues)
    c = cut_for(mu, n)
    assert c >= n and c in mu
    assert all(k not in mu for k in range(n, c))


def test_singleton_requirement_is_one_point():
    r = requirement_from_json({"id": "p", "compact": {"point": [[2.5, 0]]}, "target": {"kind": "expression", "expr": "3"},
                               "epsilon": 1e-3, "m": 2}, SCENE)
    cert = construct(SCENE, [r])
    assert abs(truncate(cert.f, cert.cuts[0])(2.5) - 3) < 1e-3


# --- scan ---

def test_scan_zero_function():
    rep = universal_point_scan(Poly.zero((0j,)), 0, 0, 10)
    assert {v for _, v in rep.values} == {0j}
    assert len(rep.cells) == 1
    assert "coverage" in rep.to_json() and "universal" not in " ".join(rep.to_json())


def test_scan_one_plus_z_at_center():
    rep = universal_point_scan(Poly((0j,), {(0,): 1.0, (1,): 1.0}), 0, 0, 5)
    assert {v for _, v in rep.values} == {1 + 0j}
    assert len(rep.cells) == 1


def test_scan_horizon_zero_is_constant_term(two):
    cert, _ = two
    rep = universal_point_scan(cert.f, 0, 2.5, 0)
    assert rep.values == [(0, cert.f.coefficient((0,)))]


def test_scan_oscillation_hits_two_cells(two):
    cert, _ = two
    rep = universal_point_scan(cert.f, 0, 2.5, cert.cuts[-1], box=(-4, 4, -4, 4), cell=1.0)
    vals = dict(rep.values)
    assert abs(vals[cert.cuts[0]] - 1) < 1e-2 and abs(vals[cert.cuts[1]] + 1) < 1e-2
    assert len(rep.cells) >= 2


def test_k_error_matches_independent_horner(one):
    cert, reqs = one
    z = reqs[0].compact.validation_array()[:, 0]
    ref = np.max(np.abs(horner(dense(cert.f, cert.cuts[0]), z) - 1))
    assert k_error(cert.f, cert.cuts[0], reqs[0]) == pytest.approx(ref, rel=1e-9)
