import math

import numpy as np
import pytest

from twistlab.lecalvez import (
    AuditViolation,
    Triplet,
    classify_triplet,
    envelopes,
    find_vertical_periodic,
    k_section,
    lift_order_compare,
    newton_vertical,
    triplet_order_audit,
)
from twistlab.maps import CircleFunction, MapInstance

COS = CircleFunction.single_cosine()


def brute_roots(lam, x, s, q, cells=2**16):
    """Independent section oracle: plain numpy iteration and sign changes on a fine grid."""
    B = q * lam + 1.0
    ys = np.linspace(s / q - B, s / q + B, cells + 1)
    X, Y = np.full_like(ys, x), ys.copy()
    for _ in range(q):
        Y = Y + lam * np.cos(2 * np.pi * X)
        X = X + Y
    F = X - x - s
    idx = np.flatnonzero(np.sign(F[:-1]) != np.sign(F[1:]))
    return 0.5 * (ys[idx] + ys[idx + 1])


@pytest.mark.parametrize("x,s,q", [(0.0, 0, 2), (0.31, 1, 2), (0.77, 0, 3), (0.5, 2, 3)])
def test_section_matches_brute_force(x, s, q):
    m = MapInstance.standard(2.0, COS)
    sec = k_section(m, x, s, q)
    ref = brute_roots(2.0, x, s, q)
    assert len(sec.roots) == len(ref)
    cell = 2 * (q * 2.0 + 1.0) / 2**16
    assert np.max(np.abs(np.array(sec.roots) - ref)) <= cell
    assert max(sec.residuals) < 1e-9


def test_q1_closed_form():
    lam = 0.7
    m = MapInstance.standard(lam, COS)
    env = envelopes(m, 1, 1, 32)
    assert np.allclose(env.mu_minus, 1 - lam * np.cos(2 * np.pi * env.grid), atol=1e-12)
    assert np.array_equal(env.mu_minus, env.mu_plus)
    assert np.allclose(env.nu_plus, 1.0, atol=1e-12)


@pytest.mark.parametrize("s,q", [(0, 1), (1, 2), (2, 3)])
def test_integrable_envelopes_flat(s, q):
    env = envelopes(MapInstance.standard(0.0, COS), s, q, 16)
    for arr in (env.mu_minus, env.mu_plus, env.nu_minus, env.nu_plus):
        assert np.max(np.abs(arr - s / q)) < 1e-12


@pytest.mark.parametrize("s,q", [(0, 1), (0, 2), (0, 3), (1, 2)])
def test_image_exchanges_envelopes(s, q):
    env = envelopes(MapInstance.standard(2.0, COS), s, q, 32)
    assert env.image_exchange_residual < 1e-9
    assert env.membership_residual < 1e-9
    assert np.all(env.mu_minus <= env.mu_plus) and np.all(env.nu_minus <= env.nu_plus)


def test_nx_floor():
    with pytest.raises(ValueError):
        envelopes(MapInstance.standard(1.0, COS), 0, 1, 8)


@pytest.mark.parametrize("lam,p,expect,margin", [
    (0.5, 2, "Negative", 0.5),
    (2.0, 2, "Undetermined", None),
    (3.5, 2, "Positive", 0.5),
])
def test_translated_q1_margins_closed_form(lam, p, expect, margin):
    # q = 1: K(0,1) is the graph y = -g(x) - lam, its image sits at height 0
    c = classify_triplet(MapInstance.translated(lam, COS), Triplet(0, p, 1), nx=32)
    assert c.variant == expect
    assert c.pos_margin == pytest.approx(lam - 1 - p, abs=1e-9)
    assert c.neg_margin == pytest.approx(p - 1 - lam, abs=1e-9)
    if margin is not None:
        assert c.margin == pytest.approx(margin, abs=1e-9)


def test_integrable_classes():
    m = MapInstance.standard(0.0, COS)
    assert classify_triplet(m, Triplet(0, 1, 1)).variant == "Negative"
    assert classify_triplet(m, Triplet(0, 0, 1)).variant == "Undetermined"


def test_vertical_orbits_above_threshold():
    m = MapInstance.standard(1.25, COS)
    up = find_vertical_periodic(m, 1, 1)
    down = find_vertical_periodic(m, -1, 1)
    # independent: lam cos(2 pi x) = +-1 at y = 0
    r = math.acos(1 / 1.25) / (2 * math.pi)
    assert sorted(round(o.point.x, 9) for o in up) == sorted(round(v, 9) for v in (r, 1 - r))
    assert sorted(round(o.point.x, 9) for o in down) == sorted(round(v, 9) for v in (0.5 - r, 0.5 + r))
    assert all(o.residual < 1e-10 and o.matches(Triplet(o.s, 1, 1)) for o in up)


def test_no_vertical_orbits_integrable():
    assert find_vertical_periodic(MapInstance.standard(0.0, COS), 1, 1) == []


def test_newton_from_nearby_seed():
    m = MapInstance.standard(1.25, COS)
    o = newton_vertical(m, 0.11, 0.05, 1, 1)
    assert o is not None and o.point.x == pytest.approx(0.10241638234956671, abs=1e-10)


def test_matches_modulo_q():
    m = MapInstance.standard(1.25, COS)
    o = find_vertical_periodic(m, 1, 1)[0]
    assert o.matches(Triplet(o.s + 3, 1, 1))
    assert not o.matches(Triplet(o.s, 2, 1))


def test_lift_order():
    t1, t2 = MapInstance.translated(0.1, COS), MapInstance.translated(0.4, COS)
    assert lift_order_compare(t1, t2) == "LE"
    assert lift_order_compare(t2, t1) == "GE"
    assert lift_order_compare(t1, t1) == "EQ"
    s1, s2 = MapInstance.standard(0.1, COS), MapInstance.standard(0.4, COS)
    assert lift_order_compare(s1, s2) == "Incomparable"


def test_audit_pattern_is_monotone():
    rep = triplet_order_audit(COS, [0.5, 2.0, 3.5], Triplet(0, 2, 1), nx=32)
    # mirrored by the closed-form classification above
    assert rep.pattern == ["Negative", "Undetermined", "Positive"]
    assert rep.orbit_found[1]


def test_audit_rejects_unsorted():
    with pytest.raises(ValueError):
        triplet_order_audit(COS, [1.0, 0.5], Triplet(0, 1, 1))


def test_audit_violation_carries_parameters():
    err = AuditViolation(1.0, 2.0, "x")
    assert (err.lam_before, err.lam_after) == (1.0, 2.0)
