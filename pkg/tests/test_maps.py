import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistlab import _kernels as K
from twistlab.maps import CircleFunction, MapInstance, NonDifferentiablePoint, mod1

COS = CircleFunction.single_cosine()
SAW = CircleFunction.sawtooth()


def test_cos2pi_matches_numpy():
    u = np.linspace(-3.0, 3.0, 200_001)
    u = u[::97]
    ours = np.array([K.cos2pi(v) for v in u])
    # reduce first so the oracle does not carry rounding of 2*pi*u
    assert np.max(np.abs(ours - np.cos(2 * np.pi * (u - np.round(u))))) < 1e-15


def test_series_against_direct_sum():
    rng = np.random.default_rng(1)
    coeffs = rng.normal(size=9)
    g = CircleFunction.cosine_series(coeffs)
    xs = rng.random(500)
    direct = sum(c * np.cos(2 * np.pi * (k + 1) * xs) for k, c in enumerate(coeffs))
    assert np.max(np.abs(g(xs) - direct)) < 1e-13


def test_odd_series_uses_same_values():
    coeffs = [0.3, 0.0, -0.2, 0.0, 0.05]
    g = CircleFunction.cosine_series(coeffs)
    xs = np.linspace(0, 1, 301)
    direct = sum(c * np.cos(2 * np.pi * (k + 1) * xs) for k, c in enumerate(coeffs))
    assert np.max(np.abs(g(xs) - direct)) < 1e-14


def test_sawtooth_values_and_extrema():
    assert SAW(0.0) == pytest.approx(0.25)
    assert SAW(0.5) == pytest.approx(-0.25)
    assert SAW(0.05) == pytest.approx(0.2)
    assert SAW.max_value == pytest.approx(0.25)
    assert SAW.sup_norm == pytest.approx(0.25)


def test_sawtooth_kinks_not_differentiable():
    with pytest.raises(NonDifferentiablePoint):
        SAW.derivative(0.5)
    with pytest.raises(NonDifferentiablePoint):
        SAW.derivative(1.0)
    assert SAW.derivative(0.3) == -1.0
    assert SAW.derivative(0.7) == 1.0


def test_cosine_extremum():
    assert COS.max_value == pytest.approx(1.0, abs=1e-15)
    assert mod1(COS.argmax_x) == pytest.approx(0.0, abs=1e-7) or COS.argmax_x == pytest.approx(1.0, abs=1e-7)
    assert COS.min_value == pytest.approx(-1.0, abs=1e-15)


def test_zero_mean_required():
    with pytest.raises(ValueError):
        CircleFunction.cosine_series([])


def test_kernel_orbit_matches_python_steps():
    m = MapInstance.standard(0.02, CircleFunction.cosine_series([0.5, 0.2, 0.1]))
    tr = m.iterate(0.123, 0.4, 50, "lift")
    x, y = 0.123, 0.4
    for k in range(1, 51):
        x, y = m.apply_lift(x, y)
        assert tr.x[k] == pytest.approx(x, abs=1e-11)
        assert tr.y[k] == pytest.approx(y, abs=1e-11)


def test_cylinder_and_torus_projections():
    m = MapInstance.standard(0.01, COS)
    lift = m.iterate(0.2, 0.1, 40, "lift")
    cyl = m.iterate(0.2, 0.1, 40, "cylinder")
    tor = m.iterate(0.2, 0.1, 40, "torus")
    assert np.all((0 <= cyl.x) & (cyl.x < 1))
    d = np.abs(mod1(lift.x) - cyl.x)
    assert np.max(np.minimum(d, 1 - d)) < 1e-10
    assert np.max(np.abs(cyl.y - lift.y)) < 1e-10
    dt = np.abs(mod1(cyl.y) - tor.y)
    assert np.max(np.minimum(dt, 1 - dt)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-3, 3), y=st.floats(-3, 3), lam=st.floats(0, 4))
def test_deck_equivariance(x, y, lam):
    m = MapInstance.standard(lam, COS)
    x1, y1 = m.apply_lift(x + 1, y)
    x0, y0 = m.apply_lift(x, y)
    assert x1 - 1 == pytest.approx(x0, abs=1e-12)
    assert y1 == pytest.approx(y0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(x=st.floats(0, 1), y=st.floats(-5, 5), lam=st.floats(0, 8), trans=st.booleans())
def test_inverse_round_trip(x, y, lam, trans):
    m = (MapInstance.translated if trans else MapInstance.standard)(lam, SAW)
    xp, yp = m.apply_lift(x, y)
    xb, yb = m.inverse_lift(xp, yp)
    assert xb == pytest.approx(x, abs=1e-12)
    assert yb == pytest.approx(y, abs=1e-12)


def test_jacobian_against_finite_difference():
    m = MapInstance.standard(1.1, CircleFunction.cosine_series([1.0, 0.3]))
    h = 1e-6
    for x, y in [(0.1, 0.2), (0.37, -1.0), (0.8, 2.5)]:
        J = m.jacobian(x, y)
        fx = (np.array(m.apply_lift(x + h, y)) - np.array(m.apply_lift(x - h, y))) / (2 * h)
        fy = (np.array(m.apply_lift(x, y + h)) - np.array(m.apply_lift(x, y - h))) / (2 * h)
        assert np.allclose(J[:, 0], fx, atol=1e-7)
        assert np.allclose(J[:, 1], fy, atol=1e-7)
        assert abs(np.linalg.det(J) - 1) < 1e-12


def test_flux():
    assert abs(MapInstance.standard(3.0, COS).flux()) < 1e-12
    assert MapInstance.translated(0.4, COS).flux() == pytest.approx(0.4, abs=1e-12)


def test_lift_q_jacobian_finite_difference():
    m = MapInstance.standard(0.8, COS)
    X, Y, J = m.lift_q_jacobian(0.3, 0.1, 3)
    h = 1e-6
    px = [(np.array(m.lift_q(np.array([0.3 + s * h]), 0.1, 3)).ravel()) for s in (1, -1)]
    assert np.allclose(J[:, 0], (px[0] - px[1]) / (2 * h), atol=1e-6)
    assert abs(np.linalg.det(J) - 1) < 1e-11


def test_cylinder_step_matches_lift_displacement():
    m = MapInstance.standard(2.3, CircleFunction.cosine_series([0.4, -0.1]))
    for x, y in [(0.1, 0.2), (0.9, -3.0), (0.5, 7.25)]:
        assert m.apply_cylinder(x, y).y - y == m.apply_lift(x, y).y - y


def test_series_evenness_exact():
    g = CircleFunction.cosine_series([0.3, 0.0, 0.1, 0.05])
    xs = np.linspace(0.0, 1.0, 1001)
    assert np.array_equal(g(xs), g(-xs))


def test_gstar_argmax_against_scan():
    from twistlab.fourier import g_star
    from twistlab.sweeps import lambda_star

    g = g_star(41)
    xs = np.arange(2**16) / 2**16
    scan = float(np.max(g(xs)))
    assert g.max_value >= scan - 1e-15
    assert lambda_star(g) == pytest.approx(1 / scan, rel=1e-9)
