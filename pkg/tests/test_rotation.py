import math

import numpy as np
import pytest

from twistlab import _kernels as K
from twistlab.maps import CircleFunction, MapInstance
from twistlab.rotation import (
    GridSpec,
    SearchBudget,
    integer_step_seeds,
    no_ric_evidence,
    rho_interval_estimate,
    rho_v_estimate,
)

COS = CircleFunction.single_cosine()
SAW = CircleFunction.sawtooth()


def test_integrable_rate_is_zero():
    o = rho_v_estimate(MapInstance.standard(0.0, COS), (0.3, 0.7), 5000)
    assert o.rho_hat == 0.0 and o.displacement_y == 0.0


def test_displacement_equals_rate_times_steps():
    m = MapInstance.standard(0.9, SAW)
    o = rho_v_estimate(m, (0.17, 0.3), 12345)
    assert math.isclose(o.rho_hat * o.n, o.displacement_y, rel_tol=1e-15, abs_tol=1e-15)
    assert o.n == 12345 and not o.escaped


def test_compensated_displacement_matches_fsum():
    m = MapInstance.standard(0.05, COS)
    n = 2000
    tr = m.iterate(0.11, 0.2, n, "lift")
    steps = [float(m.dy(x)) for x in tr.x[:-1]]
    o = rho_v_estimate(m, (0.11, 0.2), n)
    assert o.displacement_y == pytest.approx(math.fsum(steps), abs=1e-9)


def test_integer_seed_is_exact_fixed_step():
    m = MapInstance.standard(1.25, COS)
    seeds = integer_step_seeds(m)
    assert seeds
    for s in seeds:
        a, b, kind, kc = m._kargs()
        dy = K.step_dy(kind, kc, a, b, s.x)  # the increment the orbit kernels use
        assert abs(abs(dy) - 1.0) <= 2.3e-16
        # independent root check: lam*cos(2 pi x) = +-1
        assert abs(abs(1.25 * math.cos(2 * math.pi * s.x)) - 1.0) < 1e-15
    # an exact float fixed step exists for the first upward root
    exact = [s for s in seeds if K.step_dy(kind, kc, a, b, s.x) == 1.0]
    assert exact and exact[0].x == pytest.approx(0.10241638234956671, abs=1e-16)


def test_integer_seed_sawtooth_lambda_five():
    m = MapInstance.standard(5.0, SAW)
    xs = sorted(s.x for s in integer_step_seeds(m) if m.dy(s.x) > 0)
    assert xs[0] == pytest.approx(0.05, abs=1e-15)
    assert xs[-1] == pytest.approx(0.95, abs=1e-15)


def test_no_integer_seeds_below_threshold():
    assert integer_step_seeds(MapInstance.standard(0.9, COS)) == []


def test_escape_stops_early():
    m = MapInstance.standard(1.25, COS)
    x = integer_step_seeds(m)[0].x
    o = rho_v_estimate(m, (x, 0.0), 1000, y_escape=10.5)
    assert o.escaped and o.n < 1000 and abs(o.rho_hat) == 1.0


def test_interval_ordering_and_ties():
    m = MapInstance.standard(0.0, COS)
    est = rho_interval_estimate(m, GridSpec(4, 3), 1000)
    assert est.rho_min_hat == est.rho_max_hat == 0.0
    # first grid point wins ties: x = 0, y = y_range[0]
    assert tuple(est.witness_max.initial) == (0.0, -2.0)


def test_grid_points_row_major():
    xs, ys = GridSpec(4, 2, (0.0, 1.0)).points()
    assert list(xs) == [0, 0.25, 0.5, 0.75] * 2
    assert list(ys) == [0.0] * 4 + [1.0] * 4


def test_extra_seed_can_be_witness():
    m = MapInstance.standard(1.25, COS)
    x = integer_step_seeds(m)[0].x
    est = rho_interval_estimate(m, GridSpec(2, 2), 1000, seeds=[(x, 0.0)], auto_seed=False)
    assert abs(est.rho_max_hat - 1.0) < 1e-12 or abs(est.rho_min_hat + 1.0) < 1e-12


@pytest.mark.parametrize("lam", [0.0, 0.05])
def test_small_lambda_no_evidence(lam):
    ev = no_ric_evidence(MapInstance.standard(lam, COS), SearchBudget(n=2000, grid=GridSpec(16, 16), q_max=2))
    assert ev.tier == "c" and not ev.no_ric


def test_above_threshold_has_orbit_pair():
    ev = no_ric_evidence(MapInstance.standard(1.25, COS), SearchBudget(n=2000, grid=GridSpec(8, 8), q_max=1))
    assert ev.tier == "a" and ev.orbits_up and ev.orbits_down


def test_evidence_rejects_translated():
    with pytest.raises(ValueError):
        no_ric_evidence(MapInstance.translated(0.1, COS))


def test_excursion_bounds_displacement():
    m = MapInstance.standard(0.8, SAW)
    est = rho_interval_estimate(m, GridSpec(8, 8), 3000)
    for w in (est.witness_min, est.witness_max):
        assert w.max_y_excursion >= abs(w.displacement_y)


def test_integrable_rate_exact_long():
    o = rho_v_estimate(MapInstance.standard(0.0, SAW), (0.41, -1.3), 10_000)
    assert o.rho_hat == 0.0
