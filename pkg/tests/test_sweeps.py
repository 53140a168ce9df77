import math

import pytest

from twistlab import sweeps
from twistlab.fourier import g_star
from twistlab.maps import CircleFunction
from twistlab.rotation import Evidence, GridSpec, SearchBudget
from twistlab.sweeps import (
    CSV_HEADER,
    InconclusiveAtThisResolution,
    SweepConfig,
    SweepRow,
    bullett_expectation,
    continuity_probe,
    lambda_range,
    lambda_star,
    nonmonotonicity_check,
    resolve_threads,
    rows_to_csv,
    sweep,
)

SMALL = GridSpec(8, 8)


def test_lambda_range_counts():
    assert len(lambda_range(0, 2, 0.05)) == 41
    assert lambda_range(0, 2, 0.1)[-1] == 2.0
    assert lambda_range(1, 0, 0.1) == []
    with pytest.raises(ValueError):
        lambda_range(0, 1, 0)


def test_lambda_star_values():
    assert lambda_star(CircleFunction.single_cosine()) == pytest.approx(1.0)
    assert lambda_star(CircleFunction.sawtooth()) == pytest.approx(4.0)
    # g*_N peaks at x = 0 where it equals 1/4 minus the tail
    assert lambda_star(g_star(41)) > 4.0


def test_config_validation_and_round_trip():
    with pytest.raises(ValueError):
        SweepConfig(lambdas=(1.0, 0.5))
    with pytest.raises(ValueError):
        SweepConfig(lambdas=(1.0,), n=999)
    c = SweepConfig("translated", "gstar", 11, (0.0, 0.5), SMALL, 1000)
    assert SweepConfig.from_dict(c.to_dict()) == c


def test_sweep_rows_ordered_and_thread_independent():
    cfg = SweepConfig("standard", "cos", None, tuple(lambda_range(0, 1.25, 0.25)), SMALL, 1000, q_max=1)
    a = rows_to_csv(sweep(cfg, threads=1))
    b = rows_to_csv(sweep(cfg, threads=3))
    assert a == b
    lines = a.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert [float(l.split(",")[0]) for l in lines[1:]] == list(cfg.lambdas)


def test_sweep_straddle_and_lambda_star_tier():
    cfg = SweepConfig("standard", "cos", None, (0.3, 1.0, 1.5), SMALL, 2000, q_max=1)
    rows = sweep(cfg)
    for r in rows:
        assert r.rho_min_hat <= 2 / cfg.n and r.rho_max_hat >= -2 / cfg.n
    assert all(r.tier in ("a", "b") for r in rows if r.lam >= 1.0)


def test_translated_rows_have_no_tier():
    rows = sweep(SweepConfig("translated", "cos", None, (0.5,), SMALL, 1000))
    assert rows[0].tier == "n/a" and rows[0].rho_max_hat > 0


def test_failed_row_serialization():
    r = SweepRow(0.5, math.nan, math.nan, "failed", math.nan, error="boom")
    assert r.failed and r.csv_fields()[3] == "failed"


def test_seconds_blank_unless_requested():
    rows = sweep(SweepConfig("standard", "cos", None, (0.2,), SMALL, 1000, q_max=1))
    assert rows[0].csv_fields()[-1] == ""
    rows = sweep(SweepConfig("standard", "cos", None, (0.2,), SMALL, 1000, q_max=1, record_time=True))
    assert float(rows[0].csv_fields()[-1]) >= 0


def test_resolve_threads(monkeypatch):
    monkeypatch.delenv("TWISTLAB_THREADS", raising=False)
    assert resolve_threads(None) == 1
    monkeypatch.setenv("TWISTLAB_THREADS", "2")
    assert resolve_threads(None) == 2
    assert resolve_threads(0) >= 1


def test_bullett_windows():
    assert bullett_expectation(0.95) == "no_ric"
    assert bullett_expectation(4 / 3) == "ric"
    assert bullett_expectation(1.5) == "no_ric"
    assert bullett_expectation(0.918) == "unknown"
    assert bullett_expectation(0.5) == "unknown"


def test_bullett_lambda_bound():
    with pytest.raises(ValueError):
        sweeps.bullett_check([9.0])


def test_nonmono_inconclusive_carries_report():
    with pytest.raises(InconclusiveAtThisResolution) as ei:
        nonmonotonicity_check(41, 1000, GridSpec(4, 4))
    rep = ei.value.report
    assert not rep.demonstrated and rep.resolution == 10 / 1000
    rep2 = nonmonotonicity_check(41, 1000, GridSpec(4, 4), control=True, raise_inconclusive=False)
    assert rep2.rho_low == rep.rho_low and rep2.control["lambda"] == 0.5


def test_nonmono_margin_rule():
    rep = nonmonotonicity_check(41, 1000, GridSpec(4, 4), raise_inconclusive=False)
    assert rep.margin == max(10 / 1000, rep.rho_low / 2 - rep.rho_high)


def test_continuity_single_row():
    rep = continuity_probe(4 / 3, [5], 1000, GridSpec(4, 4))
    assert len(rep.rows) == 1 and rep.within_tolerance is None
    with pytest.raises(ValueError):
        continuity_probe(4 / 3, [11, 5], 1000)


def test_ag_scan_integrable_only():
    rep = sweeps.a_g_scan(CircleFunction.single_cosine(), 0.0, 0.1, SearchBudget(1000, GridSpec(4, 4), 1))
    assert rep.lambdas == (0.0,) and rep.labels == ("RIC-consistent",) and rep.is_prefix


def test_ag_scan_gap_detection(monkeypatch):
    tiers = {0.0: "c", 0.5: "b", 1.0: "c", 1.5: "a"}

    def fake(m, budget):
        t = tiers[m.lam]
        return Evidence(t, "", 0.0, 0.0, 0.0, 0.0)

    monkeypatch.setattr(sweeps, "no_ric_evidence", fake)
    rep = sweeps.a_g_scan(CircleFunction.sawtooth(), 1.5, 0.5)
    assert rep.labels == ("RIC-consistent", "no-RIC", "RIC-consistent", "no-RIC")
    assert not rep.is_prefix and rep.gaps == (1.0,)
