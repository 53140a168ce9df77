"""Parameter sweeps and the headline experiments built on them."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .fourier import DEFAULT_N, g_star, truncation_error
from .lecalvez import find_vertical_periodic
from .maps import CircleFunction, MapInstance, TwistError
from .rotation import (
    DEFAULT_Y_ESCAPE,
    GridSpec,
    SearchBudget,
    integer_step_seeds,
    no_ric_evidence,
    rho_interval_estimate,
)

CSV_HEADER = ["lambda", "rho_max_hat", "rho_min_hat", "tier", "max_excursion", "seconds"]

BULLETT_NO_RIC = ((0.918, 1.0), (4.0 / 3.0, math.inf))
BULLETT_RIC = 4.0 / 3.0


class DegenerateForcing(TwistError):
    pass


class InconclusiveAtThisResolution(TwistError):
    def __init__(self, report, reason):
        super().__init__(reason)
        self.report = report
        self.reason = reason


def make_g(name: str, N: int | None = None) -> CircleFunction:
    if name == "cos":
        return CircleFunction.single_cosine()
    if name == "sawtooth":
        return CircleFunction.sawtooth()
    if name == "gstar":
        return g_star(N or DEFAULT_N)
    raise ValueError(f"unknown forcing {name!r}")


def lambda_star(g: CircleFunction) -> float:
    if not g.max_value > 0:
        raise DegenerateForcing(f"max of g is {g.max_value}; a zero-mean nonzero g has a positive max")
    return 1.0 / g.max_value


def lambda_range(a: float, b: float, step: float) -> list[float]:
    """a, a+step, ... up to b inclusive (within step/1e6); computed as a + k*step."""
    if step <= 0:
        raise ValueError("step must be > 0")
    k = math.floor((b - a) / step + 1e-6)
    return [round(a + i * step, 12) for i in range(k + 1)] if k >= 0 else []


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("TWISTLAB_THREADS")
        threads = int(env) if env else 1
    if threads == 0:
        threads = os.cpu_count() or 1
    return max(1, threads)


@dataclass(frozen=True)
class SweepConfig:
    family: str = "standard"
    g: str = "cos"
    N: int | None = None
    lambdas: tuple[float, ...] = ()
    grid: GridSpec = field(default_factory=GridSpec)
    n: int = 10_000
    y_escape: float = DEFAULT_Y_ESCAPE
    q_max: int = 3
    record_time: bool = False

    def __post_init__(self):
        lams = tuple(float(l) for l in self.lambdas)
        if list(lams) != sorted(lams):
            raise ValueError("lambda values must be ascending")
        if self.n < 1000:
            raise ValueError("n must be >= 1000")
        if self.family not in ("standard", "translated"):
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "lambdas", lams)

    def forcing(self) -> CircleFunction:
        return make_g(self.g, self.N)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambdas"] = list(self.lambdas)
        d["grid"] = {"nx": self.grid.nx, "ny": self.grid.ny, "y_range": list(self.grid.y_range)}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SweepConfig:
        d = dict(d)
        gr = d.pop("grid")
        return cls(grid=GridSpec(gr["nx"], gr["ny"], tuple(gr["y_range"])), **d)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    rho_max_hat: float
    rho_min_hat: float
    tier: str
    max_excursion: float
    seconds: float | None = None
    error: str | None = None
    witness_max: dict | None = None
    witness_min: dict | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def csv_fields(self) -> list[str]:
        sec = "" if self.seconds is None else f"{self.seconds:.3f}"
        if self.failed:
            return [repr(self.lam), "nan", "nan", "failed", "nan", sec]
        return [repr(self.lam), repr(self.rho_max_hat), repr(self.rho_min_hat), self.tier,
                repr(self.max_excursion), sec]

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam, "rho_max_hat": self.rho_max_hat, "rho_min_hat": self.rho_min_hat,
            "tier": self.tier, "max_excursion": self.max_excursion, "seconds": self.seconds,
            "error": self.error, "witness_max": self.witness_max, "witness_min": self.witness_min,
        }


def _row(config: SweepConfig, g: CircleFunction, lam: float) -> SweepRow:
    t0 = time.perf_counter()
    try:
        m = MapInstance(config.family, lam, g)
        if config.family == "standard":
            ev = no_ric_evidence(m, SearchBudget(config.n, config.grid, config.q_max, y_escape=config.y_escape))
            est, tier = ev.interval, ev.tier
        else:
            est = rho_interval_estimate(m, config.grid, config.n, y_escape=config.y_escape)
            tier = "n/a"
    except Exception as exc:  # a failed row must not abort the sweep
        return SweepRow(lam, math.nan, math.nan, "failed", math.nan, error=f"{type(exc).__name__}: {exc}")
    secs = time.perf_counter() - t0 if config.record_time else None
    return SweepRow(lam, est.rho_max_hat, est.rho_min_hat, tier, est.max_excursion, secs,
                    witness_max=est.witness_max.to_dict(), witness_min=est.witness_min.to_dict())


def sweep(config: SweepConfig, threads: int | None = None) -> list[SweepRow]:
    """One row per lambda, in lambda order, independent of thread count."""
    if not config.lambdas:
        return []
    g = config.forcing()
    workers = resolve_threads(threads)
    if workers == 1:
        return [_row(config, g, lam) for lam in config.lambdas]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda lam: _row(config, g, lam), config.lambdas))


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def sweep_report(config: SweepConfig, rows: Sequence[SweepRow]) -> dict:
    return {"config": config.to_dict(), "rows": [r.to_dict() for r in rows]}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


# --- Bullett's piecewise-linear family ---------------------------------------------------


def bullett_expectation(lam: float) -> str:
    if abs(lam - BULLETT_RIC) < 1e-12:
        return "ric"
    if any(lo < lam < hi for lo, hi in BULLETT_NO_RIC):
        return "no_ric"
    return "unknown"


@dataclass(frozen=True)
class BullettRow:
    lam: float
    tier: str
    expected: str
    matches: bool | None
    rho_max_hat: float
    rho_min_hat: float
    max_excursion: float
    unit_orbits: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["unit_orbits"] = [o.to_dict() for o in self.unit_orbits]
        return d


def bullett_check(lam_list: Sequence[float], n: int = 100_000, grid_spec: GridSpec | None = None,
                  q_max: int = 3) -> list[BullettRow]:
    """Evidence tiers for the sawtooth family against the known windows.

    Mismatches are reported in ``matches``, never raised.  Where
    lambda >= 4 the explicit (p, q) = (1, 1) orbits are listed.
    """
    grid_spec = grid_spec or GridSpec()
    for lam in lam_list:
        if not 0 < lam <= 8:
            raise ValueError("lambda values must lie in (0, 8]")
    g = CircleFunction.sawtooth()
    lstar = lambda_star(g)
    rows = []
    for lam in lam_list:
        m = MapInstance.standard(lam, g)
        ev = no_ric_evidence(m, SearchBudget(n, grid_spec, q_max))
        exp = bullett_expectation(lam)
        match = None if exp == "unknown" else (ev.no_ric if exp == "no_ric" else ev.tier == "c")
        unit = ()
        if lam >= lstar:
            unit = tuple(find_vertical_periodic(m, 1, 1, seeds=integer_step_seeds(m)))
        rows.append(BullettRow(lam, ev.tier, exp, match, ev.rho_max_hat, ev.rho_min_hat, ev.max_excursion, unit))
    return rows


# --- non-monotonicity for the truncated series -------------------------------------------


@dataclass(frozen=True)
class NonmonotonicityReport:
    N: int
    n: int
    grid: GridSpec
    rho_low: float  # at lambda = 0.95
    rho_high: float  # at lambda = 4/3
    resolution: float
    margin: float
    demonstrated: bool
    witness_low: dict
    witness_high: dict
    excursion_low: float
    excursion_high: float
    control: dict | None = None

    def to_dict(self) -> dict:
        return {
            "N": self.N, "n": self.n,
            "grid": {"nx": self.grid.nx, "ny": self.grid.ny, "y_range": list(self.grid.y_range)},
            "lambda_low": 0.95, "lambda_high": 4.0 / 3.0,
            "rho_low": self.rho_low, "rho_high": self.rho_high,
            "gap": self.rho_low - self.rho_high,
            "resolution": self.resolution, "margin": self.margin,
            "demonstrated": self.demonstrated,
            "witness_low": self.witness_low, "witness_high": self.witness_high,
            "excursion_low": self.excursion_low, "excursion_high": self.excursion_high,
            "control": self.control,
        }


def nonmonotonicity_check(N: int = DEFAULT_N, n: int = 100_000, grid_spec: GridSpec | None = None,
                          control: bool = False, raise_inconclusive: bool = True) -> NonmonotonicityReport:
    """Compare the max rotation estimate of the g*_N family at 0.95 and at 4/3.

    Raises InconclusiveAtThisResolution (carrying the report) unless
    rho(0.95) exceeds rho(4/3) by more than the margin, where 10/n is
    treated as the estimator's zero.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    grid_spec = grid_spec or GridSpec(128, 128)
    g = g_star(N)
    lo = rho_interval_estimate(MapInstance.standard(0.95, g), grid_spec, n)
    hi = rho_interval_estimate(MapInstance.standard(4.0 / 3.0, g), grid_spec, n)
    res = 10.0 / n
    margin = max(res, lo.rho_max_hat / 2 - hi.rho_max_hat)
    ctrl = None
    if control:
        c = rho_interval_estimate(MapInstance.standard(0.5, g), grid_spec, n)
        ctrl = {"lambda": 0.5, "rho_max_hat": c.rho_max_hat, "rho_low": lo.rho_max_hat}
    rep = NonmonotonicityReport(
        N, n, grid_spec, lo.rho_max_hat, hi.rho_max_hat, res, margin,
        lo.rho_max_hat > hi.rho_max_hat + margin,
        lo.witness_max.to_dict(), hi.witness_max.to_dict(), lo.max_excursion, hi.max_excursion, ctrl,
    )
    if raise_inconclusive and not rep.demonstrated:
        if lo.rho_max_hat <= res:
            reason = f"no drift found at lambda=0.95: rho={lo.rho_max_hat!r} <= 10/n={res!r}"
        else:
            reason = (f"gap rho(0.95)-rho(4/3)={lo.rho_max_hat - hi.rho_max_hat!r} "
                      f"does not exceed margin {margin!r}")
        raise InconclusiveAtThisResolution(rep, reason)
    return rep


# --- continuity in the forcing ------------------------------------------------------------


@dataclass(frozen=True)
class ContinuityRow:
    N: int
    sup_distance: float
    rho_max_hat: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ContinuityReport:
    lam: float
    n: int
    rows: tuple[ContinuityRow, ...]
    rho_sawtooth: float
    tolerance: float
    within_tolerance: bool | None

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "n": self.n, "rows": [r.to_dict() for r in self.rows],
                "rho_sawtooth": self.rho_sawtooth, "tolerance": self.tolerance,
                "within_tolerance": self.within_tolerance}


def continuity_probe(lam: float, N_list: Sequence[int], n: int = 10_000,
                     grid_spec: GridSpec | None = None) -> ContinuityReport:
    """Max rotation estimate of the g*_N family per N beside the sawtooth value.

    ``within_tolerance`` compares the largest N against the sawtooth at
    5 * 10/n; it is None for a single-element list.
    """
    Ns = [int(N) for N in N_list]
    if Ns != sorted(Ns):
        raise ValueError("N_list must be ascending")
    grid_spec = grid_spec or GridSpec()
    rows = []
    for N in Ns:
        est = rho_interval_estimate(MapInstance.standard(lam, g_star(N)), grid_spec, n)
        rows.append(ContinuityRow(N, truncation_error(N), est.rho_max_hat))
    saw = rho_interval_estimate(MapInstance.standard(lam, CircleFunction.sawtooth()), grid_spec, n).rho_max_hat
    tol = 5 * 10.0 / n
    within = None if len(rows) < 2 else abs(rows[-1].rho_max_hat - saw) <= tol
    return ContinuityReport(lam, n, tuple(rows), saw, tol, within)


# --- scan of the invariant-curve parameter set --------------------------------------------


@dataclass(frozen=True)
class AgScanReport:
    lambdas: tuple[float, ...]
    labels: tuple[str, ...]
    tiers: tuple[str, ...]
    is_prefix: bool
    gaps: tuple[float, ...]
    n: int
    grid: GridSpec

    def to_dict(self) -> dict:
        return {
            "rows": [{"lambda": l, "label": s, "tier": t} for l, s, t in zip(self.lambdas, self.labels, self.tiers)],
            "is_prefix": self.is_prefix, "gaps": list(self.gaps), "n": self.n,
            "grid": {"nx": self.grid.nx, "ny": self.grid.ny, "y_range": list(self.grid.y_range)},
        }


def a_g_scan(g: CircleFunction, lam_max: float, step: float, budget: SearchBudget | None = None,
             extra: Sequence[float] = ()) -> AgScanReport:
    """Label lambda in [0, lam_max] as RIC-consistent (tier c) or no-RIC (tier a/b).

    ``is_prefix`` is True when the RIC-consistent values form an initial
    segment; ``gaps`` lists RIC-consistent values met after a no-RIC one.
    Tier c means no drift was found at this resolution, nothing more.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    budget = budget or SearchBudget()
    lams = sorted(set(lambda_range(0.0, lam_max, step)) | {float(l) for l in extra if 0 <= l <= lam_max})
    labels, tiers = [], []
    for lam in lams:
        ev = no_ric_evidence(MapInstance.standard(lam, g), budget)
        tiers.append(ev.tier)
        labels.append("no-RIC" if ev.no_ric else "RIC-consistent")
    gaps = []
    seen_no = False
    for lam, lab in zip(lams, labels):
        if lab == "no-RIC":
            seen_no = True
        elif seen_no:
            gaps.append(lam)
    return AgScanReport(tuple(lams), tuple(labels), tuple(tiers), not gaps, tuple(gaps), budget.n, budget.grid)
