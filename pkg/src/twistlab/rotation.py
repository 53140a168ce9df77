"""Finite-time vertical rotation numbers and rotation intervals."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .maps import CylinderPoint, MapInstance, mod1

DEFAULT_Y_ESCAPE = math.inf  # no early exit; see rho_v_estimate


@dataclass(frozen=True)
class GridSpec:
    nx: int = 64
    ny: int = 64
    y_range: tuple[float, float] = (-2.0, 2.0)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid must be nonempty")
        lo, hi = self.y_range
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
            raise ValueError("y_range must be a finite interval")

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Initial conditions in row-major (y row, x column) order."""
        xs = np.arange(self.nx) / self.nx
        ys = np.linspace(self.y_range[0], self.y_range[1], self.ny) if self.ny > 1 else np.array([self.y_range[0]])
        X, Y = np.meshgrid(xs, ys)
        return X.ravel(), Y.ravel()


@dataclass(frozen=True)
class OrbitSummary:
    initial: CylinderPoint
    n: int
    displacement_y: float
    rho_hat: float
    max_y_excursion: float
    escaped: bool = False
    n_requested: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["initial"] = list(self.initial)
        return d


@dataclass(frozen=True)
class RotationIntervalEstimate:
    rho_min_hat: float
    rho_max_hat: float
    witness_min: OrbitSummary
    witness_max: OrbitSummary
    grid_spec: GridSpec
    n: int
    max_excursion: float
    seeds: tuple[CylinderPoint, ...] = ()

    def to_dict(self) -> dict:
        return {
            "rho_min_hat": self.rho_min_hat,
            "rho_max_hat": self.rho_max_hat,
            "witness_min": self.witness_min.to_dict(),
            "witness_max": self.witness_max.to_dict(),
            "grid": {"nx": self.grid_spec.nx, "ny": self.grid_spec.ny, "y_range": list(self.grid_spec.y_range)},
            "n": self.n,
            "max_excursion": self.max_excursion,
            "seeds": [list(s) for s in self.seeds],
        }


def _run(m: MapInstance, x0s, y0s, n, burn_in, y_escape):
    a, b, kind, kc = m._kargs()
    return K.orbit_stats(
        np.ascontiguousarray(x0s, dtype=float),
        np.ascontiguousarray(y0s, dtype=float),
        int(n), a, b, kind, kc, int(burn_in), float(y_escape),
    )


def _summary(x0, y0, n, disp, exc, steps, escaped) -> OrbitSummary:
    steps = int(steps)
    return OrbitSummary(
        initial=CylinderPoint(mod1(float(x0)), float(y0)),
        n=steps,
        displacement_y=float(disp),
        rho_hat=float(disp) / steps,
        max_y_excursion=float(exc),
        escaped=bool(escaped),
        n_requested=int(n),
    )


def rho_v_estimate(
    m: MapInstance,
    Z: tuple[float, float],
    n: int,
    burn_in: int = 0,
    y_escape: float = DEFAULT_Y_ESCAPE,
) -> OrbitSummary:
    """Birkhoff average of the vertical displacement along one cylinder orbit.

    With a finite ``y_escape`` an orbit whose displacement passes it stops
    early and its rate is taken from the partial orbit (``escaped`` is set
    and ``n`` is the steps run).  Partial rates carry O(1/steps) transient
    error, so the default runs every orbit to n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x0, y0 = float(Z[0]), float(Z[1])
    d, e, s, esc = _run(m, [x0], [y0], n, burn_in, y_escape)
    return _summary(x0, y0, n, d[0], e[0], s[0], esc[0])


def integer_step_seeds(m: MapInstance, scan: int = 2**14) -> list[CylinderPoint]:
    """Points whose one-step y increment is an exact nonzero integer.

    Such a point (x, 0) satisfies T(x, 0) = (x, k): a vertical orbit with
    rotation number k.  Roots of ``a*g(x) + b = k`` are bracketed on a scan,
    bisected, then nudged ulp by ulp until the float increment is exactly k,
    so that the computed orbit stays on the periodic orbit indefinitely.
    """
    a, b, kind, kc = m._kargs()
    lo = min(a * m.g.min_value, a * m.g.max_value) + b
    hi = max(a * m.g.min_value, a * m.g.max_value) + b
    ks = [k for k in range(math.ceil(lo - 1e-12), math.floor(hi + 1e-12) + 1) if k != 0]
    if not ks:
        return []
    xs = np.arange(scan + 1) / scan
    vals = a * m.g(xs) + b
    seeds: list[CylinderPoint] = []
    for k in ks:
        f = vals - k
        roots = []
        for i in np.flatnonzero(f == 0.0):
            roots.append(float(xs[i]))
        for i in np.flatnonzero(f[:-1] * f[1:] < 0):
            l, r = float(xs[i]), float(xs[i + 1])
            fl = f[i]
            for _ in range(80):
                mid = 0.5 * (l + r)
                fm = K.step_dy(kind, kc, a, b, mid) - k
                if fm == 0.0:
                    l = r = mid
                    break
                if (fm < 0) == (fl < 0):
                    l, fl = mid, fm
                else:
                    r = mid
                if r - l <= 4e-17:
                    break
            roots.append(0.5 * (l + r))
        for x in roots:
            xp = _polish_integer_step(x, k, a, b, kind, kc)
            if xp is not None:
                seeds.append(CylinderPoint(mod1(xp), 0.0))
    seeds.sort()
    out: list[CylinderPoint] = []
    for s in seeds:
        if not out or abs(s.x - out[-1].x) > 1e-12:
            out.append(s)
    return out


def _polish_integer_step(x, k, a, b, kind, kc, max_ulps: int = 256):
    best, best_err = None, math.inf
    up = down = x
    for _ in range(max_ulps):
        for cand in (up, down):
            dy = K.step_dy(kind, kc, a, b, cand)
            err = abs(dy - k)
            c = mod1(cand)
            if err == 0.0 and mod1(c + mod1(0.0 + dy)) == c:
                return c
            if err < best_err:
                best, best_err = c, err
        up = math.nextafter(up, math.inf)
        down = math.nextafter(down, -math.inf)
    # not exactly representable; the seed still starts on the orbit within rounding
    return best if best_err < 1e-12 else None


def rho_interval_estimate(
    m: MapInstance,
    grid_spec: GridSpec | None = None,
    n: int = 10_000,
    seeds: Iterable[tuple[float, float]] = (),
    burn_in: int = 0,
    y_escape: float = DEFAULT_Y_ESCAPE,
    auto_seed: bool = True,
) -> RotationIntervalEstimate:
    """Min and max of finite-time rotation numbers over a grid of orbits.

    Grid orbits come first in row-major order, then explicit seeds, then the
    integer-step seeds (when ``auto_seed``).  Ties go to the first index.
    """
    grid_spec = grid_spec or GridSpec()
    if n < 1:
        raise ValueError("n must be >= 1")
    gx, gy = grid_spec.points()
    extra = [tuple(map(float, s)) for s in seeds]
    if auto_seed:
        extra += [tuple(s) for s in integer_step_seeds(m)]
    if extra:
        ex = np.array(extra, dtype=float).reshape(-1, 2)
        gx = np.concatenate([gx, ex[:, 0]])
        gy = np.concatenate([gy, ex[:, 1]])
    d, e, s, esc = _run(m, gx, gy, n, burn_in, y_escape)
    rho = d / s
    imax = int(np.argmax(rho))
    imin = int(np.argmin(rho))
    wmax = _summary(gx[imax], gy[imax], n, d[imax], e[imax], s[imax], esc[imax])
    wmin = _summary(gx[imin], gy[imin], n, d[imin], e[imin], s[imin], esc[imin])
    return RotationIntervalEstimate(
        rho_min_hat=wmin.rho_hat,
        rho_max_hat=wmax.rho_hat,
        witness_min=wmin,
        witness_max=wmax,
        grid_spec=grid_spec,
        n=n,
        max_excursion=float(e.max()),
        seeds=tuple(CylinderPoint(float(a), float(b)) for a, b in extra),
    )


@dataclass(frozen=True)
class SearchBudget:
    """Resources for :func:`no_ric_evidence`."""

    n: int = 10_000
    grid: GridSpec = field(default_factory=GridSpec)
    q_max: int = 3
    p_values: tuple[int, ...] = (1,)
    seed_nx: int = 32
    y_escape: float = DEFAULT_Y_ESCAPE


@dataclass(frozen=True)
class Evidence:
    tier: str  # "a" vertical orbit pair, "b" escaping orbits, "c" no evidence
    label: str
    rho_max_hat: float
    rho_min_hat: float
    max_excursion: float
    threshold: float
    orbits_up: tuple = ()
    orbits_down: tuple = ()
    interval: RotationIntervalEstimate | None = None

    @property
    def no_ric(self) -> bool:
        return self.tier in ("a", "b")

    def to_dict(self) -> dict:
        return {
            "tier": self.tier,
            "label": self.label,
            "rho_max_hat": self.rho_max_hat,
            "rho_min_hat": self.rho_min_hat,
            "max_excursion": self.max_excursion,
            "threshold": self.threshold,
            "orbits_up": [o.to_dict() for o in self.orbits_up],
            "orbits_down": [o.to_dict() for o in self.orbits_down],
            "interval": self.interval.to_dict() if self.interval else None,
        }


TIER_LABELS = {"a": "VerticalOrbitPair", "b": "EscapingOrbits", "c": "NoEvidence"}


def no_ric_evidence(m: MapInstance, budget: SearchBudget | None = None) -> Evidence:
    """Strongest available numerical evidence that no rotational invariant curve exists.

    Tier "a" needs certified vertical periodic orbits climbing and falling;
    tier "b" needs grid orbits with rates beyond +-10/n; otherwise "c".
    The grid estimate is always run so every record carries its rates.
    """
    from .lecalvez import find_vertical_periodic

    if m.kind != "standard":
        raise ValueError("no_ric_evidence applies to the standard family")
    budget = budget or SearchBudget()
    est = rho_interval_estimate(m, budget.grid, budget.n, y_escape=budget.y_escape)
    theta = 10.0 / budget.n

    ups, downs = [], []
    for q in range(1, budget.q_max + 1):
        for p in budget.p_values:
            if not ups:
                ups = find_vertical_periodic(m, p, q, nx=budget.seed_nx)
            if not downs:
                downs = find_vertical_periodic(m, -p, q, nx=budget.seed_nx)
        if ups and downs:
            break
    if ups and downs:
        tier = "a"
    elif est.rho_max_hat > theta and est.rho_min_hat < -theta:
        tier = "b"
    else:
        tier = "c"
    return Evidence(
        tier=tier,
        label=TIER_LABELS[tier],
        rho_max_hat=est.rho_max_hat,
        rho_min_hat=est.rho_min_hat,
        max_excursion=est.max_excursion,
        threshold=theta,
        orbits_up=tuple(ups),
        orbits_down=tuple(downs),
        interval=est,
    )
