"""Section sets K(s, q), their envelopes, triplet signs and vertical periodic orbits.

For a lift T of a twist map, K(s, q) is the set of points whose q-th
iterate has moved exactly s in x.  On each vertical fibre it is the zero
set of ``F(y) = p1(T^q(x, y)) - x - s``; the fibre's lowest and highest
points give ``mu_minus`` / ``mu_plus`` and the heights of their images give
``nu_plus`` / ``nu_minus``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Sequence

import numpy as np

from .maps import CircleFunction, CylinderPoint, MapInstance, TwistError, mod1

ROOT_TOL = 1e-11
NEWTON_TOL = 1e-10
CLASS_MARGIN = 1e-6
SCAN = 2**12
REFINE = 16  # 2**12 * 16 = 2**16 local resolution


class EmptySection(TwistError):
    pass


class AuditViolation(TwistError):
    def __init__(self, lam_before, lam_after, msg):
        super().__init__(msg)
        self.lam_before = lam_before
        self.lam_after = lam_after


@dataclass(frozen=True)
class Triplet:
    s: int
    p: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be >= 1")


@dataclass(frozen=True)
class KSection:
    x: float
    roots: tuple[float, ...]
    residuals: tuple[float, ...]


def section_bracket(m: MapInstance, s: int, q: int) -> tuple[float, float]:
    B = q * m.max_step + 1.0
    return s / q - B, s / q + B


def _sections(m: MapInstance, xs: np.ndarray, s: int, q: int, scan: int = SCAN):
    """Roots of F on every fibre in ``xs``; one array of sorted roots per fibre."""
    lo, hi = section_bracket(m, s, q)
    t = np.linspace(-1.0, 1.0, scan + 1)
    ys = s / q + (hi - lo) / 2 * t
    nx = len(xs)
    X = np.repeat(xs, scan + 1)
    Y = np.tile(ys, nx)
    F = (m.lift_q(X, Y, q)[0] - X - s).reshape(nx, scan + 1)

    fib, li, ri = [], [], []
    exact = []
    for i in range(nx):
        f = F[i]
        z = np.flatnonzero(f == 0.0)
        exact.append(ys[z])
        sc = np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)
        fib.extend([i] * len(sc))
        li.extend(ys[sc])
        ri.extend(ys[sc + 1])
        # suspicious cells: small endpoint values or a local extremum of F
        small = np.minimum(np.abs(f[:-1]), np.abs(f[1:])) < 0.01
        df = np.diff(f)
        ext = np.zeros(scan, dtype=bool)
        turn = df[:-1] * df[1:] < 0
        ext[:-1] |= turn
        ext[1:] |= turn
        sus = np.flatnonzero((small | ext) & ~(np.sign(f[:-1]) * np.sign(f[1:]) < 0) & (f[:-1] != 0) & (f[1:] != 0))
        if len(sus):
            sub = np.linspace(0.0, 1.0, REFINE + 1)
            Ys = (ys[sus][:, None] + (ys[sus + 1] - ys[sus])[:, None] * sub[None, :]).ravel()
            Xs = np.full_like(Ys, xs[i])
            Fs = (m.lift_q(Xs, Ys, q)[0] - Xs - s).reshape(len(sus), REFINE + 1)
            Ysr = Ys.reshape(len(sus), REFINE + 1)
            for r in range(len(sus)):
                fr = Fs[r, 1:-1]
                exact[-1] = np.concatenate([exact[-1], Ysr[r, 1:-1][fr == 0.0]])
                c = np.flatnonzero(np.sign(Fs[r, :-1]) * np.sign(Fs[r, 1:]) < 0)
                fib.extend([i] * len(c))
                li.extend(Ysr[r, c])
                ri.extend(Ysr[r, c + 1])

    fib = np.asarray(fib, dtype=int)
    L = np.asarray(li, dtype=float)
    R = np.asarray(ri, dtype=float)
    roots = _bisect(m, xs[fib], L, R, s, q) if len(fib) else np.zeros(0)
    out = []
    for i in range(nx):
        r = np.concatenate([roots[fib == i], exact[i]])
        r.sort()
        if len(r) > 1:
            keep = np.concatenate([[True], np.diff(r) > 1e-12])
            r = r[keep]
        out.append(r)
    return out


def _bisect(m, X, L, R, s, q, iters: int = 200):
    FL = m.lift_q(X, L, q)[0] - X - s
    for _ in range(iters):
        M = 0.5 * (L + R)
        done = (M == L) | (M == R)
        if done.all():
            break
        FM = m.lift_q(X, M, q)[0] - X - s
        left = np.sign(FM) == np.sign(FL)
        L = np.where(left & ~done, M, L)
        FL = np.where(left & ~done, FM, FL)
        R = np.where(~left & ~done, M, R)
    FR = m.lift_q(X, R, q)[0] - X - s
    return np.where(np.abs(FL) <= np.abs(FR), L, R)


def _residual(m, x, y, s, q):
    return np.abs(m.lift_q(np.full_like(y, x), y, q)[0] - x - s)


def k_section(m: MapInstance, x: float, s: int, q: int, scan: int = SCAN) -> KSection:
    """All heights y on the fibre over x with p1(T^q(x, y)) = x + s."""
    if q < 1:
        raise ValueError("q must be >= 1")
    x = mod1(x)
    roots = _sections(m, np.array([x]), s, q, scan)[0]
    if len(roots) == 0:
        lo, hi = section_bracket(m, s, q)
        raise EmptySection(f"no root of F on fibre x={x} for (s,q)=({s},{q}) in [{lo}, {hi}] with {scan} cells")
    res = _residual(m, x, roots, s, q)
    return KSection(x, tuple(roots.tolist()), tuple(res.tolist()))


@dataclass(frozen=True)
class Envelopes:
    s: int
    q: int
    grid: np.ndarray
    mu_minus: np.ndarray
    mu_plus: np.ndarray
    nu_minus: np.ndarray
    nu_plus: np.ndarray
    image_of_mu_minus: np.ndarray
    image_of_mu_plus: np.ndarray
    n_roots: np.ndarray
    membership_residual: float

    @property
    def image_exchange_residual(self) -> float:
        """max over the grid of |image(mu_-) - nu_+| and |image(mu_+) - nu_-|."""
        return float(max(np.max(np.abs(self.image_of_mu_minus - self.nu_plus)),
                         np.max(np.abs(self.image_of_mu_plus - self.nu_minus))))

    def to_dict(self) -> dict:
        return {
            "s": self.s, "q": self.q,
            "x": self.grid.tolist(),
            "mu_minus": self.mu_minus.tolist(), "mu_plus": self.mu_plus.tolist(),
            "nu_minus": self.nu_minus.tolist(), "nu_plus": self.nu_plus.tolist(),
            "n_roots": self.n_roots.tolist(),
            "image_exchange_residual": self.image_exchange_residual,
            "membership_residual": self.membership_residual,
        }


def envelopes_at(m: MapInstance, xs: Sequence[float], s: int, q: int, scan: int = SCAN) -> Envelopes:
    xs = np.asarray([mod1(x) for x in xs], dtype=float)
    secs = _sections(m, xs, s, q, scan)
    n = len(xs)
    mu_m, mu_p, nu_m, nu_p, im_m, im_p = (np.empty(n) for _ in range(6))
    counts = np.empty(n, dtype=int)
    memb = 0.0
    for i, r in enumerate(secs):
        if len(r) == 0:
            raise EmptySection(f"no root on fibre x={xs[i]} for (s,q)=({s},{q})")
        Xq, Yq = m.lift_q(np.full_like(r, xs[i]), r, q)
        memb = max(memb, float(np.max(np.abs(Xq - xs[i] - s))))
        counts[i] = len(r)
        mu_m[i], mu_p[i] = r[0], r[-1]
        nu_m[i], nu_p[i] = Yq.min(), Yq.max()
        im_m[i], im_p[i] = Yq[0], Yq[-1]
    return Envelopes(s, q, xs, mu_m, mu_p, nu_m, nu_p, im_m, im_p, counts, memb)


def envelopes(m: MapInstance, s: int, q: int, nx: int = 64, scan: int = SCAN) -> Envelopes:
    """Envelopes of K(s, q) and of its q-th image on a uniform grid of nx fibres."""
    if nx < 16:
        raise ValueError("nx must be >= 16")
    if q < 1:
        raise ValueError("q must be >= 1")
    return envelopes_at(m, np.arange(nx) / nx, s, q, scan)


@dataclass(frozen=True)
class TripletClass:
    variant: Literal["Positive", "Negative", "Undetermined"]
    margin: float | None = None
    pos_margin: float = math.nan
    neg_margin: float = math.nan

    def __post_init__(self):
        if self.margin is not None and not self.margin > 0:
            raise ValueError("margins must be strictly positive")

    def to_dict(self) -> dict:
        return {"class": self.variant, "margin": self.margin,
                "pos_margin": self.pos_margin, "neg_margin": self.neg_margin}


def _margins(env: Envelopes, p: int):
    pos = env.nu_minus - env.mu_plus - p
    neg = p - env.nu_plus + env.mu_minus
    return pos, neg


def classify_triplet(
    m: MapInstance,
    t: Triplet,
    nx: int = 64,
    class_margin: float = CLASS_MARGIN,
    refine: int = 33,
) -> TripletClass:
    """Grid-sampled sign of the triplet (s, p, q).

    The minimising fibre of each inequality is re-sampled on ``refine``
    points spanning its two neighbouring cells before a sign is claimed.
    The result is numerical evidence, not a certificate.
    """
    env = envelopes(m, t.s, t.q, nx)
    pos, neg = _margins(env, t.p)
    h = 1.0 / nx
    mins = []
    for arr in (pos, neg):
        i = int(np.argmin(arr))
        best = float(arr[i])
        if best > class_margin and refine:
            local = env.grid[i] + np.linspace(-h, h, refine)
            e2 = envelopes_at(m, local, t.s, t.q)
            p2, n2 = _margins(e2, t.p)
            best = min(best, float((p2 if arr is pos else n2).min()))
        mins.append(best)
    pm, nm = mins
    if pm > class_margin:
        return TripletClass("Positive", pm, pm, nm)
    if nm > class_margin:
        return TripletClass("Negative", nm, pm, nm)
    return TripletClass("Undetermined", None, pm, nm)


@dataclass(frozen=True)
class VerticalOrbit:
    point: CylinderPoint
    p: int
    q: int
    s: int
    residual: float

    def matches(self, t: Triplet) -> bool:
        """Same (p, q) and x-displacement congruent to t.s modulo q (shifts in y by 1 add q to s)."""
        return self.p == t.p and self.q == t.q and (self.s - t.s) % t.q == 0

    def to_dict(self) -> dict:
        return {"x": self.point.x, "y": self.point.y, "p": self.p, "q": self.q,
                "s": self.s, "residual": self.residual}


def _q_residual(m: MapInstance, x: float, y: float, p: int, q: int):
    X, Y, J = m.lift_q_jacobian(x, y, q)
    dx = X - x
    s = math.floor(dx + 0.5)
    return np.array([dx - s, Y - y - p]), int(s), J


def newton_vertical(m: MapInstance, x: float, y: float, p: int, q: int,
                    tol: float = NEWTON_TOL, max_iter: int = 60, max_step: float = 0.5):
    """Newton on T^q(A) - A - (0, p) on the cylinder; returns VerticalOrbit or None."""
    best = None
    stall = 0
    for _ in range(max_iter):
        r, s, J = _q_residual(m, x, y, p, q)
        nr = float(np.hypot(*r))
        if best is None or nr < 0.5 * best[0]:
            stall = 0
        else:
            stall += 1
        if best is None or nr < best[0]:
            best = (nr, x, y)
        if nr < 1e-14 or stall >= 12:
            break
        a00, a01, a10, a11 = J[0, 0] - 1.0, J[0, 1], J[1, 0], J[1, 1] - 1.0
        det = a00 * a11 - a01 * a10
        if det == 0.0 or not math.isfinite(det):
            break
        d = np.array([(-r[0] * a11 + r[1] * a01) / det, (r[0] * a10 - r[1] * a00) / det])
        if not np.all(np.isfinite(d)):
            break
        nd = float(np.hypot(*d))
        if nd > max_step:
            d *= max_step / nd
        x, y = x + d[0], y + d[1]
    if best is None or best[0] >= tol:
        return None
    _, x, y = best
    cx = mod1(x)
    cy = y - math.floor(y + 1e-9)
    cy = 0.0 if abs(cy) < 1e-15 else cy
    r, s, _ = _q_residual(m, cx, cy, p, q)
    res = float(np.hypot(*r))
    if res >= tol:
        return None
    return VerticalOrbit(CylinderPoint(cx, cy), p, q, s, res)


def default_seeds(m: MapInstance, p: int, q: int, nx: int = 32) -> list[tuple[float, float]]:
    """Envelope points of K(s, q) for s = 0..q-1 (one class per y-shift), plus exact integer-step points."""
    from .rotation import integer_step_seeds

    seeds = []
    if q == 1:
        seeds += [tuple(z) for z in integer_step_seeds(m)]
    for s in range(q):
        try:
            env = envelopes(m, s, q, max(nx, 16))
        except EmptySection:
            continue
        for i, x in enumerate(env.grid):
            seeds.append((x, env.mu_minus[i]))
            if env.mu_plus[i] != env.mu_minus[i]:
                seeds.append((x, env.mu_plus[i]))
    return seeds


def find_vertical_periodic(
    m: MapInstance,
    p: int,
    q: int,
    seeds: Iterable[tuple[float, float]] | None = None,
    nx: int = 32,
    tol: float = NEWTON_TOL,
) -> list[VerticalOrbit]:
    """Points A with T^q(A) = A + (0, p) on the cylinder, deduplicated.

    Found points are shifted in y by an integer into [0, 1) (the cylinder
    maps commute with that shift).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if seeds is None:
        seeds = default_seeds(m, p, q, nx)
    found: list[VerticalOrbit] = []
    for sx, sy in seeds:
        orb = newton_vertical(m, float(sx), float(sy), p, q, tol)
        if orb is None:
            continue
        dup = False
        for o in found:
            dx = abs(o.point.x - orb.point.x)
            dx = min(dx, 1 - dx)
            if math.hypot(dx, o.point.y - orb.point.y) <= 1e-6:
                dup = True
                break
        if not dup:
            found.append(orb)
    found.sort(key=lambda o: (o.point.x, o.point.y))
    return found


@dataclass(frozen=True)
class LiftOrder:
    """Generating pair: T(x, y) = (x', y') iff y = m(x, x') and y' = m_prime(x, x')."""

    m: Callable
    m_prime: Callable

    @classmethod
    def of(cls, mi: MapInstance) -> LiftOrder:
        g = mi.g
        if mi.kind == "standard":
            lam = mi.lam
            return cls(lambda x, xp: xp - x - lam * g(x), lambda x, xp: xp - x)
        lam = mi.lam
        return cls(lambda x, xp: xp - x - g(x) - lam, lambda x, xp: xp - x)


def lift_order_compare(m1: MapInstance, m2: MapInstance, n: int = 128, tol: float = 1e-14) -> str:
    """'LE' when T1 <= T2 (m2 <= m1 and m1' <= m2'), 'GE', 'EQ' or 'Incomparable'."""
    if m1.kind != m2.kind:
        raise ValueError("both maps must belong to the same family")
    o1, o2 = LiftOrder.of(m1), LiftOrder.of(m2)
    x = np.arange(n) / n
    off = np.linspace(-2.0, 2.0, n)
    X = np.repeat(x, n)
    XP = X + np.tile(off, n)
    a1, a2 = o1.m(X, XP), o2.m(X, XP)
    b1, b2 = o1.m_prime(X, XP), o2.m_prime(X, XP)
    le = bool(np.all(a2 <= a1 + tol) and np.all(b1 <= b2 + tol))
    ge = bool(np.all(a1 <= a2 + tol) and np.all(b2 <= b1 + tol))
    if le and ge:
        return "EQ"
    if le:
        return "LE"
    if ge:
        return "GE"
    return "Incomparable"


@dataclass(frozen=True)
class AuditReport:
    triplet: Triplet
    lambdas: tuple[float, ...]
    classes: tuple[TripletClass, ...]
    orbit_found: tuple[bool, ...]

    @property
    def pattern(self) -> list[str]:
        return [c.variant for c in self.classes]

    def to_dict(self) -> dict:
        return {
            "triplet": [self.triplet.s, self.triplet.p, self.triplet.q],
            "rows": [{"lambda": l, **c.to_dict(), "orbit_found": o}
                     for l, c, o in zip(self.lambdas, self.classes, self.orbit_found)],
        }


def triplet_order_audit(
    g: CircleFunction,
    lam_list: Sequence[float],
    t: Triplet,
    nx: int = 64,
    family: str = "translated",
) -> AuditReport:
    """Classify t along an ascending parameter list of the translated family.

    The lifts increase with lambda, so a Negative class may not follow a
    Positive one or an Undetermined one backed by an actual (s, p, q) orbit.
    """
    lams = [float(l) for l in lam_list]
    if lams != sorted(lams):
        raise ValueError("lambda list must be ascending")
    if family != "translated":
        raise ValueError("the order audit is defined for the translated family")
    classes, found = [], []
    for lam in lams:
        mi = MapInstance.translated(lam, g)
        c = classify_triplet(mi, t, nx)
        orb = False
        if c.variant == "Undetermined":
            orb = any(o.matches(t) for o in find_vertical_periodic(mi, t.p, t.q, nx=nx // 2))
        classes.append(c)
        found.append(orb)
    blocker = None
    for lam, c, o in zip(lams, classes, found):
        if c.variant == "Negative" and blocker is not None:
            raise AuditViolation(blocker, lam, f"Negative at lambda={lam} after non-negative evidence at lambda={blocker}")
        if c.variant == "Positive" or o:
            if blocker is None:
                blocker = lam
    return AuditReport(t, tuple(lams), tuple(classes), tuple(found))
