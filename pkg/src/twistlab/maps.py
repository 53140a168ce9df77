"""Forcing functions and the standard / translated twist-map families.

The families act on the plane (lift), the cylinder ``S^1 x R`` and the torus:

    standard:    y' = y + lam * g(x),   x' = x + y'
    translated:  y' = y + g(x) + lam,   x' = x + y'

Both are written internally as ``y' = y + a*g(x) + b`` so a single compiled
kernel drives every orbit computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Sequence

import numpy as np

from . import _kernels as K

Kind = Literal["standard", "translated"]
Form = Literal["lift", "cylinder", "torus"]

SEAM_SNAP = K.SEAM_SNAP


class TwistError(Exception):
    """Base class for errors raised by this package."""


class NonDifferentiablePoint(TwistError):
    pass


class PlanePoint(NamedTuple):
    x: float
    y: float


class CylinderPoint(NamedTuple):
    x: float
    y: float


class TorusPoint(NamedTuple):
    x: float
    y: float


def mod1(x):
    """``x - floor(x)`` with values within 1e-15 below 1 snapped to 0."""
    r = np.asarray(x, dtype=float) - np.floor(x)
    r = np.where(r >= 1.0 - SEAM_SNAP, 0.0, r)
    return float(r) if np.ndim(r) == 0 else r


def to_cylinder(x: float, y: float) -> CylinderPoint:
    return CylinderPoint(mod1(x), float(y))


def to_torus(x: float, y: float) -> TorusPoint:
    return TorusPoint(mod1(x), mod1(y))


_ARGMAX_SCAN = 2**14


@dataclass(frozen=True, eq=False)
class CircleFunction:
    """Zero-mean period-1 forcing ``g``.

    Build with :meth:`sawtooth`, :meth:`single_cosine` or
    :meth:`cosine_series`; ``coeffs[k]`` is the coefficient of
    ``cos(2*pi*(k+1)*x)``.
    """

    variant: Literal["cosine_series", "sawtooth", "single_cosine"]
    coeffs: tuple[float, ...] = ()
    sup_norm: float = field(init=False)
    max_value: float = field(init=False)
    argmax_x: float = field(init=False)
    min_value: float = field(init=False)
    lipschitz_bound: float = field(init=False)

    def __post_init__(self):
        if self.variant == "cosine_series":
            if not self.coeffs:
                raise ValueError("cosine series needs at least one coefficient")
            full = np.asarray(self.coeffs, dtype=float)
            if len(full) > 1 and np.all(full[1::2] == 0.0):
                kind, kc = K.KIND_ODD_SERIES, np.ascontiguousarray(full[0::2])
            else:
                kind, kc = K.KIND_SERIES, full
            lip = float(sum(2 * math.pi * (k + 1) * abs(a) for k, a in enumerate(full)))
        elif self.variant == "sawtooth":
            kind, kc, full, lip = K.KIND_SAWTOOTH, np.zeros(0), np.zeros(0), 1.0
        elif self.variant == "single_cosine":
            kind, kc, full, lip = K.KIND_COS, np.zeros(0), np.zeros(0), 2 * math.pi
        else:
            raise ValueError(f"unknown variant {self.variant!r}")
        object.__setattr__(self, "_kind", kind)
        object.__setattr__(self, "_kc", kc)
        object.__setattr__(self, "_full", full)
        object.__setattr__(self, "lipschitz_bound", lip)

        if self.variant == "sawtooth":
            xmax, gmax, gmin = 0.0, 0.25, -0.25
        elif self.variant == "single_cosine":
            xmax, gmax, gmin = 0.0, 1.0, -1.0
        else:
            xmax, gmax = self._refine_extremum(+1)
            _, gmin = self._refine_extremum(-1)
        object.__setattr__(self, "argmax_x", xmax)
        object.__setattr__(self, "max_value", gmax)
        object.__setattr__(self, "min_value", gmin)
        object.__setattr__(self, "sup_norm", max(abs(gmax), abs(gmin)))

    @classmethod
    def sawtooth(cls) -> CircleFunction:
        return cls("sawtooth")

    @classmethod
    def single_cosine(cls) -> CircleFunction:
        return cls("single_cosine")

    @classmethod
    def cosine_series(cls, coeffs: Sequence[float]) -> CircleFunction:
        return cls("cosine_series", tuple(float(a) for a in coeffs))

    @property
    def kernel_args(self) -> tuple[int, np.ndarray]:
        return self._kind, self._kc

    def __call__(self, x):
        if np.ndim(x) == 0:
            return K.g_eval(self._kind, self._kc, float(x))
        xs = np.asarray(x, dtype=float)
        return K.g_eval_array(self._kind, self._kc, xs.ravel()).reshape(xs.shape)

    def derivative(self, x: float) -> float:
        u = mod1(x)
        if self.variant == "sawtooth" and (u == 0.0 or u == 0.5):
            raise NonDifferentiablePoint(f"sawtooth has a kink at x={u}")
        return K.dg_eval(self._kind, self._full, float(u))

    def secant_derivative(self, x: float) -> float:
        """Derivative, with the two-sided secant over 1e-7 at sawtooth kinks."""
        return K.dg_eval(self._kind, self._full, float(mod1(x)))

    def _refine_extremum(self, sign: int) -> tuple[float, float]:
        xs = np.arange(_ARGMAX_SCAN) / _ARGMAX_SCAN
        vals = sign * self(xs)
        i = int(np.argmax(vals))
        h = 1.0 / _ARGMAX_SCAN
        lo, hi = xs[i] - h, xs[i] + h
        d = lambda t: sign * K.dg_eval(self._kind, self._full, float(mod1(t)))
        if d(lo) > 0 > d(hi):
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if d(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            xb = mod1(0.5 * (lo + hi))
        else:
            xb = float(xs[i])
        # keep the grid value if refinement did not improve it
        if sign * self(xb) < vals[i]:
            xb = float(xs[i])
        return xb, float(self(xb))

    def describe(self) -> dict:
        out = {"variant": self.variant}
        if self.variant == "cosine_series":
            out["coeffs"] = list(self.coeffs)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, CircleFunction)
            and self.variant == other.variant
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.variant, self.coeffs))


class Trajectory(NamedTuple):
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class MapInstance:
    """A member of the standard or translated family for a given forcing."""

    kind: Kind
    lam: float
    g: CircleFunction

    def __post_init__(self):
        if self.kind not in ("standard", "translated"):
            raise ValueError(f"unknown family {self.kind!r}")
        object.__setattr__(self, "lam", float(self.lam))

    @classmethod
    def standard(cls, lam: float, g: CircleFunction) -> MapInstance:
        return cls("standard", lam, g)

    @classmethod
    def translated(cls, lam: float, g: CircleFunction) -> MapInstance:
        return cls("translated", lam, g)

    @property
    def ab(self) -> tuple[float, float]:
        """(a, b) in ``y' = y + a*g(x) + b``."""
        return (self.lam, 0.0) if self.kind == "standard" else (1.0, self.lam)

    @property
    def max_step(self) -> float:
        """Bound on |y' - y| over one step."""
        a, b = self.ab
        return abs(a) * self.g.sup_norm + abs(b)

    def _kargs(self):
        a, b = self.ab
        kind, kc = self.g.kernel_args
        return a, b, kind, kc

    def dy(self, x):
        a, b = self.ab
        return a * self.g(x) + b

    def apply_lift(self, x, y) -> PlanePoint:
        yp = y + self.dy(x)
        return PlanePoint(x + yp, yp)

    def apply_cylinder(self, x, y) -> CylinderPoint:
        yp = y + self.dy(x)
        return CylinderPoint(mod1(x + yp), yp)

    def apply_torus(self, x, y) -> TorusPoint:
        yp = y + self.dy(x)
        return TorusPoint(mod1(x + yp), mod1(yp))

    def inverse_lift(self, xp, yp) -> PlanePoint:
        x = xp - yp
        return PlanePoint(x, yp - self.dy(x))

    def jacobian(self, x: float, y: float = 0.0) -> np.ndarray:
        """Matrix of partials, rows (x', y'), columns (x, y)."""
        a, _ = self.ab
        d = a * self.g.derivative(x)
        return np.array([[1.0 + d, 1.0], [d, 1.0]])

    def flux(self, nodes: int = 2**12) -> float:
        """Mean y-displacement of a horizontal circle (trapezoid rule)."""
        xs = np.arange(nodes) / nodes
        return float(np.mean(self.dy(xs)))

    def iterate(self, x: float, y: float, n: int, form: Form = "lift") -> Trajectory:
        """Orbit of length n+1 including the initial point.

        The lift x-coordinate grows without bound on escaping orbits and
        loses absolute precision; use the cylinder form for long runs.
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        a, b, kind, kc = self._kargs()
        if form == "lift":
            xs, ys = K.lift_trajectory(float(x), float(y), n, a, b, kind, kc)
        elif form in ("cylinder", "torus"):
            xs, ys = K.cylinder_trajectory(float(x), float(y), n, a, b, kind, kc, form == "torus")
        else:
            raise ValueError(f"unknown form {form!r}")
        return Trajectory(xs, ys)

    def lift_q(self, x, y, q: int):
        """q-fold plane lift on arrays (no compensation; q is small)."""
        a, b, kind, kc = self._kargs()
        xs = np.ascontiguousarray(np.asarray(x, dtype=float).ravel())
        ys = np.ascontiguousarray(np.broadcast_to(np.asarray(y, dtype=float), np.shape(x)).ravel())
        ox, oy = K.lift_q_array(xs, ys, q, a, b, kind, kc)
        shape = np.shape(x)
        return ox.reshape(shape), oy.reshape(shape)

    def lift_q_jacobian(self, x: float, y: float, q: int):
        """(X_q, Y_q, J) with J the Jacobian of the q-fold lift (secant at kinks)."""
        a, b, kind, kc = self._kargs()
        X, Y, j00, j01, j10, j11 = K.lift_q_jac(float(x), float(y), q, a, b, kind, kc, self.g._full)
        return X, Y, np.array([[j00, j01], [j10, j11]])

    def describe(self) -> dict:
        return {"family": self.kind, "lambda": self.lam, "g": self.g.describe()}
