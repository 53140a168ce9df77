"""Cosine coefficients of the sawtooth ``|x - 1/2| - 1/4`` and its truncations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .maps import CircleFunction

DEFAULT_N = 41
ERROR_GRID = 2**14


def sawtooth_coefficient(n: int) -> float:
    """a_n = 2 * int_0^1 (|x - 1/2| - 1/4) cos(2 pi n x) dx = (1 - (-1)^n) / (pi^2 n^2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 0.0 if n % 2 == 0 else 2.0 / (math.pi**2 * n * n)


def _simpson(f, a: float, b: float, panels: int) -> float:
    x = np.linspace(a, b, 2 * panels + 1)
    y = f(x)
    h = (b - a) / (2 * panels)
    return float(h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))


def quadrature_coefficient(n: int, panels: int = 2**12, tol: float = 1e-13, max_panels: int = 2**22) -> float:
    """Composite Simpson on each smooth half [0, 1/2], [1/2, 1], doubled until stable."""
    f = lambda x: 2.0 * (np.abs(x - 0.5) - 0.25) * np.cos(2 * math.pi * n * x)
    est = _simpson(f, 0.0, 0.5, panels) + _simpson(f, 0.5, 1.0, panels)
    while panels < max_panels:
        panels *= 2
        new = _simpson(f, 0.0, 0.5, panels) + _simpson(f, 0.5, 1.0, panels)
        if abs(new - est) < tol:
            return new
        est = new
    return est


def tail_bound(N: int) -> float:
    """sum_{n > N} |a_n|, using sum over odd n of 1/n^2 = pi^2/8."""
    partial = math.fsum(sawtooth_coefficient(n) for n in range(1, N + 1))
    return max(0.25 - partial, 0.0)


@dataclass(frozen=True)
class FourierTruncation:
    N: int
    coeffs: tuple[float, ...]
    sup_error_bound: float

    def to_dict(self) -> dict:
        return {"N": self.N, "coeffs": list(self.coeffs), "sup_error_bound": self.sup_error_bound}


def sawtooth_coeffs(N: int) -> FourierTruncation:
    if N < 1:
        raise ValueError("N must be >= 1")
    coeffs = tuple(sawtooth_coefficient(n) for n in range(1, N + 1))
    return FourierTruncation(N, coeffs, tail_bound(N))


def g_star(N: int = DEFAULT_N) -> CircleFunction:
    """The truncated cosine series standing in for the sawtooth forcing."""
    return CircleFunction.cosine_series(sawtooth_coeffs(N).coeffs)


def truncation_error(N: int, grid: int = ERROR_GRID, return_argmax: bool = False):
    """sup over a uniform grid of |g*_N(x) - (|x - 1/2| - 1/4)|."""
    xs = np.arange(grid) / grid
    err = np.abs(g_star(N)(xs) - CircleFunction.sawtooth()(xs))
    i = int(np.argmax(err))
    if return_argmax:
        return float(err[i]), float(xs[i])
    return float(err[i])
