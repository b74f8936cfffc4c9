"""Reflection-principle series densities for Brownian extremes.

The building block is the image sum

    psi(h, l, x) = tilt(x) * sum_n [ g(2n(h+l) - x) - g(2n(h+l) + x - 2h) ]

giving ``P(-l <= min W, max W <= h, W_T in dx) / dx`` for a Wiener process
with drift ``mu`` and volatility ``sigma``.  Its mixed derivative in ``h`` and
``l`` is the joint density of (max, -min, terminal); integrating that along
``h + l = r`` gives the joint density of (range, terminal).

Every evaluator broadcasts over numpy arrays of its spatial arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError
from .kernels import UNDERFLOW_SIGMAS, g, g_prime, g_second

# Below this width (in units of sigma*sqrt(T)) the exact densities are smaller
# than exp(-pi^2 / (2 * 0.02^2)) ~ 1e-5000; the image sum only adds roundoff.
NEGLIGIBLE_WIDTH = 0.02

_N_BLOCK = 256


@dataclass(frozen=True)
class ProcessParams:
    """Drift ``mu``, volatility ``sigma`` and horizon ``t`` of a Wiener process."""

    mu: float = 0.0
    sigma: float = 1.0
    t: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not (np.isfinite(self.t) and self.t > 0):
            raise DomainError(f"t must be positive, got {self.t}")

    @classmethod
    def standard(cls, t: float = 1.0) -> "ProcessParams":
        return cls(mu=0.0, sigma=1.0, t=t)

    @property
    def variance(self) -> float:
        return self.sigma**2 * self.t

    def tilt(self, x):
        """Girsanov factor exp(mu x / sigma^2 - mu^2 T / (2 sigma^2))."""
        s2 = self.sigma**2
        return np.exp(self.mu * np.asarray(x, dtype=float) / s2 - self.mu**2 * self.t / (2.0 * s2))


@dataclass(frozen=True)
class SeriesControl:
    """Truncation of the reflection index: ``|n| <= n_max``.

    ``n_max`` is doubled (up to ``n_cap``) while the outermost terms still
    exceed ``tail_tol``.
    """

    n_max: int = 100
    tail_tol: float = 1e-12
    n_cap: int = 2**14

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise DomainError(f"n_max must be a positive integer, got {self.n_max}")
        if not self.tail_tol >= 0:
            raise DomainError(f"tail_tol must be nonnegative, got {self.tail_tol}")
        if self.n_cap < self.n_max:
            raise DomainError("n_cap must be at least n_max")


@dataclass(frozen=True)
class Barriers:
    """Upper barrier ``h``, lower barrier magnitude ``l`` and terminal value ``x``."""

    h: float
    l: float
    x: float

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        l = np.asarray(self.l, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if not (np.all(np.isfinite(h)) and np.all(h > 0)):
            raise DomainError("upper barrier h must be positive")
        if not (np.all(np.isfinite(l)) and np.all(l > 0)):
            raise DomainError("lower barrier magnitude l must be positive")
        if not np.all(np.isfinite(x)):
            raise DomainError("terminal value x must be finite")


def _image_sum(term: Callable, width, scale: float, sc: SeriesControl):
    """Sum ``term(n)`` over ``|n| <= N`` with ``N`` escalated to meet ``tail_tol``.

    ``term`` maps an integer column vector ``n`` (shape ``(k, 1)``) to an array
    of shape ``(k, m)``; ``width`` is the period ``h + l`` (or ``r``) per point.
    """
    width = np.ravel(width)
    total = np.zeros(width.shape, dtype=float)

    def add(ns):
        for start in range(0, len(ns), _N_BLOCK):
            block = ns[start:start + _N_BLOCK, None]
            total[:] += term(block).sum(axis=0)

    n = sc.n_max
    add(np.arange(-n, n + 1))
    while True:
        edge = np.abs(term(np.array([[-n], [n]])))
        # past 2n*width > 40 sigma sqrt(T) + |shift| the kernels are clamped to 0
        tail = edge.max(axis=0)
        live = (tail > sc.tail_tol) & (width >= NEGLIGIBLE_WIDTH * scale)
        if not live.any():
            break
        if 2 * n > sc.n_cap:
            raise ConvergenceError(
                f"image series not below tail_tol={sc.tail_tol} at n={n}; "
                f"smallest width {width[live].min():.3g}"
            )
        add(np.concatenate([np.arange(-2 * n, -n), np.arange(n + 1, 2 * n + 1)]))
        n *= 2
    total[width < NEGLIGIBLE_WIDTH * scale] = 0.0
    return total


def _finish(values, shape):
    out = values.reshape(shape)
    return float(out) if out.ndim == 0 else out


def _barrier_arrays(b: Barriers):
    h, l, x = np.broadcast_arrays(
        np.asarray(b.h, dtype=float), np.asarray(b.l, dtype=float), np.asarray(b.x, dtype=float)
    )
    return h, l, x


def psi_kernel(p: ProcessParams, b: Barriers, sc: SeriesControl | None = None):
    """Density of ``W_T`` at ``x`` on the event that the path stays in ``[-l, h]``."""
    sc = sc or SeriesControl()
    h, l, x = _barrier_arrays(b)
    shape = x.shape
    h, l, x = h.ravel(), l.ravel(), x.ravel()
    v = p.variance
    w = h + l

    def term(n):
        return g(2 * n * w - x, v) - g(2 * n * w + x - 2 * h, v)

    s = _image_sum(term, w, np.sqrt(v), sc)
    inside = (x >= -l) & (x <= h)
    return _finish(np.where(inside, p.tilt(x) * s, 0.0), shape)


def trivariate_density(p: ProcessParams, b: Barriers, sc: SeriesControl | None = None):
    """Joint density of (max, -min, W_T) at ``(h, l, x)``: the mixed h-l derivative of psi."""
    sc = sc or SeriesControl()
    h, l, x = _barrier_arrays(b)
    shape = x.shape
    h, l, x = h.ravel(), l.ravel(), x.ravel()
    v = p.variance
    w = h + l

    def term(n):
        return 4 * n * (n * g_second(2 * n * w - x, v) - (n - 1) * g_second(2 * n * w + x - 2 * h, v))

    s = _image_sum(term, w, np.sqrt(v), sc)
    inside = (x >= -l) & (x <= h)
    return _finish(np.where(inside, p.tilt(x) * s, 0.0), shape)


def trivariate_density_douady_form(p: ProcessParams, b: Barriers, sc: SeriesControl | None = None):
    """Same density as :func:`trivariate_density` with the image index reversed."""
    sc = sc or SeriesControl()
    h, l, x = _barrier_arrays(b)
    shape = x.shape
    h, l, x = h.ravel(), l.ravel(), x.ravel()
    v = p.variance
    w = h + l

    def term(n):
        return 4 * n * (n * g_second(2 * n * w + x, v) - (n + 1) * g_second(2 * n * w - x + 2 * h, v))

    s = _image_sum(term, w, np.sqrt(v), sc)
    inside = (x >= -l) & (x <= h)
    return _finish(np.where(inside, p.tilt(x) * s, 0.0), shape)


def joint_range_terminal_density(p: ProcessParams, r, x, sc: SeriesControl | None = None):
    """Joint density of (range, W_T) at ``(r, x)``.

    Obtained by integrating :func:`trivariate_density` over ``h`` with
    ``l = r - h``; the admissible ``h`` interval has length ``r - |x|``.
    """
    sc = sc or SeriesControl()
    r, x = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(x, dtype=float))
    if not (np.all(np.isfinite(r)) and np.all(r > 0)):
        raise DomainError("range r must be positive")
    if not np.all(np.isfinite(x)):
        raise DomainError("terminal value x must be finite")
    shape = x.shape
    r, x = r.ravel(), x.ravel()
    ax = np.abs(x)
    v = p.variance

    def term(n):
        first = 4 * n * n * g_second(2 * n * r + x, v) * (r - ax)
        second = 2 * n * (n + 1) * (g_prime(2 * n * r + 2 * r - ax, v) - g_prime(2 * n * r + ax, v))
        return first - second

    s = _image_sum(term, r, np.sqrt(v), sc)
    return _finish(np.where(ax <= r, p.tilt(x) * s, 0.0), shape)


def terminal_density(p: ProcessParams, x):
    """Unconstrained N(mu T, sigma^2 T) density of ``W_T``; marginal of the above."""
    return g(np.asarray(x, dtype=float) - p.mu * p.t, p.variance)


__all__ = [
    "ProcessParams",
    "SeriesControl",
    "Barriers",
    "psi_kernel",
    "trivariate_density",
    "trivariate_density_douady_form",
    "joint_range_terminal_density",
    "terminal_density",
    "NEGLIGIBLE_WIDTH",
    "UNDERFLOW_SIGMAS",
]
