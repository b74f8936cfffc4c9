"""Density, CDF and quantiles of the range-scaled terminal value.

For standard Brownian motion on ``[0, T]`` the statistic ``a = W_T / (max - min)``
lives in ``[-1, 1]`` and its law does not depend on ``T``.  Two algebraically
equivalent truncated series are provided: the two-sided sum over
``n in [-N, N] \\ {0}`` and the one-sided sum obtained by folding negative
indices onto positive ones.  The one-sided form is the reference evaluator.
"""

from __future__ import annotations

import csv
import functools
import io
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import ConvergenceError, DomainError

DEFAULT_N_MAX = 100
DEFAULT_RESOLUTION = 4096


def _abs_a(a):
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)) or np.any(np.abs(a) > 1.0):
        raise DomainError("scaled value a must lie in [-1, 1]")
    return np.abs(a)


def _check_n(n_max):
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be a positive integer, got {n_max}")
    return int(n_max)


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def _one_sided_terms(u, n):
    """Folded term for index ``n >= 1`` at ``u = |a|``; broadcasts."""
    q = 4 * n * n - u * u
    t = 16 * (1 - u) * n**3 * (4 * n * n + 3 * u * u) / q**3 - (8 * n**3 * (1 - u) + 2 * n * u * u) / q**2
    m = np.where(n >= 2, n, 0.0)
    t = t - m * (8 * (m * m - 1) * (1 - u) - 2 * u * u) / (4 * m * m - (u - 2) ** 2) ** 2
    return t


def s_density_one_sided(a, n_max: int = DEFAULT_N_MAX, extrapolate: bool = False):
    """s(a) from the one-sided series truncated at ``n_max``.

    With ``extrapolate=True`` the O(1/N^2) truncation error is removed by a
    Richardson step on the partial sums at ``N`` and ``N/2``.
    """
    u = _abs_a(a)
    n_max = _check_n(n_max)
    shape = u.shape
    u = u.ravel()
    total = np.full(u.shape, 0.0)
    half = None
    for start in range(1, n_max + 1, 256):
        n = np.arange(start, min(start + 256, n_max + 1), dtype=float)[:, None]
        terms = _one_sided_terms(u[None, :], n)
        if extrapolate and half is None and n_max // 2 <= n[-1, 0]:
            k = n_max // 2 - start + 1
            half = total + terms[:k].sum(axis=0) + 2.0 / (4.0 - u) ** 2
        total += terms.sum(axis=0)
    total += 2.0 / (4.0 - u) ** 2
    if extrapolate:
        if n_max < 2:
            raise DomainError("extrapolation needs n_max >= 2")
        total = total + (total - half) / 3.0
    return _scalar(total.reshape(shape))


def s_density_two_sided(a, n_max: int = DEFAULT_N_MAX):
    """s(a) from the two-sided Heaviside series over ``0 < |n| <= n_max``."""
    u = _abs_a(a)
    n_max = _check_n(n_max)
    shape = u.shape
    u = u.ravel()[None, :]
    n = np.concatenate([np.arange(-n_max, 0), np.arange(1, n_max + 1)]).astype(float)[:, None]
    sign = np.where(n > 0, 1.0, -1.0)  # 2H(n) - 1; 2H(-n) - 1 is its negative
    first = 4 * n * n * (1 - u) / (-sign * u + 2 * np.abs(n)) ** 3
    # the n = -1 reflected terms carry the factor n + 1 = 0 and are 0/0 at a = 0
    live = n != -1
    nn = np.where(live, n, 1.0)
    second = np.where(live, sign * nn * (nn + 1) / (-u + 2 * nn + 2) ** 2, 0.0)
    third = sign * n * (n + 1) / (u + 2 * n) ** 2
    return _scalar((first + second - third).sum(axis=0).reshape(shape))


s_density = s_density_one_sided


@dataclass(frozen=True)
class ConvergenceReport:
    a: float
    n_max: int
    partial_sum: float
    dominating_sum: float
    last_term: float
    bounded: bool


def convergence_bound_check(a: float, n_max: int = DEFAULT_N_MAX, slack: float = 1e-9) -> ConvergenceReport:
    """Compare the partial sums of s(a) with the dominating convergent series.

    Raises :class:`ConvergenceError` if some partial sum exceeds the
    dominating partial sum by more than ``slack``.
    """
    u = float(_abs_a(a))
    n_max = _check_n(n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    terms = _one_sided_terms(u, n)
    partial = np.cumsum(terms) + 2.0 / (4.0 - u) ** 2
    m = n[1:]
    dom_terms = (80 * m**3 * (1 - u) * u * u - 2 * m * u * u + 2 * u * u) / (4 * m * m * (4 * m * m - u * u) ** 2)
    dominating = np.concatenate([[0.0], np.cumsum(dom_terms)]) + 2.0 / (4.0 - u) ** 2 + 1.0
    bounded = bool(np.all(partial <= dominating + slack))
    report = ConvergenceReport(
        a=float(a),
        n_max=n_max,
        partial_sum=float(partial[-1]),
        dominating_sum=float(dominating[-1]),
        last_term=float(abs(terms[-1])),
        bounded=bounded,
    )
    if not bounded:
        raise ConvergenceError(f"partial sums of s({a}) exceed the dominating series")
    return report


@dataclass(frozen=True, eq=False)
class SDensityTable:
    """s(a) and its CDF tabulated on a uniform grid over [-1, 1].

    ``resolution`` is the number of grid intervals (even; the grid contains
    ``a = 0`` so the kink there falls on a node).
    """

    grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    resolution: int
    n_max: int

    @classmethod
    def build(cls, resolution: int = DEFAULT_RESOLUTION, n_max: int = DEFAULT_N_MAX) -> "SDensityTable":
        if resolution < 2 or resolution % 4:
            raise DomainError("resolution must be a positive multiple of 4")
        grid = np.linspace(-1.0, 1.0, resolution + 1)
        grid[resolution // 2] = 0.0
        dens = s_density_one_sided(grid, n_max)
        # Simpson on each half separately; s has a kink at 0
        mid = resolution // 2
        right = cumulative_simpson(dens[mid:], x=grid[mid:], initial=0.0)
        left = cumulative_simpson(dens[mid::-1], x=-grid[mid::-1], initial=0.0)
        cdf = np.concatenate([left[-1] - left[:0:-1], left[-1] + right])
        cdf /= cdf[-1]
        cdf = np.maximum.accumulate(np.clip(cdf, 0.0, 1.0))
        for arr in (grid, dens, cdf):
            arr.flags.writeable = False
        return cls(grid=grid, density=dens, cdf=cdf, resolution=resolution, n_max=n_max)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "s", "cdf"])
        for row in zip(self.grid, self.density, self.cdf):
            w.writerow([f"{v:.17g}" for v in row])
        return buf.getvalue()


@functools.lru_cache(maxsize=8)
def default_table(resolution: int = DEFAULT_RESOLUTION, n_max: int = DEFAULT_N_MAX) -> SDensityTable:
    return SDensityTable.build(resolution, n_max)


def s_cdf(a, table: SDensityTable | None = None):
    """P(W_T / range < a): tabulated CDF plus Simpson on the partial cell."""
    table = table or default_table()
    if table.resolution < 2048:
        raise DomainError("CDF queries need a table with resolution >= 2048")
    a_arr = np.asarray(a, dtype=float)
    _abs_a(a_arr)
    shape = a_arr.shape
    a_arr = a_arr.ravel()
    step = 2.0 / table.resolution
    i = np.clip(np.floor((a_arr + 1.0) / step).astype(int), 0, table.resolution - 1)
    left = table.grid[i]
    d = a_arr - left
    mid = s_density_one_sided(np.clip(left + 0.5 * d, -1, 1), table.n_max)
    end = s_density_one_sided(a_arr, table.n_max)
    partial = d / 6.0 * (table.density[i] + 4.0 * mid + end)
    out = np.clip(table.cdf[i] + partial, 0.0, 1.0)
    out[a_arr >= 1.0] = 1.0
    out[a_arr <= -1.0] = 0.0
    return _scalar(out.reshape(shape))


def s_quantile(p, table: SDensityTable | None = None, tol: float = 1e-8):
    """Inverse of :func:`s_cdf` by bisection inside the bracketing table cell."""
    table = table or default_table()
    p_arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p_arr)) or np.any((p_arr < 0) | (p_arr > 1)):
        raise DomainError("probability level must lie in [0, 1]")
    shape = p_arr.shape
    p_arr = p_arr.ravel()
    j = np.clip(np.searchsorted(table.cdf, p_arr, side="left"), 1, table.resolution)
    lo = table.grid[j - 1].copy()
    hi = table.grid[j].copy()
    while np.any(hi - lo > tol):
        mid = 0.5 * (lo + hi)
        below = s_cdf(mid, table) < p_arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out[p_arr <= 0.0] = -1.0
    out[p_arr >= 1.0] = 1.0
    return _scalar(out.reshape(shape))
