"""Seeded Monte Carlo paths for Brownian motion and AR(1) series.

Path ``i`` of an ensemble draws its innovations from a Philox4x64 stream keyed
by ``(seed, i)``.  Philox is counter based, so a path's numbers depend on
nothing but its key; ensembles are therefore identical whatever the chunking
or the number of worker threads.  Normals come from the inverse normal CDF
applied to 53-bit midpoint uniforms, which never hit 0 or 1.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtri

from .errors import DegeneratePathError, DomainError

MAX_AR1_STEPS = 100_000
# E[max of continuous BM] - E[max of its sqrt(dt) sampling] ~ BETA * sigma * sqrt(dt)
BETA = 0.5825971579390106

_CHUNK_ELEMENTS = 1 << 21
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class PathSpec:
    """One simulated path.

    ``process`` is ``"wiener"`` (drift ``mu``, volatility ``sigma`` over
    horizon ``t``) or ``"ar1"`` (``W_k = rho W_{k-1} + eps_k`` with unit
    innovations; ``mu``, ``sigma`` and ``t`` are ignored).
    """

    process: str = "wiener"
    mu: float = 0.0
    sigma: float = 1.0
    t: float = 1.0
    rho: float = 1.0
    n_steps: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.process not in ("wiener", "ar1"):
            raise DomainError(f"unknown process {self.process!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise DomainError("n_steps must be an integer >= 2")
        if not 0 <= self.seed <= _U64 or int(self.seed) != self.seed:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.process == "wiener":
            if not (math.isfinite(self.mu) and math.isfinite(self.t) and math.isfinite(self.sigma)):
                raise DomainError("wiener parameters must be finite")
            if self.sigma <= 0 or self.t <= 0:
                raise DomainError("sigma and t must be positive")
        else:
            if not math.isfinite(self.rho):
                raise DomainError("rho must be finite")
            if self.n_steps > MAX_AR1_STEPS:
                raise DomainError(f"ar1 paths are capped at {MAX_AR1_STEPS} steps")

    @property
    def dt(self) -> float:
        return self.t / self.n_steps


@dataclass(frozen=True)
class PathSummary:
    terminal: float
    maximum: float
    minimum: float

    @property
    def range(self) -> float:
        return self.maximum - self.minimum


@dataclass(frozen=True)
class EnsembleSpec:
    path: PathSpec
    n_paths: int = 100_000

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise DomainError("n_paths must be a positive integer")


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Per-path summaries of an ensemble, in path-index order."""

    spec: EnsembleSpec
    terminal: np.ndarray
    maximum: np.ndarray
    minimum: np.ndarray

    @property
    def range(self) -> np.ndarray:
        return self.maximum - self.minimum

    def summary(self, i: int) -> PathSummary:
        return PathSummary(float(self.terminal[i]), float(self.maximum[i]), float(self.minimum[i]))

    def s_stats(self) -> np.ndarray:
        r = self.range
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(r > 0, self.terminal / np.where(r > 0, r, 1.0), np.nan)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["path_index", "terminal", "maximum", "minimum", "range", "s_stat"])
        s = self.s_stats()
        for i, row in enumerate(zip(self.terminal, self.maximum, self.minimum, self.range, s)):
            w.writerow([i] + [f"{v:.17g}" if np.isfinite(v) else "" for v in row])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class SStatSample:
    values: np.ndarray
    degenerate: int = 0
    spec: EnsembleSpec | None = field(default=None, repr=False)


def standard_normals(seed: int, index: int, n: int) -> np.ndarray:
    """``n`` standard normals from the substream of path ``index``."""
    raw = np.random.Philox(key=[seed & _U64, index & _U64]).random_raw(n)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def _simulate_rows(spec: PathSpec, first: int, count: int):
    z = np.empty((count, spec.n_steps))
    for k in range(count):
        z[k] = standard_normals(spec.seed, first + k, spec.n_steps)
    if spec.process == "wiener":
        z *= spec.sigma * math.sqrt(spec.dt)
        z += spec.mu * spec.dt
        w = np.cumsum(z, axis=1, out=z)
    else:
        w = lfilter([1.0], [1.0, -spec.rho], z, axis=1)
        if not np.all(np.isfinite(w)):
            raise DomainError(f"ar1 path with rho={spec.rho} overflowed over {spec.n_steps} steps")
    # the starting point 0 belongs to the path
    return (
        w[:, -1].copy(),
        np.maximum(w.max(axis=1), 0.0),
        np.minimum(w.min(axis=1), 0.0),
    )


def simulate_path(spec: PathSpec, index: int = 0) -> PathSummary:
    t, hi, lo = _simulate_rows(spec, index, 1)
    return PathSummary(float(t[0]), float(hi[0]), float(lo[0]))


def simulate_ensemble(spec: EnsembleSpec, workers: int = 1) -> Ensemble:
    path = spec.path
    rows = max(1, _CHUNK_ELEMENTS // path.n_steps)
    starts = range(0, spec.n_paths, rows)

    def run(start):
        return _simulate_rows(path, start, min(rows, spec.n_paths - start))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    terminal, maximum, minimum = (np.concatenate(col) for col in zip(*parts))
    return Ensemble(spec, terminal, maximum, minimum)


def s_stat(summary: PathSummary) -> float:
    r = summary.range
    if not r > 0:
        raise DegeneratePathError("path has zero range")
    return min(1.0, max(-1.0, summary.terminal / r))


def sample_s_stats(spec: EnsembleSpec, workers: int = 1) -> SStatSample:
    """s-stats of every path; zero-range paths are dropped and counted."""
    ens = simulate_ensemble(spec, workers)
    s = ens.s_stats()
    ok = np.isfinite(s)
    return SStatSample(values=np.clip(s[ok], -1.0, 1.0), degenerate=int((~ok).sum()), spec=spec)


def range_bias(path: PathSpec) -> float:
    """First-order shortfall of the sampled range: ``2 * BETA * sigma * sqrt(dt)``."""
    if path.process != "wiener":
        raise DomainError("range bias is defined for wiener paths only")
    return 2.0 * BETA * path.sigma * math.sqrt(path.dt)


@dataclass(frozen=True, eq=False)
class JointHistogram:
    r_edges: np.ndarray
    x_edges: np.ndarray
    counts: np.ndarray
    outside: int
    n_paths: int

    @property
    def mass(self) -> np.ndarray:
        return self.counts / self.n_paths

    @property
    def outside_mass(self) -> float:
        return self.outside / self.n_paths


def mc_joint_histogram(
    spec: EnsembleSpec,
    r_bins: int,
    x_bins: int,
    r_hi: float | None = None,
    x_hi: float | None = None,
    workers: int = 1,
) -> JointHistogram:
    """Histogram of (range, terminal) over ``[0, r_hi] x [-x_hi, x_hi]``."""
    path = spec.path
    if path.process != "wiener":
        raise DomainError("joint histogram is defined for wiener paths")
    if r_bins < 1 or x_bins < 1:
        raise DomainError("bin counts must be positive")
    scale = path.sigma * math.sqrt(path.t)
    r_hi = 4.0 * scale if r_hi is None else r_hi
    x_hi = r_hi if x_hi is None else x_hi
    ens = simulate_ensemble(spec, workers)
    r_edges = np.linspace(0.0, r_hi, r_bins + 1)
    x_edges = np.linspace(-x_hi, x_hi, x_bins + 1)
    counts, _, _ = np.histogram2d(ens.range, ens.terminal, bins=[r_edges, x_edges])
    counts = counts.astype(np.int64)
    return JointHistogram(r_edges, x_edges, counts, spec.n_paths - int(counts.sum()), spec.n_paths)
