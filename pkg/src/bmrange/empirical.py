"""OHLC ingestion, empirical s-stats and goodness-of-fit against s(a).

A bar's s-stat is ``(ln close - ln open) / (ln high - ln low)``.  If highs and
lows are estimated rather than traded, the denominator shrinks and the
sample piles up towards +-1; a KS test against the theoretical CDF picks
that up.
"""

from __future__ import annotations

import csv
import importlib.resources
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DegeneratePathError, DomainError, FormatError, InsufficientSampleError
from .sdensity import SDensityTable, default_table, s_cdf, s_quantile
from .simulation import EnsembleSpec, PathSpec, simulate_ensemble

HEADER = ("timestamp", "open", "high", "low", "close")
REASONS = ("NEGATIVE_PRICE", "HIGH_BELOW_BODY", "LOW_ABOVE_BODY", "ZERO_RANGE", "PARSE_ERROR")
MIN_SAMPLE = 8
ASYMPTOTIC_MIN_N = 35
QQ_LEVELS = 99
QUANTILE_CONVENTION = "type7-linear"

_NOTE = (
    "Estimated highs/lows shrink the range, pushing bar s-stats towards +-1: "
    "QQ points above the diagonal in the upper tail and below it in the lower tail."
)


@dataclass(frozen=True)
class OhlcBar:
    timestamp: datetime
    open: float
    high: float
    low: float
    close: float

    def __post_init__(self):
        reason = bar_violation(self.open, self.high, self.low, self.close, allow_zero_range=True)
        if reason is not None:
            raise DomainError(f"invalid bar at {self.timestamp.isoformat()}: {reason}")


def bar_violation(o: float, h: float, l: float, c: float, allow_zero_range: bool = False) -> str | None:
    """Reason code for the first invariant the prices break, else ``None``."""
    if not all(math.isfinite(v) for v in (o, h, l, c)):
        return "PARSE_ERROR"
    if min(o, h, l, c) <= 0:
        return "NEGATIVE_PRICE"
    if h < max(o, c):
        return "HIGH_BELOW_BODY"
    if l > min(o, c):
        return "LOW_ABOVE_BODY"
    if h == l and not allow_zero_range:
        return "ZERO_RANGE"
    return None


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


@dataclass(frozen=True)
class RowDiagnostic:
    line: int
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class IngestResult:
    bars: list
    diagnostics: list

    @property
    def reason_counts(self) -> dict:
        counts = Counter(d.reason for d in self.diagnostics)
        return {r: counts[r] for r in REASONS if counts[r]}


def ingest_ohlc_csv(stream) -> IngestResult:
    """Read ``timestamp,open,high,low,close`` rows; bad rows are rejected, not fatal.

    ``stream`` may be bytes, a binary file or a text file.
    """
    if isinstance(stream, (bytes, bytearray)):
        text = io.StringIO(bytes(stream).decode("utf-8"))
    elif isinstance(stream, io.TextIOBase):
        text = stream
    else:
        text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
    reader = csv.reader(text)
    header = next(reader, None)
    if header is None or tuple(h.strip().lower() for h in header) != HEADER:
        raise FormatError(f"expected header {','.join(HEADER)}, got {header!r}")
    bars, diags = [], []
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(HEADER):
            diags.append(RowDiagnostic(line, "PARSE_ERROR", f"{len(row)} fields"))
            continue
        try:
            ts = parse_timestamp(row[0])
            o, h, l, c = (float(v) for v in row[1:])
        except ValueError as exc:
            diags.append(RowDiagnostic(line, "PARSE_ERROR", str(exc)))
            continue
        reason = bar_violation(o, h, l, c)
        if reason is not None:
            diags.append(RowDiagnostic(line, reason))
            continue
        bars.append(OhlcBar(ts, o, h, l, c))
    return IngestResult(bars, diags)


def bars_to_csv(bars: Iterable[OhlcBar]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for b in bars:
        ts = b.timestamp.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        w.writerow([ts] + [f"{v:.17g}" for v in (b.open, b.high, b.low, b.close)])
    return buf.getvalue()


def bar_s_stat(bar: OhlcBar) -> float:
    """Log close-open move over log high-low range, in [-1, 1]."""
    denom = math.log(bar.high) - math.log(bar.low)
    if not denom > 0:
        raise DegeneratePathError("bar has zero range")
    s = (math.log(bar.close) - math.log(bar.open)) / denom
    return min(1.0, max(-1.0, s))


def kolmogorov_sf(lam: float, tol: float = 1e-12) -> float:
    """P(K > lam) for the limiting Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        # the alternating series is ill-conditioned here; use the dual theta series
        c = math.sqrt(2.0 * math.pi) / lam
        total, k = 0.0, 1
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * lam * lam))
            total += term
            if term < tol:
                break
            k += 1
        return min(1.0, max(0.0, 1.0 - c * total))
    total, k = 0.0, 1
    while True:
        term = 2.0 * math.exp(-2.0 * k * k * lam * lam)
        total += term if k % 2 else -term
        if term < tol:
            break
        k += 1
    return min(1.0, max(0.0, total))


@dataclass
class SampleReport:
    n: int
    ks_stat: float
    p_value: float
    qq_points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    rejected_bars: int = 0
    rejection_reasons: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": int(self.n),
            "ks_stat": float(self.ks_stat),
            "p_value": float(self.p_value),
            "rejected_bars": {"count": int(self.rejected_bars), "reasons": dict(self.rejection_reasons)},
            "qq_points": [[float(r), float(e)] for r, e in np.asarray(self.qq_points).reshape(-1, 2)],
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def ks_test(sample: Sequence[float], reference_cdf: Callable) -> SampleReport:
    """One-sample Kolmogorov-Smirnov test with the asymptotic p-value."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n < MIN_SAMPLE:
        raise InsufficientSampleError(f"KS test needs at least {MIN_SAMPLE} points, got {n}")
    f = np.asarray(reference_cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = float(max(np.max(np.abs(i / n - f)), np.max(np.abs((i - 1) / n - f))))
    p = kolmogorov_sf(math.sqrt(n) * d)
    meta = {"p_value_method": "asymptotic-kolmogorov"}
    if n < ASYMPTOTIC_MIN_N:
        meta["small_sample"] = True
    return SampleReport(n=n, ks_stat=d, p_value=p, metadata=meta)


def empirical_quantile(sample, p):
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise DomainError("empty sample")
    return np.quantile(x, p, method="linear")


def qq_levels(levels: int) -> np.ndarray:
    if levels < 2:
        raise DomainError("need at least 2 QQ levels")
    return (np.arange(1, levels + 1) - 0.5) / levels


def qq_points(sample, reference_quantile: Callable, levels: int = QQ_LEVELS) -> np.ndarray:
    """``(reference quantile, sample quantile)`` pairs at levels ``(j - 0.5) / levels``."""
    p = qq_levels(levels)
    emp = empirical_quantile(sample, p)
    return np.column_stack([np.asarray(reference_quantile(p), dtype=float), emp])


def two_sample_qq(sample_a, sample_b, levels: int = QQ_LEVELS) -> np.ndarray:
    """QQ pairs of two samples: ``(quantile of a, quantile of b)``."""
    p = qq_levels(levels)
    return np.column_stack([empirical_quantile(sample_a, p), empirical_quantile(sample_b, p)])


def structural_quality_score(
    bars: Sequence[OhlcBar],
    table: SDensityTable | None = None,
    rejected: dict | None = None,
) -> SampleReport:
    """KS test and QQ set of the bars' s-stats against the Brownian s-distribution.

    ``rejected`` carries reason counts from ingestion into the report.
    """
    table = table or default_table()
    reasons = Counter(rejected or {})
    stats = []
    for bar in bars:
        try:
            stats.append(bar_s_stat(bar))
        except DegeneratePathError:
            reasons["ZERO_RANGE"] += 1
    if len(stats) < MIN_SAMPLE:
        raise InsufficientSampleError(f"need at least {MIN_SAMPLE} valid bars, got {len(stats)}")
    report = ks_test(stats, lambda a: s_cdf(a, table))
    report.qq_points = qq_points(stats, lambda p: s_quantile(p, table), QQ_LEVELS)
    report.rejection_reasons = {r: reasons[r] for r in REASONS if reasons[r]}
    report.rejected_bars = sum(report.rejection_reasons.values())
    report.metadata.update(
        {
            "quantile_convention": QUANTILE_CONVENTION,
            "qq_levels": QQ_LEVELS,
            "reference": "brownian-s-density",
            "reference_table_resolution": table.resolution,
            "reference_n_max": table.n_max,
            "note": _NOTE,
        }
    )
    return report


def analyze_ohlc_csv(stream, table: SDensityTable | None = None) -> SampleReport:
    ingest = ingest_ohlc_csv(stream)
    return structural_quality_score(ingest.bars, table, ingest.reason_counts)


def synthetic_bars(
    n_bars: int,
    n_steps: int = 10_000,
    seed: int = 0,
    sigma: float = 0.01,
    start_price: float = 1.1,
    start: datetime = datetime(2000, 1, 3, tzinfo=timezone.utc),
    workers: int = 1,
) -> list:
    """Daily bars whose log prices follow a finely sampled Brownian motion.

    Bar ``i`` is path ``i`` of a seeded ensemble, chained so each bar opens at
    the previous close.
    """
    ens = simulate_ensemble(EnsembleSpec(PathSpec(sigma=sigma, n_steps=n_steps, seed=seed), n_bars), workers)
    bars = []
    level = math.log(start_price)
    for i in range(n_bars):
        o = level
        bars.append(
            OhlcBar(
                start + timedelta(days=i),
                math.exp(o),
                math.exp(o + ens.maximum[i]),
                math.exp(o + ens.minimum[i]),
                math.exp(o + ens.terminal[i]),
            )
        )
        level = o + ens.terminal[i]
    return bars


def compress_extremes(bars: Iterable[OhlcBar], fraction: float = 0.2) -> list:
    """Move each high and low ``fraction`` of the way towards the bar body (in log space)."""
    if not 0 <= fraction < 1:
        raise DomainError("fraction must lie in [0, 1)")
    out = []
    for b in bars:
        top = max(b.open, b.close)
        bot = min(b.open, b.close)
        hi = math.exp(math.log(top) + (1 - fraction) * (math.log(b.high) - math.log(top)))
        lo = math.exp(math.log(bot) - (1 - fraction) * (math.log(bot) - math.log(b.low)))
        out.append(OhlcBar(b.timestamp, b.open, max(hi, top), min(lo, bot), b.close))
    return out


def fixture_bytes() -> bytes:
    """The bundled synthetic OHLC fixture (10^4 Brownian daily bars)."""
    return importlib.resources.files("bmrange").joinpath("data/synthetic_bars.csv").read_bytes()
