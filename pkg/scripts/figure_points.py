"""Write plot-ready point sets for the main results into a directory.

    s_density.csv        a, s(a) on a 1025-point grid
    qq_mc_vs_theory.csv  simulated Brownian s-stats against s_quantile
    qq_time.csv          s-stats at t=1 against t=4 (same dt)
    qq_ar1.csv           rho=0.9999 paths of length 500 against 1500
    hist_rho.csv         s-stat histograms for mean-reverting, Brownian and trending AR(1)
    qq_fixture.csv       bundled OHLC fixture, clean and with compressed extremes

    python scripts/figure_points.py OUTDIR [--paths 100000] [--steps 10000]
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from bmrange import empirical
from bmrange.sdensity import s_density, s_quantile
from bmrange.simulation import EnsembleSpec, PathSpec, sample_s_stats

HIST_EDGES = np.linspace(-1.0, 1.0, 41)


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([f"{v:.10g}" for v in row] for row in rows)
    print(f"wrote {path}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--steps", type=int, default=10_000)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    o = args.outdir

    def sample(seed, **path):
        return sample_s_stats(EnsembleSpec(PathSpec(seed=seed, **path), args.paths), args.workers).values

    a = np.linspace(-1.0, 1.0, 1025)
    write(o / "s_density.csv", ["a", "s"], zip(a, s_density(a)))

    bm = sample(1, n_steps=args.steps)
    write(o / "qq_mc_vs_theory.csv", ["reference", "empirical"], empirical.qq_points(bm, s_quantile))

    quarter = max(2, args.steps // 4)
    write(
        o / "qq_time.csv",
        ["t1", "t4"],
        empirical.two_sample_qq(sample(11, n_steps=quarter, t=1.0), sample(12, n_steps=4 * quarter, t=4.0)),
    )

    write(
        o / "qq_ar1.csv",
        ["len500", "len1500"],
        empirical.two_sample_qq(
            sample(21, process="ar1", rho=0.9999, n_steps=500), sample(22, process="ar1", rho=0.9999, n_steps=1500)
        ),
    )

    centres = 0.5 * (HIST_EDGES[1:] + HIST_EDGES[:-1])
    cols = [centres]
    for k, rho in enumerate((0.999, 1.0, 1.001)):
        s = sample(30 + k, process="ar1", rho=rho, n_steps=1500)
        cols.append(np.histogram(s, HIST_EDGES, density=True)[0])
    write(o / "hist_rho.csv", ["s", "rho_0.999", "rho_1", "rho_1.001"], zip(*cols))

    bars = empirical.ingest_ohlc_csv(empirical.fixture_bytes()).bars
    clean = empirical.structural_quality_score(bars).qq_points
    bad = empirical.structural_quality_score(empirical.compress_extremes(bars)).qq_points
    write(o / "qq_fixture.csv", ["reference", "clean", "compressed"], zip(clean[:, 0], clean[:, 1], bad[:, 1]))


if __name__ == "__main__":
    main()
