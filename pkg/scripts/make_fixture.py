"""Regenerate the bundled synthetic OHLC fixture.

Each bar is one Brownian path sampled at 10^4 steps, chained so bars open at
the previous close.  Daily volatility 1%, starting price 1.10.

    python scripts/make_fixture.py [--out src/bmrange/data/synthetic_bars.csv]
"""

import argparse
from pathlib import Path

from bmrange.empirical import bars_to_csv, synthetic_bars

N_BARS = 10_000
N_STEPS = 10_000
SEED = 20240601

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "bmrange" / "data" / "synthetic_bars.csv"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    bars = synthetic_bars(N_BARS, N_STEPS, seed=SEED)
    args.out.write_text(bars_to_csv(bars))
    print(f"wrote {len(bars)} bars to {args.out}")


if __name__ == "__main__":
    main()
