"""Regenerate the bundled stand-in price files.

The files under ``src/pricecast/datasets/`` are SYNTHETIC. They share the
layout and span of the World Bank monthly series (Cotton A index in USD/kg,
average crude oil spot in USD/bbl, 1960-01 to 2018-12) so the pipeline runs
end to end offline, but the numbers are not market data. Replace them with
the real columns from the World Bank "Pink Sheet" monthly file to reproduce
published results.

Each series is a piecewise-linear log-price path through a handful of
rough historical knots plus a stationary AR(2) deviation.

    python tools/make_stand_in_data.py
"""
from pathlib import Path

import numpy as np
from scipy import signal

OUT = Path(__file__).resolve().parents[1] / "src" / "pricecast" / "datasets"
START, N = 1960, 708

KNOTS = {
    "cotton": ([(1960, 0.65), (1972, 0.75), (1974, 1.50), (1980, 2.00), (1986, 1.10),
                (1995, 2.10), (2001, 1.00), (2010, 1.80), (2011.2, 4.30), (2012, 2.00),
                (2018.99, 2.00)], 0.035),
    "oil": ([(1960, 1.60), (1973.8, 2.50), (1974.1, 11.0), (1979, 20.0), (1980.5, 36.0),
             (1986.3, 13.0), (1998.9, 11.0), (2004, 35.0), (2008.5, 130.0), (2009, 42.0),
             (2011, 105.0), (2014.5, 105.0), (2016, 32.0), (2018.8, 75.0), (2018.99, 57.0)],
            0.045),
}


def make(name, seed):
    knots, sd = KNOTS[name]
    t = START + np.arange(N) / 12.0
    years, levels = zip(*knots)
    base = np.interp(t, years, np.log(levels))
    rng = np.random.default_rng(seed)
    dev = signal.lfilter([1.0], [1.0, -1.1, 0.25], rng.standard_normal(N + 100) * sd)[100:]
    return np.round(np.exp(base + dev), 4)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    dates = [f"{START + k // 12}-{k % 12 + 1:02d}" for k in range(N)]
    for seed, name in enumerate(KNOTS, start=1960):
        values = make(name, seed)
        lines = [f"date,{name}"] + [f"{d},{v:.4f}" for d, v in zip(dates, values)]
        (OUT / f"{name}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {name}.csv: {len(values)} rows, range {values.min()}..{values.max()}")


if __name__ == "__main__":
    main()
