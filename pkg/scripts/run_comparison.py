"""Three-way rolling comparison on the default synthetic series.

Writes report.csv (with timings) and horizon_rmse.csv under --out-dir.
Takes roughly ten minutes on one core, most of it LSTM training.

    python scripts/run_comparison.py --out-dir results/comparison
"""

import argparse
import logging
from pathlib import Path

from aqforecast.harness import (
    EsMethod,
    LstmMethod,
    RollingSpec,
    SarimaMethod,
    compare_methods,
    write_plot_csv,
    write_report_csv,
)
from aqforecast.synth import SynthSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results/comparison"))
    ap.add_argument("--windows", type=int, default=48)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)

    series = generate(SynthSpec(seed=args.seed))
    spec = RollingSpec(window_count=args.windows, seed=args.seed)
    result = compare_methods(series, [EsMethod(), SarimaMethod(), LstmMethod()], spec, jobs=args.jobs)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_report_csv(result, args.out_dir / "report.csv", timings=True)
    write_plot_csv(result, args.out_dir / "horizon_rmse.csv")

    print(f"{'h':>3} " + " ".join(f"{r.method:>8}" for r in result.reports))
    for h in range(1, spec.horizon + 1):
        print(f"{h:>3} " + " ".join(f"{r.per_horizon_rmse[h]:8.3f}" for r in result.reports))
    for r in result.reports:
        print(f"{r.method}: build {r.mean_build_seconds:.3f}s predict {r.mean_predict_seconds:.4f}s")


if __name__ == "__main__":
    main()
