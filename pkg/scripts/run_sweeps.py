"""Training-interval sweeps for ES and SARIMA (RMSE at horizon 24 vs history length).

    python scripts/run_sweeps.py --es-windows 48 --sarima-windows 8
"""

import argparse
from pathlib import Path

from aqforecast.harness import (
    ES_CANDIDATES,
    SARIMA_CANDIDATES,
    EsMethod,
    RollingSpec,
    SarimaMethod,
    sweep_training_interval,
    write_sweep_csv,
)
from aqforecast.synth import SynthSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/sweeps.csv"))
    ap.add_argument("--es-windows", type=int, default=48)
    # each SARIMA window runs a full order search, so keep this modest
    ap.add_argument("--sarima-windows", type=int, default=8)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    series = generate(SynthSpec(seed=args.seed))
    reports = []
    for method, cands, n in ((EsMethod(), ES_CANDIDATES, args.es_windows),
                             (SarimaMethod(), SARIMA_CANDIDATES, args.sarima_windows)):
        rep = sweep_training_interval(series, method, cands,
                                      RollingSpec(window_count=n, seed=args.seed), jobs=args.jobs)
        reports.append(rep)
        print(rep.method)
        for length, v in rep.rows.items():
            mark = "  <- best" if length == rep.best_train_len else ""
            print(f"  {length:>4} h  {v:.4f}{mark}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(reports, args.out)


if __name__ == "__main__":
    main()
