"""Train the four LSTM topologies on one split and report validation and test RMSE.

The test block is the 24 hours after the training span, forecast recursively.
Each configuration trains for up to --epochs epochs with early stopping.

    python scripts/run_lstm_configs.py --epochs 200
"""

import argparse
import time
from dataclasses import replace

from aqforecast.lstm import LstmHyperParams, NetworkConfig, NetworkKind, forecast_lstm, train
from aqforecast.metrics import rmse
from aqforecast.series import window_at
from aqforecast.synth import SynthSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epochs", type=int, default=800)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    series = generate(SynthSpec(seed=args.seed))
    hyper = replace(LstmHyperParams(), epochs_max=args.epochs, seed=args.seed)
    origin = series.end - 24
    history, actual = window_at(series, origin, hyper.train_size, 24)
    print(f"{'config':<16} {'epochs':>6} {'val mse':>9} {'rmse':>7} {'seconds':>8}")
    for kind in NetworkKind:
        t0 = time.perf_counter()
        model = train(history, NetworkConfig(kind), hyper)
        secs = time.perf_counter() - t0
        pred = forecast_lstm(model, history, 24)
        err = rmse(pred, actual.values).rmse
        print(f"{kind.value:<16} {model.trained_epochs:>6} {model.best_val_loss:9.5f} "
              f"{err:7.3f} {secs:8.1f}")


if __name__ == "__main__":
    main()
