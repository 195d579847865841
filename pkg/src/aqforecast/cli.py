"""Command-line entry point.

Exit codes: 0 success, 2 usage or input error, 3 I/O error, 4 numerical
failure.  Every flag can also be given in a TOML file passed with
``--config``; flags win over file values.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import harness
from .errors import ForecastError, NumericalError
from .es import EsKind, EsVariant
from .harness import EsMethod, LstmMethod, RollingSpec, SarimaMethod
from .lstm import LstmHyperParams, NetworkConfig
from .sarima import TABLE3, OrderBounds, SarimaOrder
from .series import TimeSeries, ingest_csv, interpolate_missing, write_csv
from .synth import SynthSpec, generate

log = logging.getLogger("aqforecast")

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
METHOD_ALIASES = {"es": "es", "arima": "arima", "sarima": "arima", "lstm": "lstm"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    input_path: str | None = None
    synth: SynthSpec | None = None
    methods: list[str] = field(default_factory=lambda: ["es", "arima", "lstm"])
    es: dict = field(default_factory=dict)
    arima: dict = field(default_factory=dict)
    lstm: dict = field(default_factory=dict)
    rolling: RollingSpec = RollingSpec()
    train_len: int | None = None
    candidates: list[int] | None = None
    jobs: int = 1
    out_dir: Path = Path("results")
    timings: bool = False

    def load_series(self) -> TimeSeries:
        if self.input_path is not None:
            with open(self.input_path, "rb") as fh:
                s = ingest_csv(fh)
            return interpolate_missing(s) if s.n_missing else s
        s = generate(self.synth or SynthSpec())
        return interpolate_missing(s) if s.n_missing else s


# --------------------------------------------------------------------------
# method construction from config sections

def build_es(section: dict) -> EsMethod:
    section = dict(section)
    variant = EsVariant(EsKind(section.pop("variant", "hw")))
    train_len = int(section.pop("train_len", 96))
    unknown = set(section) - {"alpha", "beta", "gamma", "initial_level", "initial_trend"}
    if unknown:
        raise UsageError(f"unknown [es] keys: {sorted(unknown)}")
    fixed = tuple(sorted((k, float(v)) for k, v in section.items()))
    return EsMethod(variant=variant, fixed=fixed, default_train_len=train_len)


def build_arima(section: dict) -> SarimaMethod:
    section = dict(section)
    train_len = int(section.pop("train_len", 120))
    order = section.pop("order", None)
    if order is not None:
        order = SarimaOrder(*[int(v) for v in order])
    bounds = OrderBounds(**{k: tuple(int(x) for x in section.pop(k)) for k in list(section)
                            if k in TABLE3})
    if section:
        raise UsageError(f"unknown [arima] keys: {sorted(section)}")
    return SarimaMethod(bounds=bounds, order=order, default_train_len=train_len)


def build_lstm(section: dict, seed: int) -> LstmMethod:
    section = dict(section)
    kind = section.pop("kind", "simple")
    retrain = bool(section.pop("retrain", False))
    section.setdefault("seed", seed)
    try:
        hyper = LstmHyperParams(**section)
    except TypeError as exc:
        raise UsageError(f"bad [lstm] section: {exc}") from None
    return LstmMethod(NetworkConfig(kind), hyper, retrain=retrain)


def make_method(name: str, cfg: RunConfig):
    key = METHOD_ALIASES.get(name.strip().lower())
    if key == "es":
        m = build_es(cfg.es)
    elif key == "arima":
        m = build_arima(cfg.arima)
    elif key == "lstm":
        return build_lstm(cfg.lstm, cfg.rolling.seed)
    else:
        raise UsageError(f"unknown method {name!r}; choose from es, arima, lstm")
    if cfg.train_len is not None:
        m = replace(m, default_train_len=cfg.train_len)
    return m


# --------------------------------------------------------------------------
# config resolution

def _read_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from None


def resolve(args: argparse.Namespace) -> RunConfig:
    file_cfg = _read_config(getattr(args, "config", None))
    data = file_cfg.get("data", {})
    rolling = file_cfg.get("rolling", {})
    out = file_cfg.get("output", {})

    def pick(flag, section, key, default=None):
        v = getattr(args, flag, None)
        if v is not None:
            return v
        return section.get(key, default)

    input_path = pick("input", data, "input")
    synth_cfg = dict(file_cfg.get("synth", {}))
    if input_path and synth_cfg:
        raise UsageError("give either an input file or a [synth] section, not both")
    seed = int(pick("seed", rolling, "seed", 42))
    synth = None
    if not input_path:
        synth_cfg.setdefault("seed", seed)
        if getattr(args, "synth_hours", None) is not None:
            synth_cfg["hours"] = args.synth_hours
        synth = SynthSpec(**synth_cfg)

    methods = pick("methods", data, "methods")
    if isinstance(methods, str):
        methods = [m for m in methods.split(",") if m.strip()]
    spec = RollingSpec(
        train_len=int(pick("train_len", rolling, "train_len", 96)),
        horizon=int(pick("horizon", rolling, "horizon", 24)),
        stride=int(pick("stride", rolling, "stride", 1)),
        window_count=int(pick("windows", rolling, "windows", 48)),
        seed=seed,
    )
    candidates = pick("candidates", rolling, "candidates")
    if isinstance(candidates, str):
        candidates = [int(c) for c in candidates.split(",") if c.strip()]
    train_len = pick("train_len", rolling, "train_len")
    return RunConfig(
        input_path=input_path,
        synth=synth,
        methods=methods or ["es", "arima", "lstm"],
        es=file_cfg.get("es", {}),
        arima=file_cfg.get("arima", {}),
        lstm=file_cfg.get("lstm", {}),
        rolling=spec,
        train_len=None if train_len is None else int(train_len),
        candidates=candidates,
        jobs=int(pick("jobs", rolling, "jobs", 1)),
        out_dir=Path(pick("out_dir", out, "out_dir", "results")),
        timings=bool(pick("timings", out, "timings", False)),
    )


# --------------------------------------------------------------------------
# commands

def _prepare_out_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    probe = path / ".write-test"
    probe.write_text("")
    probe.unlink()
    return path


def cmd_synth(args) -> int:
    spec = SynthSpec(hours=args.hours, seed=args.seed, missing_rate=args.missing_rate,
                     base=args.base, diurnal_amp=args.diurnal_amp, weekly_amp=args.weekly_amp,
                     ar_coeff=args.ar_coeff, noise_sd=args.noise_sd)
    series = generate(spec)
    if args.out in (None, "-"):
        write_csv(series, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            write_csv(series, fh)
    return EXIT_OK


def cmd_ingest(args) -> int:
    with open(args.input, "rb") as fh:
        raw = ingest_csv(fh, args.columns)
    filled = interpolate_missing(raw) if raw.n_missing else raw
    if args.out in (None, "-"):
        write_csv(filled, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            write_csv(filled, fh)
    print(f"filled {raw.n_missing} of {len(raw)} points", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = resolve(args)
    if len(cfg.methods) != 1:
        raise UsageError("sweep takes exactly one --method")
    method = make_method(cfg.methods[0], cfg)
    out_dir = _prepare_out_dir(cfg.out_dir)
    series = cfg.load_series()
    candidates = cfg.candidates or harness.default_candidates(method)
    report = harness.sweep_training_interval(series, method, candidates, cfg.rolling, jobs=cfg.jobs)
    path = out_dir / f"sweep_{method.name.lower()}.csv"
    harness.write_sweep_csv([report], path)
    print(f"{method.name}: best training interval {report.best_train_len} h "
          f"(RMSE {report.rows[report.best_train_len]:.4g}); wrote {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = resolve(args)
    methods = [make_method(m, cfg) for m in cfg.methods]
    out_dir = _prepare_out_dir(cfg.out_dir)
    series = cfg.load_series()
    comparison = harness.compare_methods(series, methods, cfg.rolling, jobs=cfg.jobs)
    harness.write_report_csv(comparison, out_dir / "report.csv", timings=cfg.timings)
    harness.write_plot_csv(comparison, out_dir / "horizon_rmse.csv")
    for r in comparison.reports:
        print(f"{r.method}: mean RMSE {r.mean_rmse:.4g} over {r.window_count} windows, "
              f"h1 {r.per_horizon_rmse[1]:.4g}, h{cfg.rolling.horizon} "
              f"{r.per_horizon_rmse[cfg.rolling.horizon]:.4g}, "
              f"build {r.mean_build_seconds:.3f}s, predict {r.mean_predict_seconds:.3f}s")
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser, multi: bool) -> None:
    p.add_argument("--config", help="TOML file mirroring these flags")
    p.add_argument("--input", help="timestamp,value CSV; synthetic data when omitted")
    if multi:
        p.add_argument("--methods", help="comma list of es, arima, lstm")
    else:
        p.add_argument("--method", dest="methods", help="es or arima")
    p.add_argument("--train-len", dest="train_len", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--windows", type=int, help="number of rolling windows")
    p.add_argument("--stride", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--synth-hours", dest="synth_hours", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aqforecast", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic hourly series")
    p.add_argument("--hours", type=int, default=SynthSpec.hours)
    p.add_argument("--seed", type=int, default=SynthSpec.seed)
    p.add_argument("--missing-rate", dest="missing_rate", type=float, default=0.0)
    p.add_argument("--base", type=float, default=SynthSpec.base)
    p.add_argument("--diurnal-amp", dest="diurnal_amp", type=float, default=SynthSpec.diurnal_amp)
    p.add_argument("--weekly-amp", dest="weekly_amp", type=float, default=SynthSpec.weekly_amp)
    p.add_argument("--ar-coeff", dest="ar_coeff", type=float, default=SynthSpec.ar_coeff)
    p.add_argument("--noise-sd", dest="noise_sd", type=float, default=SynthSpec.noise_sd)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="normalize a CSV onto the hourly grid and fill gaps")
    p.add_argument("--input", required=True)
    p.add_argument("--columns", default="timestamp,value")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("sweep", help="RMSE versus training-interval length")
    _add_run_flags(p, multi=False)
    p.add_argument("--candidates", help="comma list of training lengths in hours")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="rolling comparison of ES, SARIMA and LSTM")
    _add_run_flags(p, multi=True)
    p.add_argument("--timings", action="store_true", default=None,
                   help="write wall-clock columns (makes the report non-reproducible)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ForecastError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
