"""Command-line front end: ``qcd simulate | detect | calibrate | evaluate``.

Settings come from an optional JSON config (``--config``) whose keys are the
:class:`ExperimentConfig` field names (``lambda`` is accepted for ``lam``);
command-line flags override the file.

Exit status: 0 success (``detect``: change detected), 1 ``detect`` ran but
found no change, 2 usage or configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from neuroqcd import csvio, evaluation, models, simulate, summary
from neuroqcd.detectors import (
    DEFAULT_GLR_WINDOW,
    Cusum,
    DeviationCusum,
    Gcusum,
    GlrConfig,
    NoniidCusum,
)
from neuroqcd.models import Family, ParameterSet, ParametricModel

log = logging.getLogger("neuroqcd")

EXIT_DETECTED = 0
EXIT_OK = 0
EXIT_NOT_DETECTED = 1
EXIT_CONFIG = 2
EXIT_DATA = 3

DETECTORS = ("cusum", "gcusum", "noniid", "deviation")
# long simulated baseline used when no data file supplies one
SIMULATED_BASELINE = 20_000


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    detector: str = "deviation"
    # models
    family: str = "bernoulli"
    param0: float | None = None
    param1: float | None = None
    variance: float = 1.0
    theta0_set: list[float] | None = None
    theta1_set: list[float] | None = None
    window: int = DEFAULT_GLR_WINDOW
    reset: bool = False
    # Deviation-CUSUM
    stat: str = "mean"
    lam: float = 0.05
    mu0: float | None = None
    band: list[float] | None = None
    window_length: int | None = None
    baseline_trials: int = 5
    baseline_stride: int = 1
    stride: int | None = None
    # thresholds and Monte Carlo
    threshold: float | None = None
    target_arl: float | None = None
    thresholds: list[float] | None = None
    runs: int = 500
    max_length: int | None = None
    change_point: int | None = 1
    length: int | None = None
    seed: int = 0
    # simulation
    trials: int = simulate.DEFAULT_TRIALS
    bins: int = simulate.DEFAULT_BINS
    baseline_rate: float = 0.05
    post_rate: float = 0.25
    change_trial: int = simulate.DEFAULT_CHANGE_TRIAL
    cue_bin: int = simulate.DEFAULT_CUE_BIN
    response: str = "immediate"
    bin_width: float = simulate.DEFAULT_BIN_WIDTH
    # files
    input: str | None = None
    out: str | None = None

    @classmethod
    def from_mapping(cls, data: dict) -> ExperimentConfig:
        names = {f.name for f in fields(cls)}
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def validate(self, command: str) -> None:
        if self.detector not in DETECTORS:
            raise ConfigError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        try:
            Family(self.family)
            summary.StatKind(self.stat)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if command == "detect" and (self.threshold is None) == (self.target_arl is None):
            raise ConfigError("give exactly one of threshold / target_arl")
        if command == "calibrate" and self.target_arl is None:
            raise ConfigError("calibrate needs target_arl")
        if command == "evaluate" and not self.thresholds:
            raise ConfigError("evaluate needs a nonempty thresholds list")
        if self.baseline_trials < 1:
            raise ConfigError("baseline_trials must be >= 1")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for key, value in vars(args).items():
        if key in ("command", "config", "func") or value is None:
            continue
        data[key] = value
    try:
        return ExperimentConfig.from_mapping(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# --------------------------------------------------------------------------
# building detectors


def make_model(cfg: ExperimentConfig, param: float) -> ParametricModel:
    return ParametricModel(Family(cfg.family), param, cfg.variance)


def _interval(value, name: str) -> ParameterSet:
    if value is None or len(value) != 2:
        raise ConfigError(f"{name} must be a [lower, upper] pair")
    return ParameterSet(float(value[0]), float(value[1]))


def pre_model(cfg: ExperimentConfig, baseline: np.ndarray | None) -> ParametricModel:
    """Pre-change model: ``param0`` if given, else the baseline MLE."""
    if cfg.param0 is not None:
        return make_model(cfg, cfg.param0)
    if baseline is None:
        raise ConfigError("param0 is required when no input data provides a baseline")
    family = Family(cfg.family)
    if not family.iid:
        raise ConfigError("param0 is required for the ar1 family")
    return make_model(cfg, models.mle(family, baseline))


def build_detector(cfg: ExperimentConfig, baseline: np.ndarray | None, bins: int | None = None):
    """Detector configuration from ``cfg``; ``baseline`` holds training samples."""
    if cfg.detector == "cusum":
        if cfg.param1 is None:
            raise ConfigError("cusum needs param1")
        return Cusum(pre_model(cfg, baseline), make_model(cfg, cfg.param1))
    if cfg.detector == "noniid":
        if cfg.param0 is None or cfg.param1 is None:
            raise ConfigError("noniid needs param0 and param1")
        return NoniidCusum(make_model(cfg, cfg.param0), make_model(cfg, cfg.param1),
                           cfg.reset, cfg.window)
    if cfg.detector == "gcusum":
        return Gcusum(GlrConfig(Family(cfg.family), _interval(cfg.theta0_set, "theta0_set"),
                                _interval(cfg.theta1_set, "theta1_set"), cfg.window,
                                cfg.variance))
    kind = summary.StatKind(cfg.stat)
    length = cfg.window_length
    if length is None:
        length = (bins or simulate.DEFAULT_BINS) if kind is summary.StatKind.SPECTRAL else 1
    stride = cfg.stride if cfg.stride is not None else (
        length if kind is summary.StatKind.SPECTRAL else 1)
    band = tuple(cfg.band) if cfg.band is not None else None
    aux = pre_model(cfg, baseline) if kind is summary.StatKind.ENTROPY else None
    if baseline is None:
        raise ConfigError("Deviation-CUSUM needs baseline data")
    stat = summary.fit_summary(kind, baseline, length, cfg.baseline_stride, cfg.lam,
                               aux=aux, band=band)
    if cfg.mu0 is not None:
        stat = summary.SummaryStatistic(kind, length, cfg.mu0, cfg.lam, aux, band, stat.center)
    return DeviationCusum(stat, stride)


def simulated_baseline(cfg: ExperimentConfig) -> np.ndarray:
    model = pre_model(cfg, None)
    return models.sample(model, SIMULATED_BASELINE, models.rng_for(cfg.seed, 2**31 - 1))


def _calibrate(cfg: ExperimentConfig, detector, model: ParametricModel):
    return evaluation.calibrate_threshold(detector, model, cfg.target_arl, cfg.runs, cfg.seed,
                                          cfg.max_length)


# --------------------------------------------------------------------------
# commands


def cmd_simulate(cfg: ExperimentConfig) -> int:
    trial_set = simulate.gen_trial_experiment(
        cfg.trials, cfg.bins, cfg.baseline_rate, cfg.post_rate, cfg.change_trial, cfg.cue_bin,
        simulate.Response.parse(cfg.response), cfg.seed, cfg.bin_width,
    )
    csvio.write_spike_csv(trial_set, Path(cfg.out) if cfg.out else None)
    print(f"simulated {trial_set.trials} trials x {trial_set.bins} bins, change at trial "
          f"{trial_set.change_trial}, response {trial_set.response}, "
          f"mean rate {trial_set.spikes.mean():.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_detect(cfg: ExperimentConfig) -> int:
    if not cfg.input:
        raise ConfigError("detect needs --input")
    matrix = csvio.read_trials_csv(Path(cfg.input))
    trials, bins = matrix.shape
    if cfg.baseline_trials >= trials:
        raise ConfigError(f"baseline_trials={cfg.baseline_trials} leaves no trial to monitor "
                          f"({trials} trials)")
    x = matrix.reshape(-1)
    baseline = matrix[: cfg.baseline_trials].reshape(-1)
    try:
        models.check_support(Family(cfg.family), x)
    except ValueError as exc:
        raise csvio.DataFormatError(f"{cfg.input}: {exc}") from None
    detector = build_detector(cfg, baseline, bins)
    threshold = cfg.threshold
    if threshold is None:
        threshold = _calibrate(cfg, detector, pre_model(cfg, baseline)).threshold
        log.info("calibrated threshold %.6g for target ARL %g", threshold, cfg.target_arl)
    report = detector.run(x, threshold)
    csvio.write_report_csv(report, Path(cfg.out) if cfg.out else None)
    if report.detected:
        sample = detector.sample_index(report.stopping_time)
        print(f"change detected at index {report.stopping_time} "
              f"(sample {sample}, trial {simulate.trial_of_sample(sample, bins)})",
              file=sys.stderr)
        return EXIT_DETECTED
    print(f"no change detected over {len(report.statistic_path)} steps", file=sys.stderr)
    return EXIT_NOT_DETECTED


def _detector_without_data(cfg: ExperimentConfig):
    baseline = None
    if cfg.input:
        matrix = csvio.read_trials_csv(Path(cfg.input))
        baseline = matrix[: cfg.baseline_trials].reshape(-1)
        bins = matrix.shape[1]
    else:
        bins = cfg.bins
        if cfg.detector == "deviation":
            baseline = simulated_baseline(cfg)
    return build_detector(cfg, baseline, bins), pre_model(cfg, baseline)


def cmd_calibrate(cfg: ExperimentConfig) -> int:
    detector, model = _detector_without_data(cfg)
    result = _calibrate(cfg, detector, model)
    columns = ["threshold", "estimated_arl", "arl_std_error", "runs", "censored_runs",
               "lower_bound", "reached"]
    csvio.write_table_csv([result], Path(cfg.out) if cfg.out else None, columns)
    log.info("threshold %.6g gives ARL %.6g", result.threshold, result.estimated_arl)
    return EXIT_OK


def cmd_evaluate(cfg: ExperimentConfig) -> int:
    detector, model = _detector_without_data(cfg)
    if cfg.param1 is None:
        raise ConfigError("evaluate needs param1 for the post-change model")
    max_length = cfg.max_length or 10_000
    spec = simulate.ChangeSpec(model, make_model(cfg, cfg.param1), cfg.change_point,
                               cfg.length or max_length)
    rows = evaluation.tradeoff_table(detector, spec, cfg.thresholds, cfg.runs, cfg.seed,
                                     max_length)
    csvio.write_table_csv(rows, Path(cfg.out) if cfg.out else None)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "detect": cmd_detect,
    "calibrate": cmd_calibrate,
    "evaluate": cmd_evaluate,
}


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--input", help="trial CSV (trial,bin_0,...)")
    common.add_argument("--detector", choices=DETECTORS)
    thr = common.add_mutually_exclusive_group()
    thr.add_argument("--threshold", type=float)
    thr.add_argument("--target-arl", dest="target_arl", type=float)
    common.add_argument("--baseline-trials", dest="baseline_trials", type=int)
    common.add_argument("--stride", type=int)
    common.add_argument("--stat", choices=[k.value for k in summary.StatKind])
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--band", type=_floats, help="LO,HI in radians (spectral statistic)")
    common.add_argument("--family", choices=[f.value for f in Family])
    common.add_argument("--param0", type=float)
    common.add_argument("--param1", type=float)
    common.add_argument("--runs", type=int)
    common.add_argument("--thresholds", type=_floats, help="comma-separated thresholds")

    parser = argparse.ArgumentParser(prog="qcd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", parents=[common], help="write a synthetic spike CSV")
    sim.add_argument("--trials", type=int)
    sim.add_argument("--bins", type=int)
    sim.add_argument("--baseline-rate", dest="baseline_rate", type=float)
    sim.add_argument("--post-rate", dest="post_rate", type=float)
    sim.add_argument("--change-trial", dest="change_trial", type=int)
    sim.add_argument("--cue-bin", dest="cue_bin", type=int)
    sim.add_argument("--response", help="immediate | delayed[:OFFSET] | periodic[:PERIOD]")
    sub.add_parser("detect", parents=[common], help="run a detector on a trial CSV")
    sub.add_parser("calibrate", parents=[common], help="find the threshold for a target ARL")
    sub.add_parser("evaluate", parents=[common], help="ARL / delay trade-off table")
    return parser


def _setup_logging() -> None:
    level = os.environ.get("QCD_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
        cfg.validate(args.command)
        return COMMANDS[args.command](cfg)
    except csvio.DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # ConfigError and model/parameter validation failures
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
