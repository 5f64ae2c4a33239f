"""Command-line front end: presets, config handling, CSV/JSON outputs.

``cheshire --preset weak-cheshire --shots 100000 --out-dir out`` runs one
experiment and writes two files into the output directory:

- ``shots.csv`` with header ``shot_id,detector,x,y``; ``x`` is the
  horizontal readout, ``y`` the vertical one, both empty for shots that did
  not reach D1 (and for axes the preset does not couple).  Floats use
  ``repr`` (shortest round-trip form), so identical configs give
  byte-identical files.
- ``summary.json`` with keys ``config`` (the fully resolved configuration),
  ``expected`` (analytic weak values as {re, im} pairs, conditional outcome
  tables, pointer moments -- never derived from the samples), ``estimated``
  (post_rate, per-axis means and standard errors) and ``diagnostics``.

Presets: ``weak-cheshire`` couples a which-path probe (vertical axis) and an
arm-2 angular-momentum probe (horizontal axis), both weak; ``which-path``
and ``smile-only`` couple one of them; ``joint-strong`` runs both at
coupling/width = 10; ``sweep`` repeats weak-cheshire at coupling/width
ratios 0.1, 0.01, 0.001 (one subdirectory each) and aggregates the
convergence of mean/coupling toward the weak values.

Exit codes: 0 success, 1 runtime failure (impossible post-selection, too few
post-selected shots, I/O), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .montecarlo import (
    Experiment,
    InsufficientData,
    ShotRecord,
    SummaryStats,
    analyze,
    estimate,
    sample_shots,
)
from .pointer import Axis, GaussianPointer, NullPostSelection, mixture_moments
from .postselect import abl_distribution, weak_value
from .qstate import canonical_observables, canonical_states, observable_operator

DEFAULT_PRESET = "weak-cheshire"
DEFAULT_WIDTH = 1.0
DEFAULT_SHOTS = 100_000
DEFAULT_SEED = 0
DEFAULT_OUT_DIR = "out"
SWEEP_RATIOS = (1e-1, 1e-2, 1e-3)

_CONFIG_KEYS = (
    "preset",
    "g_vertical",
    "g_horizontal",
    "s",
    "shots",
    "seed",
    "out_dir",
    "format",
)


class UsageError(Exception):
    """Invalid configuration; maps to exit code 2."""


@dataclass(frozen=True)
class _Preset:
    couplings: tuple[tuple[str, Axis], ...]  # (canonical observable name, axis)
    default_ratio: float  # coupling/width when no explicit coupling is given


PRESETS: dict[str, _Preset] = {
    "weak-cheshire": _Preset(
        (("photon_in_arm1", Axis.VERTICAL), ("angular_momentum_arm2", Axis.HORIZONTAL)), 1e-2
    ),
    "which-path": _Preset((("photon_in_arm1", Axis.VERTICAL),), 1e-2),
    "smile-only": _Preset((("angular_momentum_arm2", Axis.HORIZONTAL),), 1e-2),
    "joint-strong": _Preset(
        (("photon_in_arm1", Axis.VERTICAL), ("angular_momentum_arm2", Axis.HORIZONTAL)), 10.0
    ),
}

#: Weak values reported in every summary.
_REPORTED_WEAK_VALUES = (
    "photon_in_arm1",
    "photon_in_arm2",
    "angular_momentum_arm1",
    "angular_momentum_arm2",
)


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str
    g_vertical: float
    g_horizontal: float
    s: float
    shots: int
    seed: int
    out_dir: Path
    format: str = "csv+json"

    def as_dict(self) -> dict:
        return {
            "preset": self.preset,
            "g_vertical": self.g_vertical,
            "g_horizontal": self.g_horizontal,
            "s": self.s,
            "shots": self.shots,
            "seed": self.seed,
            "out_dir": str(self.out_dir),
            "format": self.format,
        }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cheshire",
        description="Simulate pre- and post-selected photon experiments with pointer readouts.",
    )
    parser.add_argument("--preset", help=f"experiment preset (default {DEFAULT_PRESET})")
    parser.add_argument("--g-vertical", type=float, help="vertical coupling displacement")
    parser.add_argument("--g-horizontal", type=float, help="horizontal coupling displacement")
    parser.add_argument("--s", type=float, help="pointer width (default 1.0)")
    parser.add_argument("--shots", type=int, help=f"number of photons (default {DEFAULT_SHOTS})")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--out-dir", help=f"output directory (default {DEFAULT_OUT_DIR})")
    parser.add_argument("--config", help="JSON config file; flags override its values")
    return parser


def parse_config(argv: Sequence[str] | None = None) -> ExperimentConfig:
    """Resolve flags, optional config file, and defaults into a validated config.

    Precedence: flags > config-file values > defaults.  Unknown config-file
    keys and out-of-range values raise UsageError naming the offending key.
    """
    args = _build_parser().parse_args(argv)
    values: dict = {}
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"config: cannot read {args.config}: {exc}") from exc
        if not isinstance(file_values, dict):
            raise UsageError("config: file must contain a JSON object")
        for key in file_values:
            if key not in _CONFIG_KEYS:
                raise UsageError(f"config: unknown key {key!r}")
        values.update(file_values)
    for key in ("preset", "g_vertical", "g_horizontal", "s", "shots", "seed", "out_dir"):
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag

    preset = str(values.get("preset", DEFAULT_PRESET))
    if preset != "sweep" and preset not in PRESETS:
        known = ", ".join([*PRESETS, "sweep"])
        raise UsageError(f"preset: unknown preset {preset!r} (choose from {known})")
    try:
        s = float(values.get("s", DEFAULT_WIDTH))
        shots = int(values.get("shots", DEFAULT_SHOTS))
        seed = int(values.get("seed", DEFAULT_SEED))
        ratio = PRESETS["weak-cheshire" if preset == "sweep" else preset].default_ratio
        g_vertical = float(values.get("g_vertical", ratio * s))
        g_horizontal = float(values.get("g_horizontal", ratio * s))
        fmt = str(values.get("format", "csv+json"))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"config: {exc}") from exc
    if not s > 0:
        raise UsageError(f"s: pointer width must be > 0, got {s}")
    if shots < 1:
        raise UsageError(f"shots: need at least 1 shot, got {shots}")
    if g_vertical < 0:
        raise UsageError(f"g_vertical: coupling must be >= 0, got {g_vertical}")
    if g_horizontal < 0:
        raise UsageError(f"g_horizontal: coupling must be >= 0, got {g_horizontal}")
    if fmt != "csv+json":
        raise UsageError(f"format: only 'csv+json' is supported, got {fmt!r}")
    return ExperimentConfig(
        preset=preset,
        g_vertical=g_vertical,
        g_horizontal=g_horizontal,
        s=s,
        shots=shots,
        seed=seed,
        out_dir=Path(values.get("out_dir", DEFAULT_OUT_DIR)),
        format=fmt,
    )


def build_experiment(config: ExperimentConfig) -> Experiment:
    """Instantiate the preset's couplings from a resolved config."""
    if config.preset == "sweep":
        raise ValueError("sweep is an orchestration preset; build its points instead")
    observables = canonical_observables()
    pre, _ = canonical_states()
    couplings = []
    for name, axis in PRESETS[config.preset].couplings:
        g = config.g_vertical if axis is Axis.VERTICAL else config.g_horizontal
        couplings.append((observables[name], GaussianPointer(width=config.s, coupling=g, axis=axis)))
    return Experiment(pre=pre, couplings=tuple(couplings))


def _complex_pair(value: complex) -> dict[str, float]:
    return {"re": value.real, "im": value.imag}


def _axis_dict(values: dict[Axis, float | None]) -> dict[str, float | None]:
    return {axis.value: value for axis, value in values.items()}


def expected_summary(config: ExperimentConfig, experiment: Experiment) -> dict:
    """Analytic predictions: computed from the state algebra, never from samples."""
    pre, post = canonical_states()
    observables = canonical_observables()
    weak_values = {
        name: _complex_pair(weak_value(observable_operator(observables[name]), pre, post))
        for name in _REPORTED_WEAK_VALUES
    }
    coupled_names = [name for name, _ in PRESETS[config.preset].couplings]
    abl_tables = {
        name: {f"{value:g}": prob for value, prob in abl_distribution(observables[name], pre, post).outcomes.items()}
        for name in coupled_names
    }
    analysis = analyze(experiment)
    moments = mixture_moments(analysis.mixture) if analysis.mixture is not None else {}
    means: dict[Axis, float | None] = {}
    ratios: dict[Axis, float | None] = {}
    variances: dict[Axis, float | None] = {}
    for _, pointer in experiment.couplings:
        m = moments.get(pointer.axis)
        means[pointer.axis] = m.mean if m else None
        variances[pointer.axis] = m.variance if m else None
        ratios[pointer.axis] = (m.mean / pointer.coupling) if m and pointer.coupling > 0 else None
    return {
        "weak_values": weak_values,
        "abl": abl_tables,
        "success_probability": analysis.success_probability,
        "pointer_mean": _axis_dict(means),
        "pointer_variance": _axis_dict(variances),
        "pointer_mean_over_coupling": _axis_dict(ratios),
    }


def estimated_summary(stats: SummaryStats) -> dict:
    return {
        "post_rate": stats.post_rate,
        "d1_count": stats.d1_count,
        "means": {axis.value: est.mean for axis, est in stats.axes.items()},
        "standard_errors": {axis.value: est.stderr for axis, est in stats.axes.items()},
        "mean_over_coupling": {axis.value: est.mean_over_coupling for axis, est in stats.axes.items()},
    }


def _diagnostics(config: ExperimentConfig, experiment: Experiment) -> dict:
    analysis = analyze(experiment)
    return {
        "g_over_s": {
            pointer.axis.value: pointer.coupling / pointer.width
            for pointer in experiment.pointers()
        },
        "branch_count": len(analysis.mixture.weights) if analysis.mixture is not None else 0,
    }


def write_shots_csv(path: Path, records: list[ShotRecord], experiment: Experiment) -> None:
    """CSV with one row per shot; x = horizontal readout, y = vertical readout."""
    axes = experiment.axes()
    column_of = {Axis.HORIZONTAL: "x", Axis.VERTICAL: "y"}
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["shot_id", "detector", "x", "y"])
        for record in records:
            fields = {"x": "", "y": ""}
            if record.readout is not None:
                for axis, value in zip(axes, record.readout):
                    fields[column_of[axis]] = repr(value)
            writer.writerow([record.shot_id, record.detector.value, fields["x"], fields["y"]])


def _run_single(config: ExperimentConfig) -> dict:
    """Sample one preset, write its files, and return its summary dict."""
    experiment = build_experiment(config)
    records = sample_shots(experiment, config.shots, config.seed)
    stats = estimate(records, experiment)
    summary = {
        "config": config.as_dict(),
        "expected": expected_summary(config, experiment),
        "estimated": estimated_summary(stats),
        "diagnostics": _diagnostics(config, experiment),
    }
    config.out_dir.mkdir(parents=True, exist_ok=True)
    write_shots_csv(config.out_dir / "shots.csv", records, experiment)
    with open(config.out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary


def _run_sweep(config: ExperimentConfig) -> dict:
    """Weak-cheshire at each sweep ratio, plus a convergence aggregate."""
    points = []
    for ratio in SWEEP_RATIOS:
        point_config = replace(
            config,
            preset="weak-cheshire",
            g_vertical=ratio * config.s,
            g_horizontal=ratio * config.s,
            out_dir=config.out_dir / f"g_over_s_{ratio:g}",
        )
        summary = _run_single(point_config)
        expected_ratio = summary["expected"]["pointer_mean_over_coupling"]
        points.append(
            {
                "g_over_s": ratio,
                "out_dir": str(point_config.out_dir),
                "expected_mean_over_coupling": expected_ratio,
                "estimated_mean_over_coupling": summary["estimated"]["mean_over_coupling"],
                "weak_limit_error": {
                    axis: abs(value - 1.0) if value is not None else None
                    for axis, value in expected_ratio.items()
                },
            }
        )
    error_ratios = {}
    for axis in ("vertical", "horizontal"):
        errors = [point["weak_limit_error"][axis] for point in points]
        error_ratios[axis] = [
            errors[i] / errors[i + 1] if errors[i + 1] else None for i in range(len(errors) - 1)
        ]
    summary = {
        "config": config.as_dict(),
        "expected": {"weak_limit_error_ratio_per_decade": error_ratios},
        "estimated": {"points": points},
        "diagnostics": {"sweep_ratios": list(SWEEP_RATIOS)},
    }
    with open(config.out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary


def run_preset(config: ExperimentConfig) -> int:
    """Run the configured preset and write its outputs; returns the exit code.

    The sweep preset derives each point's couplings from its ratio and the
    width, ignoring explicit --g-vertical/--g-horizontal values.
    """
    try:
        if config.preset == "sweep":
            _run_sweep(config)
        else:
            _run_single(config)
    except (NullPostSelection, InsufficientData) as exc:
        print(f"cheshire: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cheshire: cannot write outputs: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"cheshire: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help or bad flags
        return int(exc.code or 0)
    return run_preset(config)


if __name__ == "__main__":
    sys.exit(main())
