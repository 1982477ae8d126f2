"""Command-line front end.

Subcommands:

* ``curve``      run a full experiment, write ``curves.csv`` + ``manifest.json``
* ``calibrate``  thresholds only, printed as CSV
* ``detect``     replay a serialized observation file through one detector
* ``pulse``      print raised cosine pulse samples as CSV

Exit codes: 0 on success, 1 for configuration/input problems, 2 for
numeric failures inside the solvers.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from ._version import __version__
from .channel import ScenarioConfig, load_observations
from .detectors import DetectorContext, DetectorKind, evaluate_detector
from .errors import ConfigError, InterchangeError, InvalidRolloff, PassiveGlrtError
from .montecarlo import (
    ExperimentConfig,
    calibrate_threshold,
    curves_to_csv,
    manifest_dict,
    run_experiment,
)
from .waveform import (
    CONSTELLATIONS,
    LinearModFormat,
    OfdmFormat,
    raised_cosine_pulse,
)

__all__ = ["main", "load_run_config", "parse_run_config"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _check_keys(block: dict, required: set, optional: set, where: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(block) - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(block)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _positive_int(block, key, where) -> int:
    v = block[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ConfigError(f"{where}.{key}: expected a positive integer")
    return v


def _number(block, key, where) -> float:
    v = block[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{where}.{key}: expected a number")
    return float(v)


def _constellation(block, where):
    name = block.get("constellation", "bpsk")
    if name not in CONSTELLATIONS:
        raise ConfigError(
            f"{where}.constellation: unknown alphabet {name!r}, "
            f"expected one of {sorted(CONSTELLATIONS)}"
        )
    return CONSTELLATIONS[name]


def _parse_format(block: dict, where: str):
    if not isinstance(block, dict) or "type" not in block:
        raise ConfigError(f"{where}: format block needs a 'type' key")
    kind = block["type"]
    if kind == "linear":
        _check_keys(
            block,
            {"type", "rolloff", "span_symbols", "samples_per_symbol", "symbols"},
            {"constellation"},
            where,
        )
        rolloff = _number(block, "rolloff", where)
        if not 0.0 <= rolloff <= 1.0:
            raise ConfigError(f"{where}.rolloff: must be in [0, 1]")
        m = _positive_int(block, "span_symbols", where)
        p = _positive_int(block, "samples_per_symbol", where)
        return LinearModFormat(
            pulse=raised_cosine_pulse(rolloff, m, p),
            span_symbols=m,
            samples_per_symbol=p,
            symbols=_positive_int(block, "symbols", where),
            constellation=_constellation(block, where),
        )
    if kind == "ofdm":
        _check_keys(
            block,
            {"type", "subcarriers", "samples_per_symbol", "symbols"},
            {"tg_over_tsym", "constellation"},
            where,
        )
        ratio = 0.0
        if "tg_over_tsym" in block:
            ratio = _number(block, "tg_over_tsym", where)
        if not 0.0 <= ratio < 1.0:
            raise ConfigError(f"{where}.tg_over_tsym: must be in [0, 1)")
        return OfdmFormat(
            subcarriers=_positive_int(block, "subcarriers", where),
            samples_per_symbol=_positive_int(block, "samples_per_symbol", where),
            symbols=_positive_int(block, "symbols", where),
            guard=ratio,
            useful=1.0 - ratio,
            constellation=_constellation(block, where),
        )
    raise ConfigError(f"{where}.type: unknown format type {kind!r}")


def parse_run_config(doc: dict) -> ExperimentConfig:
    """Validate a run-config document and build an ExperimentConfig.

    Unknown keys anywhere are rejected so typos fail loudly instead of
    silently falling back to defaults.
    """
    _check_keys(
        doc,
        {
            "scenario",
            "formats",
            "detectors",
            "snr_grid_db",
            "pf_target",
            "trials_h0",
            "trials_h1",
            "seed",
        },
        set(),
        "config",
    )
    scen_block = doc["scenario"]
    _check_keys(scen_block, {"n_tx", "n_rx", "dnr_db"}, {"sigma2"}, "scenario")
    n_tx = _positive_int(scen_block, "n_tx", "scenario")
    scenario = ScenarioConfig(
        n_tx=n_tx,
        n_rx=_positive_int(scen_block, "n_rx", "scenario"),
        sigma2=_number(scen_block, "sigma2", "scenario") if "sigma2" in scen_block else 1.0,
        dnr_db=_number(scen_block, "dnr_db", "scenario"),
    )
    fmt_blocks = doc["formats"]
    if not isinstance(fmt_blocks, list) or not fmt_blocks:
        raise ConfigError("formats: expected a nonempty list of format blocks")
    if len(fmt_blocks) == 1:
        fmt_blocks = fmt_blocks * n_tx
    if len(fmt_blocks) != n_tx:
        raise ConfigError(
            f"formats: expected 1 or {n_tx} blocks, got {len(fmt_blocks)}"
        )
    formats = tuple(
        _parse_format(b, f"formats[{i}]") for i, b in enumerate(fmt_blocks)
    )
    det_block = doc["detectors"]
    if not isinstance(det_block, list):
        raise ConfigError("detectors: expected a list of detector names")
    detectors = []
    for name in det_block:
        try:
            detectors.append(DetectorKind(name))
        except ValueError:
            raise ConfigError(
                f"detectors: unknown detector {name!r}, expected one of "
                f"{[d.value for d in DetectorKind]}"
            ) from None
    grid = doc["snr_grid_db"]
    if (
        not isinstance(grid, list)
        or not grid
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in grid)
    ):
        raise ConfigError("snr_grid_db: expected a nonempty list of numbers")
    if not isinstance(doc["seed"], int) or isinstance(doc["seed"], bool) or doc["seed"] < 0:
        raise ConfigError("seed: expected a nonnegative integer")
    try:
        return ExperimentConfig(
            scenario=scenario,
            formats=formats,
            detectors=tuple(detectors),
            snr_grid_db=tuple(float(v) for v in grid),
            pf_target=_number(doc, "pf_target", "config"),
            trials_h0=_positive_int(doc, "trials_h0", "config"),
            trials_h1=_positive_int(doc, "trials_h1", "config"),
            seed=doc["seed"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_config_path(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("passiveglrt") / "configs" / path
    if bundled.is_file():
        return bundled  # type: ignore[return-value]
    raise ConfigError(f"config file not found: {path}")


def load_run_config(path: str) -> tuple[ExperimentConfig, dict]:
    """Read, validate, and build a config; returns (config, raw document)."""
    p = _resolve_config_path(path)
    try:
        raw = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return parse_run_config(raw), raw


def _apply_overrides(args, config: ExperimentConfig, raw: dict):
    if args.seed is not None:
        config = replace(config, seed=args.seed)
        raw = dict(raw, seed=args.seed)
    if args.detectors is not None:
        names = [n.strip() for n in args.detectors.split(",") if n.strip()]
        kinds = []
        for n in names:
            try:
                kinds.append(DetectorKind(n))
            except ValueError:
                raise ConfigError(f"--detectors: unknown detector {n!r}") from None
        config = replace(config, detectors=tuple(kinds))
        raw = dict(raw, detectors=[k.value for k in kinds])
    return config, raw


def cmd_curve(args) -> int:
    config, raw = load_run_config(args.config)
    config, raw = _apply_overrides(args, config, raw)
    result = run_experiment(config, workers=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_text = curves_to_csv(result.curves)
    (out / "curves.csv").write_text(csv_text)
    manifest = manifest_dict(result, config_echo=raw)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    for name, why in result.failures.items():
        print(f"detector {name} failed: {why}", file=sys.stderr)
    rows = sum(len(c.points) for c in result.curves)
    print(f"wrote {out / 'curves.csv'} ({rows} rows) and {out / 'manifest.json'}")
    if result.failures and not result.curves:
        return 2
    return 0


def cmd_calibrate(args) -> int:
    config, raw = load_run_config(args.config)
    config, raw = _apply_overrides(args, config, raw)
    thresholds = {}
    for detector in config.detectors:
        thresholds[detector.value] = calibrate_threshold(
            detector, config, workers=args.threads
        )
    print("detector,threshold")
    for name, value in thresholds.items():
        print(f"{name},{value:.12g}")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "thresholds.json").write_text(
            json.dumps({"seed": config.seed, "thresholds": thresholds}, indent=2, sort_keys=True)
            + "\n"
        )
    return 0


def cmd_detect(args) -> int:
    config, _ = load_run_config(args.config)
    try:
        kind = DetectorKind(args.detector)
    except ValueError:
        raise ConfigError(
            f"--detector: unknown detector {args.detector!r}, expected one of "
            f"{[d.value for d in DetectorKind]}"
        ) from None
    obs = load_observations(args.observations)
    if len(obs) != config.scenario.n_tx:
        raise InterchangeError(
            f"observation file has {len(obs)} transmitters, config expects "
            f"{config.scenario.n_tx}"
        )
    ctx = DetectorContext.from_formats(
        config.formats, config.scenario.sigma2, config.enumeration_cap
    )
    value = evaluate_detector(kind, obs, ctx)
    print(f"{value:.12g}")
    return 0


def cmd_pulse(args) -> int:
    samples = raised_cosine_pulse(args.rolloff, args.span_symbols, args.samples_per_symbol)
    print("index,time,amplitude")
    for k, v in enumerate(samples):
        t = k / args.samples_per_symbol - args.span_symbols / 2.0
        print(f"{k},{t!r},{float(v.real)!r}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="passiveglrt", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("curve", help="run an experiment and emit Pd curves")
    curve.add_argument("--config", required=True, help="run config path or bundled name")
    curve.add_argument("--out", required=True, help="output directory")
    curve.add_argument("--seed", type=int, default=None, help="override the config seed")
    curve.add_argument("--threads", type=int, default=1, help="worker processes")
    curve.add_argument(
        "--detectors", default=None, help="comma-separated subset of detectors"
    )
    curve.set_defaults(func=cmd_curve)

    cal = sub.add_parser("calibrate", help="calibrate thresholds only")
    cal.add_argument("--config", required=True)
    cal.add_argument("--out", default=None, help="optional directory for thresholds.json")
    cal.add_argument("--seed", type=int, default=None)
    cal.add_argument("--threads", type=int, default=1)
    cal.add_argument("--detectors", default=None)
    cal.set_defaults(func=cmd_calibrate)

    det = sub.add_parser("detect", help="score a serialized observation file")
    det.add_argument("observations", help="observation CSV written by this package")
    det.add_argument("--config", required=True, help="run config supplying formats")
    det.add_argument("--detector", required=True, help="detector kind name")
    det.set_defaults(func=cmd_detect)

    pulse = sub.add_parser("pulse", help="print raised cosine pulse samples")
    pulse.add_argument("--rolloff", type=float, required=True)
    pulse.add_argument("--span-symbols", type=int, required=True)
    pulse.add_argument("--samples-per-symbol", type=int, required=True)
    pulse.set_defaults(func=cmd_pulse)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command in ("curve", "calibrate") and args.threads < 1:
            raise _UsageError("--threads must be >= 1")
        return args.func(args)
    except _UsageError as exc:
        print(f"passiveglrt: error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, InterchangeError, InvalidRolloff) as exc:
        print(f"passiveglrt: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"passiveglrt: error: {exc}", file=sys.stderr)
        return 1
    except PassiveGlrtError as exc:
        print(f"passiveglrt: numeric failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
