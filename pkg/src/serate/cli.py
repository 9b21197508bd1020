"""Command-line batch runner.

Exit codes: 0 success, 1 invariant violation, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigInvalid, InvariantViolation, SerateError
from .sweeps import (
    ExperimentConfig,
    coerce_field,
    format_csv,
    format_manifest,
    parse_config_text,
    run_delay_sweep,
    run_glm_sweep,
    run_semiglm_sweep,
)
from .validate import DEFAULT_SIZES, run_validate
from .waterfill import waterfill_direct, waterfill_inverse, waterfill_weighted

log = logging.getLogger("serate")

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

SWEEPS = {
    "glm-sweep": ("glm", run_glm_sweep),
    "semiglm-sweep": ("semiglm", run_semiglm_sweep),
    "delay-sweep": ("delay", run_delay_sweep),
}

# flags that map straight onto ExperimentConfig fields
CONFIG_FLAGS = ("M", "T", "m_r", "power", "snr_grid_db", "sigma_z_sq", "f_mode", "mc_trials",
                "sigma_eta_sq", "b_rms_sq", "sv_low", "sv_high")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, help="output CSV path (default: stdout, no manifest)")
    p.add_argument("--log-base", choices=("nats", "bits"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="serate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in SWEEPS:
        p = sub.add_parser(name)
        _common(p)
        for key in CONFIG_FLAGS:
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, metavar=key.upper())

    p = sub.add_parser("waterfill")
    _common(p)
    p.add_argument("--mode", choices=("direct", "weighted", "inverse"), default="direct")
    p.add_argument("--values", required=True, help="comma-separated floors (direct/weighted) or variances (inverse)")
    p.add_argument("--weights", help="comma-separated weights for --mode weighted")
    p.add_argument("--budget", type=float, help="power budget, or target distortion for inverse")

    p = sub.add_parser("validate")
    _common(p)
    p.add_argument("--sizes", default=",".join(map(str, DEFAULT_SIZES)))
    p.add_argument("--tol", type=float, help="override every deterministic threshold")
    return parser


def load_config(args, model: str) -> ExperimentConfig:
    values = {}
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config: {exc}") from exc
        values.update(parse_config_text(text))
    for key in CONFIG_FLAGS:
        raw = getattr(args, key, None)
        if raw is not None:
            values[key] = coerce_field(key, raw)
    if args.seed is not None:
        values["seed"] = args.seed
    if args.log_base is not None:
        values["log_base"] = args.log_base
    values["model"] = model
    return ExperimentConfig(**values).validate()


def _emit(text: str, out: Path | None, manifest: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    if manifest is not None:
        Path(f"{out}.manifest").write_text(manifest)
    log.info("wrote %s", out)


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise ConfigInvalid(f"bad number list {text!r}") from exc


def cmd_sweep(args) -> int:
    model, runner = SWEEPS[args.command]
    cfg = load_config(args, model)
    rows = runner(cfg)
    csv = format_csv(rows, cfg.log_base)
    name = args.out.name if args.out else "-"
    _emit(csv, args.out, format_manifest(args.command, cfg, rows, name))
    return EXIT_OK


def cmd_waterfill(args) -> int:
    values = _floats(args.values)
    if args.budget is None:
        raise ConfigInvalid("--budget is required")
    if args.mode == "direct":
        alloc = waterfill_direct(values, args.budget)
        weights = np.ones_like(values)
    elif args.mode == "weighted":
        if args.weights is None:
            raise ConfigInvalid("--weights is required for --mode weighted")
        weights = _floats(args.weights)
        alloc = waterfill_weighted(values, weights, args.budget)
    else:
        alloc = waterfill_inverse(values, args.budget)
        weights = np.ones_like(values)
    rows = [
        {"index": i, "input": v, "weight": w, "level": lv, "water_level": alloc.water_level}
        for i, (v, w, lv) in enumerate(zip(values, weights, alloc.levels))
    ]
    csv = format_csv(rows)
    manifest = "\n".join([
        "tool = serate",
        "command = waterfill",
        f"mode = {args.mode}",
        f"budget = {args.budget!r}",
        f"budget_used = {alloc.budget_used!r}",
        f"water_level = {alloc.water_level!r}",
    ]) + "\n"
    _emit(csv, args.out, manifest)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        sizes = tuple(int(s) for s in args.sizes.split(","))
    except ValueError as exc:
        raise ConfigInvalid(f"bad --sizes {args.sizes!r}") from exc
    report = run_validate(seed=args.seed or 0, sizes=sizes, tol=args.tol)
    text = "\n".join(report.lines()) + "\n"
    _emit(text, args.out, None)
    if not report.passed:
        log.error("failed checks: %s", ", ".join(report.failed))
        return EXIT_INVARIANT
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    handler = {"waterfill": cmd_waterfill, "validate": cmd_validate}.get(args.command, cmd_sweep)
    try:
        return handler(args)
    except ConfigInvalid as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        log.error("invariant violation: %s", exc)
        return EXIT_INVARIANT
    except (SerateError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
