"""Command-line front end: simulate, fit, criteria, select, mc, limit-prob.

Every option can come from a TOML or JSON config file (``--config``); values
given on the command line win over the file, which wins over the built-in
defaults. The file may carry options at top level or under a section named
after the subcommand. The fully resolved settings, seed included, are
embedded in every output so a result file documents its own provenance.

Exit codes: 0 success, 1 usage error, 2 unreadable or malformed data,
3 numerical failure. Failures print one JSON object to stderr with keys
``error``, ``message``, and ``exit_code``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from .criteria import (
    DEFAULT_TRUNC_KAPPA,
    DriftCriterion,
    ScaleCriterion,
    drift_criterion,
    scale_criterion_detail,
)
from .errors import DataError, LevyselError, UsageError
from .experiment import (
    CRITERION_PAIRS,
    benchmark_experiment,
    compare_to_reference,
    grid_steps,
    run_experiment,
)
from .fit import confidence_interval, fit_model, scale_stage
from .limits import (
    asymptotic_selection_prob,
    builtin_nesting,
    long_run_drift_inputs,
    long_run_scale_inputs,
)
from .models import CandidateModel, registry, resolve_candidates
from .noise import spec_to_config
from .presets import case_noise, true_drift, true_scale
from .reference import (
    REFERENCE_CASES,
    REFERENCE_CRITERIA,
    REFERENCE_GRIDS,
    benchmark_reference,
)
from .rng import RngStream
from .sde import SamplePath, TrueModel, euler_path
from .selection import stepwise_select_multi

_DEFAULTS: dict[str, dict] = {
    "simulate": {
        "case": "i",
        "h": 0.01,
        "t": None,
        "n": None,
        "x0": 0.0,
        "seed": 0,
        "stream": 0,
        "refine": 10,
        "out": "-",
    },
    "fit": {
        "data": None,
        "h": None,
        "scale": "Scale2",
        "drift": "Drift2",
        "level": 0.95,
        "out": "-",
    },
    "criteria": {
        "data": None,
        "h": None,
        "scale": None,
        "drift": None,
        "kappa": DEFAULT_TRUNC_KAPPA,
        "out": "-",
    },
    "select": {
        "data": None,
        "h": None,
        "scales": "Scale1,Scale2,Scale3,Scale4",
        "drifts": "Drift1,Drift2,Drift3",
        "criteria": "gqaic,gqbic",
        "kappa": DEFAULT_TRUNC_KAPPA,
        "out": "-",
    },
    "mc": {
        "case": "i",
        "h": None,
        "t": None,
        "grid": None,
        "reps": 100,
        "criteria": "gqaic,gqbic",
        "seed": 0,
        "refine": 10,
        "threads": None,
        "kappa": DEFAULT_TRUNC_KAPPA,
        "compare": False,
        "out": None,
    },
    "limit-prob": {
        "kind": None,
        "small": None,
        "large": None,
        "scale": "Scale2",
        "case": "i",
        "h": 0.005,
        "t": 500.0,
        "seed": 0,
        "n_mc": 1_000_000,
        "refine": 10,
        "out": "-",
    },
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports problems through the package's error channel."""

    def error(self, message):
        raise UsageError(message)


def _load_config(path: str) -> dict:
    p = Path(path)
    try:
        raw = p.read_text()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    suffix = p.suffix.lower()
    if suffix == ".json":
        try:
            loaded = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DataError(f"config {path} is not valid JSON: {exc}") from exc
    else:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            loaded = tomllib.loads(raw)
        except tomllib.TOMLDecodeError as exc:
            raise DataError(f"config {path} is not valid TOML: {exc}") from exc
    if not isinstance(loaded, dict):
        raise DataError(f"config {path} must hold a table/object at top level")
    return loaded


def _resolve(args: argparse.Namespace) -> dict:
    """defaults <- config file (top level, then command section) <- CLI flags."""
    defaults = _DEFAULTS[args.command]
    merged = dict(defaults)
    if args.config:
        loaded = _load_config(args.config)
        section = loaded.get(args.command, {})
        if not isinstance(section, dict):
            raise UsageError(f"config section {args.command!r} must be a table")
        # Top-level keys are shared across commands, so foreign ones are
        # skipped; inside a command's own section a typo is an error.
        flat = {k: v for k, v in loaded.items() if k in defaults}
        unknown = set(section) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        merged.update(flat)
        merged.update(section)
    cli = {
        k: v
        for k, v in vars(args).items()
        if k in defaults and v is not None
    }
    merged.update(cli)
    return merged


def _write_json(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out in (None, "-"):
        print(text)
    else:
        Path(out).write_text(text + "\n")


def _require(opts: dict, key: str, command: str):
    if opts.get(key) is None:
        raise UsageError(f"{command} needs --{key.replace('_', '-')}")
    return opts[key]


def _steps(opts: dict, command: str) -> int:
    if opts.get("n") is not None:
        if opts.get("t") is not None:
            raise UsageError(f"{command} takes --t or --n, not both")
        n = int(opts["n"])
        if n < 1:
            raise UsageError(f"n must be >= 1, got {n}")
        return n
    if opts.get("t") is None:
        raise UsageError(f"{command} needs --t (horizon) or --n (steps)")
    return grid_steps(float(opts["h"]), float(opts["t"]))


def _load_path(opts: dict, command: str) -> SamplePath:
    data = _require(opts, "data", command)
    h = opts.get("h")
    return SamplePath.from_csv(data, h=float(h) if h is not None else None)


def _split(value, what: str) -> list[str]:
    """Name list from a comma-separated flag or a config-file array."""
    if isinstance(value, (list, tuple)):
        items = [str(v).strip() for v in value if str(v).strip()]
    else:
        items = [s.strip() for s in str(value).split(",") if s.strip()]
    if not items:
        raise UsageError(f"empty {what} list")
    return items


def _cmd_simulate(opts: dict) -> Optional[dict]:
    noise = case_noise(opts["case"])
    h = float(opts["h"])
    n = _steps(opts, "simulate")
    model = TrueModel(drift=true_drift, scale=true_scale, x0=float(opts["x0"]))
    stream = RngStream(int(opts["seed"]), int(opts["stream"]))
    path = euler_path(model, noise, n, h, stream, refine=int(opts["refine"]))
    config = {
        "command": "simulate",
        "noise": spec_to_config(noise),
        "truth": "Scale2*Drift2",
        **{k: opts[k] for k in ("case", "x0", "seed", "stream", "refine")},
        "h": h,
        "n": n,
    }
    out = opts.get("out")
    if out in (None, "-"):
        path.to_csv(sys.stdout, config)
    else:
        path.to_csv(out, config)
    return None


def _cmd_fit(opts: dict) -> dict:
    path = _load_path(opts, "fit")
    scale = registry(_require(opts, "scale", "fit"))
    drift_name = opts.get("drift")
    if drift_name in ("", "none"):
        drift_name = None
    config = {
        "command": "fit",
        "data": opts["data"],
        "h": path.h,
        "scale": scale.name,
        "drift": drift_name,
        "level": float(opts["level"]),
    }
    if drift_name is None:
        fit = scale_stage(path, scale)
        return {"config": config, "fit": fit.to_json()}
    drift = registry(drift_name)
    fit = fit_model(path, CandidateModel(f"{scale.name}*{drift.name}", scale, drift))
    ci = confidence_interval(fit, path.meta, level=float(opts["level"]))
    return {"config": config, "fit": fit.to_json(), "confidence": ci.to_json()}


def _cmd_criteria(opts: dict) -> dict:
    path = _load_path(opts, "criteria")
    scale = registry(_require(opts, "scale", "criteria"))
    drift_name = opts.get("drift")
    if drift_name in ("", "none"):
        drift_name = None
    kappa = float(opts["kappa"])
    config = {
        "command": "criteria",
        "data": opts["data"],
        "h": path.h,
        "scale": scale.name,
        "drift": drift_name,
        "kappa": kappa,
    }
    if drift_name is None:
        fit = scale_stage(path, scale)
    else:
        drift = registry(drift_name)
        fit = fit_model(path, CandidateModel(f"{scale.name}*{drift.name}", scale, drift))
    scale_values = {}
    for kind in ScaleCriterion:
        try:
            value, detail = scale_criterion_detail(fit, kind, path.meta, kappa)
            entry = {"value": value}
            if kind is ScaleCriterion.GQAIC1_TRUNC:
                entry["truncation_fired"] = detail["truncation_fired"]
        except LevyselError as exc:
            entry = {"error": f"{type(exc).__name__}: {exc}"}
        scale_values[kind.value] = entry
    payload = {
        "config": config,
        "fit": fit.to_json(),
        "scale_criteria": scale_values,
    }
    if drift_name is not None:
        payload["drift_criteria"] = {
            kind.value: {"value": drift_criterion(fit, kind, path.meta)}
            for kind in DriftCriterion
        }
    return payload


def _cmd_select(opts: dict) -> dict:
    path = _load_path(opts, "select")
    scales = resolve_candidates(_split(opts["scales"], "scale"))
    drifts = resolve_candidates(_split(opts["drifts"], "drift"))
    labels = _split(opts["criteria"], "criteria")
    unknown = [c for c in labels if c not in CRITERION_PAIRS]
    if unknown:
        raise UsageError(
            f"unknown criterion labels {unknown}; available: {sorted(CRITERION_PAIRS)}"
        )
    kappa = float(opts["kappa"])
    pairs = {label: CRITERION_PAIRS[label] for label in labels}
    outcomes = stepwise_select_multi(
        path, scales, drifts, list(pairs.values()), trunc_kappa=kappa
    )
    config = {
        "command": "select",
        "data": opts["data"],
        "h": path.h,
        "scales": [c.name for c in scales],
        "drifts": [c.name for c in drifts],
        "criteria": labels,
        "kappa": kappa,
    }
    return {
        "config": config,
        "selections": {label: outcomes[pair].to_json() for label, pair in pairs.items()},
    }


def _grid_from(opts: dict) -> tuple:
    if opts.get("h") is not None and opts.get("t") is not None:
        return ((float(opts["h"]), float(opts["t"])),)
    if opts.get("grid"):
        grid = opts["grid"]
        try:
            return tuple((float(h), float(t)) for h, t in grid)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"grid must be a list of [h, t_n] pairs: {exc}") from exc
    raise UsageError("mc needs --h and --t, or a grid in the config file")


def _cmd_mc(opts: dict) -> dict:
    labels = tuple(_split(opts["criteria"], "criteria"))
    threads = opts.get("threads")
    if threads is None:
        threads = int(os.environ.get("LEVYSEL_THREADS", "1"))
    cfg = benchmark_experiment(
        case=opts["case"],
        grid=_grid_from(opts),
        replications=int(opts["reps"]),
        criteria=labels,
        base_seed=int(opts["seed"]),
        refine=int(opts["refine"]),
        threads=int(threads),
        trunc_kappa=float(opts["kappa"]),
    )
    table = run_experiment(cfg)
    payload = table.to_json()
    if opts.get("compare"):
        if opts["case"] not in REFERENCE_CASES:
            raise UsageError(f"no reference counts for case {opts['case']!r}")
        comparisons = []
        for blk in table.blocks:
            on_grid = any(
                abs(blk.h - gh) < 1e-12 and abs(blk.t_n - gt) < 1e-9
                for gh, gt in REFERENCE_GRIDS
            )
            if not on_grid:
                continue
            for label in labels:
                if label not in REFERENCE_CRITERIA:
                    continue
                ref = benchmark_reference(opts["case"], label, blk.h, blk.t_n)
                comp = compare_to_reference(blk, label, ref)
                comparisons.append(
                    {
                        "h": blk.h,
                        "t_n": blk.t_n,
                        "criterion": label,
                        "max_abs_z": float(abs(comp.z_scores).max()),
                        "flagged": [list(c) for c in comp.flagged],
                        "ok": comp.ok,
                    }
                )
        payload["comparisons"] = comparisons
    out = opts.get("out")
    if out and out != "-":
        files = table.to_csv(out)
        payload["files"] = [str(f) for f in files]
        opts["out"] = None  # --out was the CSV stem; the JSON summary goes to stdout
    return payload


def _cmd_limit_prob(opts: dict) -> dict:
    kind = _require(opts, "kind", "limit-prob")
    if kind not in ("scale", "drift"):
        raise UsageError(f"--kind must be scale or drift, got {kind!r}")
    small = _require(opts, "small", "limit-prob")
    large = _require(opts, "large", "limit-prob")
    nmap = builtin_nesting(small, large)
    noise = case_noise(opts["case"])
    h = float(opts["h"])
    n = grid_steps(h, float(opts["t"]))
    seed = int(opts["seed"])
    model = TrueModel(drift=true_drift, scale=true_scale, x0=0.0)
    path = euler_path(model, noise, n, h, RngStream(seed, 0), refine=int(opts["refine"]))
    if kind == "scale":
        inputs = long_run_scale_inputs(path, registry(large))
    else:
        pair = CandidateModel(f"{opts['scale']}*{large}", registry(opts["scale"]), registry(large))
        inputs = long_run_drift_inputs(path, pair)
    tail = asymptotic_selection_prob(kind, inputs, nmap, RngStream(seed, 1), int(opts["n_mc"]))
    config = {
        "command": "limit-prob",
        "kind": kind,
        "small": small,
        "large": large,
        "noise": spec_to_config(noise),
        **{k: opts[k] for k in ("case", "h", "t", "seed", "n_mc", "refine")},
    }
    if kind == "drift":
        config["scale"] = opts["scale"]
    return {"config": config, "result": tail.to_json()}


_HANDLERS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "criteria": _cmd_criteria,
    "select": _cmd_select,
    "mc": _cmd_mc,
    "limit-prob": _cmd_limit_prob,
}


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="levysel",
        description="Two-stage quasi-likelihood estimation and model selection "
        "for ergodic SDEs driven by standardized Levy noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--config", help="TOML or JSON file with defaults for any option")
        p.add_argument("--out", help="output file ('-' for stdout)")
        return p

    p = add("simulate", "simulate the benchmark model and write a time,value CSV")
    p.add_argument("--case", help="noise case: i, ii, iii, or gaussian")
    p.add_argument("--h", type=float, help="sampling step")
    p.add_argument("--t", type=float, help="horizon t_n (n = t/h observations)")
    p.add_argument("--n", type=int, help="number of observations (alternative to --t)")
    p.add_argument("--x0", type=float, help="starting state")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--stream", type=int, help="stream id under the seed")
    p.add_argument("--refine", type=int, help="fine simulation steps per observation")

    p = add("fit", "two-stage fit of one scale/drift candidate pair")
    p.add_argument("--data", help="path CSV (time,value)")
    p.add_argument("--h", type=float, help="sampling step override")
    p.add_argument("--scale", help="scale candidate name")
    p.add_argument("--drift", help="drift candidate name, or 'none' for stage one only")
    p.add_argument("--level", type=float, help="confidence level for the intervals")

    p = add("criteria", "every criterion value for one candidate pair")
    p.add_argument("--data", help="path CSV (time,value)")
    p.add_argument("--h", type=float, help="sampling step override")
    p.add_argument("--scale", help="scale candidate name")
    p.add_argument("--drift", help="drift candidate name, or 'none' for stage one only")
    p.add_argument("--kappa", type=float, help="eigenvalue truncation exponent")

    p = add("select", "stepwise selection over candidate banks")
    p.add_argument("--data", help="path CSV (time,value)")
    p.add_argument("--h", type=float, help="sampling step override")
    p.add_argument("--scales", help="comma-separated scale candidates")
    p.add_argument("--drifts", help="comma-separated drift candidates")
    p.add_argument("--criteria", help=f"comma-separated labels from {sorted(CRITERION_PAIRS)}")
    p.add_argument("--kappa", type=float, help="eigenvalue truncation exponent")

    p = add("mc", "selection-frequency experiment over replications")
    p.add_argument("--case", help="noise case: i, ii, iii, or gaussian")
    p.add_argument("--h", type=float, help="sampling step")
    p.add_argument("--t", type=float, help="horizon t_n")
    p.add_argument("--reps", type=int, help="replications per grid point")
    p.add_argument("--criteria", help="comma-separated criterion labels")
    p.add_argument("--seed", type=int, help="base seed (replication r uses stream seed^r)")
    p.add_argument("--refine", type=int, help="fine simulation steps per observation")
    p.add_argument("--threads", type=int, help="worker processes (or env LEVYSEL_THREADS)")
    p.add_argument("--kappa", type=float, help="eigenvalue truncation exponent")
    p.add_argument(
        "--compare",
        action="store_const",
        const=True,
        help="compare counts against the bundled reference tables",
    )

    p = add("limit-prob", "asymptotic overfit probability for a nested pair")
    p.add_argument("--kind", help="scale or drift")
    p.add_argument("--small", help="smaller candidate name")
    p.add_argument("--large", help="larger candidate name")
    p.add_argument("--scale", help="scale held fixed when kind=drift")
    p.add_argument("--case", help="noise case for the long calibration path")
    p.add_argument("--h", type=float, help="calibration path step")
    p.add_argument("--t", type=float, help="calibration path horizon")
    p.add_argument("--seed", type=int, help="seed for path and tail sampling")
    p.add_argument("--n-mc", dest="n_mc", type=int, help="tail-probability sample size")
    p.add_argument("--refine", type=int, help="fine simulation steps per observation")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        opts = _resolve(args)
        payload = _HANDLERS[args.command](opts)
        if payload is not None:
            _write_json(payload, opts.get("out"))
    except LevyselError as exc:
        print(
            json.dumps(
                {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
            ),
            file=sys.stderr,
        )
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
