"""Monte Carlo selection-frequency experiments over a sampling grid.

One experiment simulates many independent paths from a known model, runs
stepwise selection on each under one or more criterion pairs, and tabulates
how often every (drift, scale) candidate combination wins. Replication r
draws from an independent, reproducible stream derived from the base seed,
so results are identical for any thread count and any subset of the grid.

Criterion pairs are addressed by short labels (``gqbic``, ``gqaic``, ...);
each label fixes one scale-stage criterion and one drift-stage criterion.
Within a replication all pairs share the stage-one fits and reuse stage-two
fits per chosen scale, so adding labels is nearly free.
"""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .criteria import DEFAULT_TRUNC_KAPPA, DriftCriterion, ScaleCriterion
from .errors import LevyselError, UsageError
from .fit import DEFAULT_OPT, OptConfig
from .models import Coefficient
from .noise import LevySpec, spec_to_config
from .presets import TRUE_MODEL, case_noise, default_candidates
from .reference import ReferenceTable
from .rng import replication_stream
from .sde import TrueModel, euler_path
from .selection import stepwise_select, stepwise_select_multi

CRITERION_PAIRS: dict[str, tuple[ScaleCriterion, DriftCriterion]] = {
    "faic": (ScaleCriterion.FAIC1, DriftCriterion.FAIC2),
    "gqaic": (ScaleCriterion.GQAIC1, DriftCriterion.GQAIC2),
    "gqaic-scalar": (ScaleCriterion.GQAIC1_SCALAR, DriftCriterion.GQAIC2),
    "gqaic-trunc": (ScaleCriterion.GQAIC1_TRUNC, DriftCriterion.GQAIC2),
    "gqaic-mod": (ScaleCriterion.GQAIC1_MOD, DriftCriterion.GQAIC2),
    "gqbic": (ScaleCriterion.GQBIC1, DriftCriterion.GQBIC2),
    "gqbic-sharp": (ScaleCriterion.GQBIC1_SHARP, DriftCriterion.GQBIC2),
}

# nh^2 above this makes the small-h asymptotics of the criteria dubious.
NH2_WARN = 0.5


def grid_steps(h: float, t_n: float) -> int:
    """Number of observation intervals for horizon t_n at spacing h."""
    if h <= 0 or t_n <= 0:
        raise UsageError(f"need h > 0 and t_n > 0, got ({h}, {t_n})")
    steps = t_n / h
    if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
        raise UsageError(f"t_n={t_n} is not a whole number of steps of h={h}")
    return int(round(steps))


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved description of one selection-frequency experiment.

    ``grid`` holds (h, t_n) pairs; each is run with n = t_n / h observations.
    With ``threads`` > 1 replications are distributed over worker processes,
    which requires the truth's coefficient functions to be picklable (the
    built-in presets are).
    """

    noise: LevySpec
    truth: TrueModel
    scales: tuple[Coefficient, ...]
    drifts: tuple[Coefficient, ...]
    grid: tuple[tuple[float, float], ...]
    replications: int = 100
    criteria: tuple[str, ...] = ("gqaic", "gqbic")
    base_seed: int = 0
    refine: int = 10
    threads: int = 1
    opt: OptConfig = DEFAULT_OPT
    trunc_kappa: float = DEFAULT_TRUNC_KAPPA
    truth_label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(self.scales))
        object.__setattr__(self, "drifts", tuple(self.drifts))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        grid = tuple((float(h), float(t)) for h, t in self.grid)
        object.__setattr__(self, "grid", grid)
        if not self.scales or not self.drifts:
            raise UsageError("need at least one scale and one drift candidate")
        if not grid:
            raise UsageError("grid must contain at least one (h, t_n) pair")
        for h, t in grid:
            if h <= 0 or t <= 0:
                raise UsageError(f"grid entries need h > 0 and t_n > 0, got ({h}, {t})")
            grid_steps(h, t)
        if self.replications < 1:
            raise UsageError(f"replications must be >= 1, got {self.replications}")
        if not self.criteria:
            raise UsageError("need at least one criterion label")
        unknown = [c for c in self.criteria if c not in CRITERION_PAIRS]
        if unknown:
            raise UsageError(
                f"unknown criterion labels {unknown}; available: {sorted(CRITERION_PAIRS)}"
            )
        if len(set(self.criteria)) != len(self.criteria):
            raise UsageError(f"duplicate criterion labels in {self.criteria}")
        if self.refine < 1:
            raise UsageError(f"refine must be >= 1, got {self.refine}")
        if self.threads < 1:
            raise UsageError(f"threads must be >= 1, got {self.threads}")

    def metadata(self) -> dict:
        """JSON-able record of everything that determines the results."""
        boxes = {c.name: c.box.tolist() for c in (*self.scales, *self.drifts)}
        return {
            "noise": spec_to_config(self.noise),
            "truth": self.truth_label or "custom",
            "x0": self.truth.x0,
            "scales": [c.name for c in self.scales],
            "drifts": [c.name for c in self.drifts],
            "boxes": boxes,
            "grid": [list(g) for g in self.grid],
            "replications": self.replications,
            "criteria": list(self.criteria),
            "base_seed": self.base_seed,
            "refine": self.refine,
            "threads": self.threads,
            "trunc_kappa": self.trunc_kappa,
        }


def benchmark_experiment(
    case: str = "i",
    grid: Sequence[tuple[float, float]] = ((0.01, 50.0),),
    replications: int = 100,
    criteria: Sequence[str] = ("gqaic", "gqbic"),
    base_seed: int = 0,
    **kwargs,
) -> ExperimentConfig:
    """Config for the standard benchmark: true model Scale2*Drift2, full banks."""
    scales, drifts = default_candidates()
    return ExperimentConfig(
        noise=case_noise(case),
        truth=TRUE_MODEL,
        scales=tuple(scales),
        drifts=tuple(drifts),
        grid=tuple(grid),
        replications=replications,
        criteria=tuple(criteria),
        base_seed=base_seed,
        truth_label=f"case {case}: Scale2*Drift2",
        **kwargs,
    )


@dataclass
class GridBlock:
    """Tabulated selections for one (h, t_n) grid point.

    ``counts[label][d, s]`` counts replications in which drift candidate d and
    scale candidate s (0-based positions in the config's banks) won under the
    criterion pair ``label``. ``failed`` counts replications that produced no
    selection; ``truncated`` counts those where the eigenvalue truncation fired
    for at least one scale candidate.
    """

    h: float
    t_n: float
    n: int
    replications: int
    counts: dict[str, np.ndarray]
    failed: dict[str, int]
    truncated: dict[str, int]

    def frequency(self, label: str) -> np.ndarray:
        """Selection frequencies among this block's successful replications."""
        c = self.counts[label]
        total = int(c.sum())
        if total == 0:
            raise UsageError(f"no successful replications for {label!r}")
        return c / total

    def to_json(self) -> dict:
        return {
            "h": self.h,
            "t_n": self.t_n,
            "n": self.n,
            "replications": self.replications,
            "counts": {k: v.tolist() for k, v in self.counts.items()},
            "failed": dict(self.failed),
            "truncated": dict(self.truncated),
        }


@dataclass
class FrequencyTable:
    """All grid blocks of one experiment plus the config that produced them."""

    config: dict
    blocks: list[GridBlock]

    def block(self, h: float, t_n: float) -> GridBlock:
        for b in self.blocks:
            if abs(b.h - h) < 1e-12 and abs(b.t_n - t_n) < 1e-9:
                return b
        raise UsageError(f"no block for (h={h}, t_n={t_n}) in this table")

    def to_json(self) -> dict:
        return {"config": self.config, "blocks": [b.to_json() for b in self.blocks]}

    def to_csv(self, target: Union[str, Path]) -> list[Path]:
        """Write one CSV per grid block; returns the paths written.

        A single-block table goes to ``target`` itself; with several blocks
        each file gets a ``_T{t_n}_h{h}`` stem suffix. Rows are
        (criterion, scale_idx, drift_idx, count) with 1-based candidate
        indices; the (0, 0) row holds the block's failed-replication count.
        """
        target = Path(target)
        written = []
        for blk in self.blocks:
            if len(self.blocks) == 1:
                out = target
            else:
                out = target.with_name(f"{target.stem}_T{blk.t_n:g}_h{blk.h:g}{target.suffix}")
            lines = [f"# config: {json.dumps(self.config, sort_keys=True)}"]
            lines.append(
                f"# h={blk.h:g} t_n={blk.t_n:g} n={blk.n} replications={blk.replications}"
            )
            lines.append("criterion,scale_idx,drift_idx,count")
            for label in self.config["criteria"]:
                counts = blk.counts[label]
                for d in range(counts.shape[0]):
                    for s in range(counts.shape[1]):
                        lines.append(f"{label},{s + 1},{d + 1},{counts[d, s]}")
                lines.append(f"{label},0,0,{blk.failed[label]}")
            out.write_text("\n".join(lines) + "\n")
            written.append(out)
        return written


def _replicate(args: tuple[ExperimentConfig, float, float, int, int]) -> dict:
    """One replication; returns label -> (drift_idx, scale_idx, truncated) or None."""
    cfg, h, t_n, n, r = args
    stream = replication_stream(cfg.base_seed, r)
    labels = list(cfg.criteria)
    try:
        path = euler_path(cfg.truth, cfg.noise, n, h, stream, refine=cfg.refine)
    except LevyselError:
        return {label: None for label in labels}
    pairs = {label: CRITERION_PAIRS[label] for label in labels}
    out = {}
    try:
        outcomes = stepwise_select_multi(
            path, cfg.scales, cfg.drifts, list(pairs.values()), cfg.opt, cfg.trunc_kappa
        )
        for label, pair in pairs.items():
            oc = outcomes[pair]
            fired = any(f.get("truncation_fired", False) for f in oc.scale_flags)
            out[label] = (oc.chosen_drift, oc.chosen_scale, fired)
    except LevyselError:
        # Shared fits failed for some pair; rerun pairs in isolation so one
        # criterion's breakdown does not fail the others.
        for label, (s_kind, d_kind) in pairs.items():
            try:
                oc = stepwise_select(
                    path, cfg.scales, cfg.drifts, s_kind, d_kind, cfg.opt, cfg.trunc_kappa
                )
                fired = any(f.get("truncation_fired", False) for f in oc.scale_flags)
                out[label] = (oc.chosen_drift, oc.chosen_scale, fired)
            except LevyselError:
                out[label] = None
    return out


def run_experiment(cfg: ExperimentConfig) -> FrequencyTable:
    """Run every replication on every grid point and tabulate the selections."""
    blocks = []
    for h, t_n in cfg.grid:
        n = grid_steps(h, t_n)
        if n * h * h > NH2_WARN:  # strict: the reference designs sit exactly at 0.5
            warnings.warn(
                f"n h^2 = {n * h * h:g} at (h={h}, t_n={t_n}); the criteria assume "
                "n h^2 -> 0, take these frequencies with caution",
                stacklevel=2,
            )
        shape = (len(cfg.drifts), len(cfg.scales))
        counts = {label: np.zeros(shape, dtype=int) for label in cfg.criteria}
        failed = {label: 0 for label in cfg.criteria}
        truncated = {label: 0 for label in cfg.criteria}
        tasks = [(cfg, h, t_n, n, r) for r in range(cfg.replications)]
        if cfg.threads > 1:
            chunk = max(1, cfg.replications // (4 * cfg.threads))
            with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
                results = list(pool.map(_replicate, tasks, chunksize=chunk))
        else:
            results = map(_replicate, tasks)
        for rep_out in results:
            for label in cfg.criteria:
                cell = rep_out[label]
                if cell is None:
                    failed[label] += 1
                else:
                    d_idx, s_idx, fired = cell
                    counts[label][d_idx, s_idx] += 1
                    truncated[label] += bool(fired)
        blocks.append(
            GridBlock(
                h=h,
                t_n=t_n,
                n=n,
                replications=cfg.replications,
                counts=counts,
                failed=failed,
                truncated=truncated,
            )
        )
    return FrequencyTable(config=cfg.metadata(), blocks=blocks)


@dataclass(frozen=True)
class ReferenceComparison:
    """Cell-wise agreement between an experiment block and reference counts."""

    z_scores: np.ndarray
    flagged: tuple[tuple[int, int], ...]  # 1-based (drift, scale) cells
    tolerance: float

    @property
    def ok(self) -> bool:
        return not self.flagged

    def to_json(self) -> dict:
        return {
            "z_scores": self.z_scores.tolist(),
            "flagged": [list(c) for c in self.flagged],
            "tolerance": self.tolerance,
            "ok": self.ok,
        }


def compare_to_reference(
    block: GridBlock, label: str, reference: ReferenceTable, tolerance: float = 3.0
) -> ReferenceComparison:
    """Two-sample frequency comparison against the bundled reference counts.

    Each cell's difference in selection frequency is scaled by the pooled
    binomial standard error sqrt(pbar (1 - pbar) (1/n1 + 1/n2)); cells beyond
    ``tolerance`` standard errors are flagged. Cells empty on both sides get
    a z-score of zero.
    """
    if tolerance <= 0:
        raise UsageError(f"tolerance must be positive, got {tolerance}")
    if label not in block.counts:
        raise UsageError(f"block has no counts for {label!r}")
    ours = block.counts[label]
    theirs = reference.counts
    if ours.shape != theirs.shape:
        raise UsageError(
            f"candidate banks differ: block is {ours.shape}, reference {theirs.shape}"
        )
    n1 = int(ours.sum())
    n2 = int(theirs.sum())
    if n1 == 0:
        raise UsageError(f"no successful replications for {label!r}")
    p1 = ours / n1
    p2 = theirs / n2
    pbar = (ours + theirs) / (n1 + n2)
    se = np.sqrt(pbar * (1.0 - pbar) * (1.0 / n1 + 1.0 / n2))
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(se > 0, (p1 - p2) / se, 0.0)
    flagged = tuple(
        (d + 1, s + 1)
        for d in range(z.shape[0])
        for s in range(z.shape[1])
        if abs(z[d, s]) > tolerance
    )
    return ReferenceComparison(z_scores=z, flagged=flagged, tolerance=tolerance)
