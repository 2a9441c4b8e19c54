"""Stepwise model selection across candidate scale and drift families.

Stage one fits every scale candidate and picks the scale-criterion argmin; stage
two, conditional on the chosen scale's fitted parameter, fits every drift candidate
and picks the drift-criterion argmin. Exactly M1 + M2 criterion evaluations, never
the M1 * M2 full grid. A candidate whose fit or criterion fails contributes +inf
(with the reason recorded) instead of aborting the run; smallest index wins ties.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import fit as fitmod
from .criteria import (
    DEFAULT_TRUNC_KAPPA,
    DriftCriterion,
    ScaleCriterion,
    drift_criterion,
    scale_criterion_detail,
)
from .errors import LevyselError, NumericalError, UsageError
from .fit import FitResult, OptConfig
from .models import CandidateModel, Coefficient
from .sde import SamplePath


@dataclass
class SelectionOutcome:
    """Everything one stepwise pass produced."""

    scale_kind: ScaleCriterion
    drift_kind: DriftCriterion
    scale_labels: list[str]
    drift_labels: list[str]
    scale_values: np.ndarray
    drift_values: np.ndarray
    chosen_scale: int
    chosen_drift: int
    scale_fits: list[Optional[FitResult]]
    drift_fits: list[Optional[FitResult]]
    scale_flags: list[dict]
    drift_flags: list[dict]

    @property
    def n_evaluations(self) -> int:
        return len(self.scale_labels) + len(self.drift_labels)

    @property
    def chosen_labels(self) -> tuple[str, str]:
        return self.scale_labels[self.chosen_scale], self.drift_labels[self.chosen_drift]

    def to_json(self) -> dict:
        return {
            "scale_kind": self.scale_kind.value,
            "drift_kind": self.drift_kind.value,
            "scale_labels": self.scale_labels,
            "drift_labels": self.drift_labels,
            "scale_values": [float(v) for v in self.scale_values],
            "drift_values": [float(v) for v in self.drift_values],
            "chosen_scale": self.chosen_scale,
            "chosen_drift": self.chosen_drift,
            "chosen_labels": list(self.chosen_labels),
            "n_evaluations": self.n_evaluations,
            "scale_flags": self.scale_flags,
            "drift_flags": self.drift_flags,
            "scale_fits": [f.to_json() if f is not None else None for f in self.scale_fits],
            "drift_fits": [f.to_json() if f is not None else None for f in self.drift_fits],
        }


def _argmin(values: np.ndarray, what: str) -> int:
    if not np.isfinite(values).any():
        raise NumericalError(f"every {what} candidate failed; nothing to select")
    return int(np.argmin(values))  # first minimum: smallest index wins ties


def fit_scale_candidates(
    path: SamplePath, scales: Sequence[Coefficient], cfg: OptConfig = fitmod.DEFAULT_OPT
) -> tuple[list[Optional[FitResult]], list[dict]]:
    """Stage-one fits for every candidate; failures recorded, not raised."""
    fits, flags = [], []
    for scale in scales:
        try:
            fits.append(fitmod.scale_stage(path, scale, cfg))
            flags.append({})
        except LevyselError as exc:
            fits.append(None)
            flags.append({"failed": f"{type(exc).__name__}: {exc}"})
    return fits, flags


def _scale_values(fits, flags, kind, meta, trunc_kappa):
    values = np.full(len(fits), np.inf)
    for i, f in enumerate(fits):
        if f is None:
            continue
        try:
            values[i], detail = scale_criterion_detail(f, kind, meta, trunc_kappa)
            if detail.get("truncation_fired"):
                flags[i] = {**flags[i], "truncation_fired": True}
        except LevyselError as exc:
            flags[i] = {**flags[i], "failed": f"{type(exc).__name__}: {exc}"}
    return values


def select_scale(
    path: SamplePath,
    scales: Sequence[Coefficient],
    kind: ScaleCriterion,
    cfg: OptConfig = fitmod.DEFAULT_OPT,
    trunc_kappa: float = DEFAULT_TRUNC_KAPPA,
):
    """(chosen index, criterion values, fits, flags) for stage one."""
    if not scales:
        raise UsageError("need at least one scale candidate")
    fits, flags = fit_scale_candidates(path, scales, cfg)
    values = _scale_values(fits, flags, ScaleCriterion(kind), path.meta, trunc_kappa)
    return _argmin(values, "scale"), values, fits, flags


def fit_drift_candidates(
    path: SamplePath,
    drifts: Sequence[Coefficient],
    scale: Coefficient,
    scale_fit: FitResult,
    cfg: OptConfig = fitmod.DEFAULT_OPT,
) -> tuple[list[Optional[FitResult]], list[dict]]:
    """Stage-two fits under a fixed fitted scale."""
    fits, flags = [], []
    for drift in drifts:
        model = CandidateModel(f"{scale.name}*{drift.name}", scale, drift)
        try:
            df = fitmod.fit_drift(path, model, scale_fit.gamma_hat, cfg)
            fits.append(
                FitResult(
                    scale_name=scale_fit.scale_name,
                    gamma_hat=scale_fit.gamma_hat,
                    h1_value=scale_fit.h1_value,
                    gamma_gamma_hat=scale_fit.gamma_gamma_hat,
                    w_gamma_hat=scale_fit.w_gamma_hat,
                    nu2_hat=scale_fit.nu2_hat,
                    nu4_hat=scale_fit.nu4_hat,
                    converged={"scale": scale_fit.converged["scale"], "drift": df.converged},
                    boundary_hit={
                        "scale": scale_fit.boundary_hit["scale"],
                        "drift": df.boundary_hit,
                    },
                    drift_name=drift.name,
                    alpha_hat=df.theta,
                    h2_value=df.value,
                )
            )
            flags.append({})
        except LevyselError as exc:
            fits.append(None)
            flags.append({"failed": f"{type(exc).__name__}: {exc}"})
    return fits, flags


def select_drift(
    path: SamplePath,
    drifts: Sequence[Coefficient],
    scale: Coefficient,
    scale_fit: FitResult,
    kind: DriftCriterion,
    cfg: OptConfig = fitmod.DEFAULT_OPT,
):
    """(chosen index, criterion values, fits, flags) for stage two."""
    if not drifts:
        raise UsageError("need at least one drift candidate")
    kind = DriftCriterion(kind)
    fits, flags = fit_drift_candidates(path, drifts, scale, scale_fit, cfg)
    values = np.full(len(drifts), np.inf)
    for i, f in enumerate(fits):
        if f is None:
            continue
        try:
            values[i] = drift_criterion(f, kind, path.meta)
        except LevyselError as exc:
            flags[i] = {**flags[i], "failed": f"{type(exc).__name__}: {exc}"}
    return _argmin(values, "drift"), values, fits, flags


def stepwise_select(
    path: SamplePath,
    scales: Sequence[Coefficient],
    drifts: Sequence[Coefficient],
    scale_kind: ScaleCriterion,
    drift_kind: DriftCriterion,
    cfg: OptConfig = fitmod.DEFAULT_OPT,
    trunc_kappa: float = DEFAULT_TRUNC_KAPPA,
) -> SelectionOutcome:
    """One criterion pair, M1 + M2 evaluations."""
    out = stepwise_select_multi(
        path, scales, drifts, [(scale_kind, drift_kind)], cfg, trunc_kappa
    )
    return next(iter(out.values()))


def stepwise_select_multi(
    path: SamplePath,
    scales: Sequence[Coefficient],
    drifts: Sequence[Coefficient],
    pairs: Sequence[tuple[ScaleCriterion, DriftCriterion]],
    cfg: OptConfig = fitmod.DEFAULT_OPT,
    trunc_kappa: float = DEFAULT_TRUNC_KAPPA,
) -> dict[tuple[ScaleCriterion, DriftCriterion], SelectionOutcome]:
    """Stepwise selection for several criterion pairs off one set of fits.

    Scale fits are shared across pairs and drift fits are cached per chosen scale,
    so k pairs cost far less than k independent passes while each pair still sees
    exactly M1 + M2 criterion evaluations.
    """
    if not scales or not drifts:
        raise UsageError("need at least one scale and one drift candidate")
    pairs = [(ScaleCriterion(s), DriftCriterion(d)) for s, d in pairs]
    if not pairs:
        raise UsageError("need at least one criterion pair")
    meta = path.meta
    scale_fits, base_flags = fit_scale_candidates(path, scales, cfg)
    drift_cache: dict[int, tuple[list, list]] = {}
    outcomes = {}
    for s_kind, d_kind in pairs:
        flags = [dict(f) for f in base_flags]
        values = _scale_values(scale_fits, flags, s_kind, meta, trunc_kappa)
        i_scale = _argmin(values, "scale")
        if i_scale not in drift_cache:
            drift_cache[i_scale] = fit_drift_candidates(
                path, drifts, scales[i_scale], scale_fits[i_scale], cfg
            )
        d_fits, d_flags = drift_cache[i_scale]
        d_flags = [dict(f) for f in d_flags]
        d_values = np.full(len(drifts), np.inf)
        for i, f in enumerate(d_fits):
            if f is None:
                continue
            try:
                d_values[i] = drift_criterion(f, d_kind, meta)
            except LevyselError as exc:
                d_flags[i] = {**d_flags[i], "failed": f"{type(exc).__name__}: {exc}"}
        i_drift = _argmin(d_values, "drift")
        outcomes[(s_kind, d_kind)] = SelectionOutcome(
            scale_kind=s_kind,
            drift_kind=d_kind,
            scale_labels=[c.name for c in scales],
            drift_labels=[c.name for c in drifts],
            scale_values=values,
            drift_values=d_values,
            chosen_scale=i_scale,
            chosen_drift=i_drift,
            scale_fits=scale_fits,
            drift_fits=d_fits,
            scale_flags=flags,
            drift_flags=d_flags,
        )
    return outcomes
