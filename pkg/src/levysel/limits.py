"""Asymptotic law of AIC-type overfitting between nested candidates.

When a smaller candidate sits inside a larger one through an affine embedding
theta_small -> F theta_small + c with orthonormal F, twice the stage-likelihood gap
between the two fitted models converges to a weighted chi-square: the weights are
the eigenvalues of W^{1/2} G W^{1/2} with G = Gamma^-1 - F (F' Gamma F)^-1 F',
where Gamma and W are the larger model's limit information and noise matrices. The
larger model is preferred by an AIC-type criterion exactly when that quadratic form
exceeds the penalty difference, so the asymptotic overfit probability is a weighted
chi-square tail evaluated by Monte Carlo.

Scale stage: Gamma and W are the scale-information and fourth-moment matrices and
the threshold is 2 [tr(Gamma_L^-1 W_L) - tr(Gamma_S^-1 W_S)], with the small-model
matrices induced by the embedding (F' Gamma F, F' W F) unless supplied. Drift
stage: W coincides with Gamma, making the form a rank-(p_L - p_S) projection, and
the threshold is 2 (p_L - p_S); under correct specification the tail is
P(chi^2_{p_L - p_S} > 2 (p_L - p_S)).

Gamma and W here are population limits. Obtain them from long-run empirical
averages on one very long simulated path (helpers below) or supply them directly;
nothing in this module knows a stationary density in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import fit as fitmod
from .errors import NumericalError, UsageError
from .fit import OptConfig
from .models import CandidateModel, Coefficient
from .rng import RngStream
from .sde import SamplePath

EIG_CLAMP = 1e-10
ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class NestingMap:
    """Affine embedding of the smaller parameter into the larger: F theta + c."""

    f: np.ndarray  # (p_large, p_small), orthonormal columns
    c: np.ndarray  # (p_large,)

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.f, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if f.shape[0] < f.shape[1]:
            raise ValueError(f"embedding must not shrink: F has shape {f.shape}")
        if c.shape != (f.shape[0],):
            raise ValueError(f"offset shape {c.shape} does not match F rows {f.shape[0]}")
        gap = np.abs(f.T @ f - np.eye(f.shape[1])).max()
        if gap > ORTHO_TOL:
            raise ValueError(f"F columns are not orthonormal (max deviation {gap:.2e})")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "c", c)

    @property
    def p_large(self) -> int:
        return self.f.shape[0]

    @property
    def p_small(self) -> int:
        return self.f.shape[1]


@dataclass(frozen=True)
class LimitInputs:
    """Large-model limit matrices (and optional threshold override)."""

    gamma: np.ndarray
    w: Optional[np.ndarray] = None
    threshold: Optional[float] = None

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.gamma, dtype=float))
        if g.shape[0] != g.shape[1]:
            raise ValueError(f"gamma must be square, got {g.shape}")
        object.__setattr__(self, "gamma", g)
        if self.w is not None:
            w = np.atleast_2d(np.asarray(self.w, dtype=float))
            if w.shape != g.shape:
                raise ValueError(f"w shape {w.shape} does not match gamma {g.shape}")
            object.__setattr__(self, "w", w)


def _sym_sqrt(m: np.ndarray, name: str) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    scale = max(1.0, float(np.abs(vals).max()))
    if vals.min() < -EIG_CLAMP * scale:
        raise NumericalError(f"{name} is not positive semidefinite (lambda_min {vals.min():.3e})")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def nesting_eigenvalues(inputs: LimitInputs, nmap: NestingMap) -> np.ndarray:
    """Eigenvalues of W^{1/2} (Gamma^-1 - F (F'Gamma F)^-1 F') W^{1/2}, descending."""
    gamma, w = inputs.gamma, inputs.w
    if w is None:
        w = gamma
    p = gamma.shape[0]
    if nmap.p_large != p:
        raise UsageError(f"embedding rows {nmap.p_large} do not match matrix size {p}")
    f = nmap.f
    g = np.linalg.inv(gamma) - f @ np.linalg.solve(f.T @ gamma @ f, f.T)
    g = 0.5 * (g + g.T)
    w_half = _sym_sqrt(w, "W")
    m = w_half @ g @ w_half
    vals = np.linalg.eigvalsh(0.5 * (m + m.T))
    scale = max(1.0, float(np.abs(vals).max()))
    if vals.min() < -EIG_CLAMP * scale:
        raise NumericalError(
            f"nesting form has a genuinely negative eigenvalue ({vals.min():.3e}); "
            "check that gamma/w belong to the larger model and F embeds the smaller"
        )
    return np.sort(np.clip(vals, 0.0, None))[::-1]


@dataclass
class TailProbability:
    prob: float
    mc_se: float
    lambdas: np.ndarray
    threshold: float
    n_mc: int

    def to_json(self) -> dict:
        return {
            "prob": self.prob,
            "mc_se": self.mc_se,
            "lambdas": self.lambdas.tolist(),
            "threshold": self.threshold,
            "n_mc": self.n_mc,
        }


def weighted_chisq_tail(
    lambdas: Sequence[float],
    threshold: float,
    stream: RngStream,
    n_mc: int = 1_000_000,
) -> TailProbability:
    """P(sum lambda_i Z_i^2 > threshold) by Monte Carlo over standard normals."""
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if n_mc < 10_000:
        raise UsageError(f"need n_mc >= 10000 for a usable tail estimate, got {n_mc}")
    if (lam < -EIG_CLAMP).any():
        raise NumericalError(f"negative weight {lam.min():.3e} in chi-square mixture")
    lam = np.clip(lam, 0.0, None)
    if threshold <= 0.0:
        return TailProbability(1.0, 0.0, lam, float(threshold), n_mc)
    if not lam.any():
        return TailProbability(0.0, 0.0, lam, float(threshold), n_mc)
    rng = stream.generator()
    hits = 0
    chunk = max(1, min(n_mc, 2_000_000 // max(1, lam.size)))
    done = 0
    while done < n_mc:
        k = min(chunk, n_mc - done)
        z = rng.standard_normal((k, lam.size))
        hits += int(((z * z) @ lam > threshold).sum())
        done += k
    p = hits / n_mc
    return TailProbability(
        prob=p,
        mc_se=float(np.sqrt(p * (1.0 - p) / n_mc)),
        lambdas=lam,
        threshold=float(threshold),
        n_mc=n_mc,
    )


def asymptotic_selection_prob(
    kind: str,
    inputs: LimitInputs,
    nmap: NestingMap,
    stream: RngStream,
    n_mc: int = 1_000_000,
) -> TailProbability:
    """Asymptotic probability that an AIC-type criterion prefers the larger of two
    nested candidates.

    kind="scale" uses (gamma, w) and the trace-difference threshold; kind="drift"
    uses gamma in both roles and threshold 2 (p_large - p_small). An explicit
    inputs.threshold overrides either.
    """
    if kind not in ("scale", "drift"):
        raise UsageError(f"kind must be 'scale' or 'drift', got {kind!r}")
    if kind == "drift":
        eff = LimitInputs(gamma=inputs.gamma, w=inputs.gamma)
        threshold = 2.0 * (nmap.p_large - nmap.p_small)
    else:
        if inputs.w is None:
            raise UsageError("scale kind needs the fourth-moment matrix w")
        eff = inputs
        gamma, w, f = inputs.gamma, inputs.w, nmap.f
        tr_large = float(np.trace(np.linalg.solve(gamma, w)))
        tr_small = float(np.trace(np.linalg.solve(f.T @ gamma @ f, f.T @ w @ f)))
        threshold = 2.0 * (tr_large - tr_small)
    if inputs.threshold is not None:
        threshold = float(inputs.threshold)
    lam = nesting_eigenvalues(eff, nmap)
    return weighted_chisq_tail(lam, threshold, stream, n_mc)


# --- long-run inputs ---------------------------------------------------------------


def long_run_scale_inputs(
    path: SamplePath, scale: Coefficient, cfg: OptConfig = fitmod.DEFAULT_OPT
) -> LimitInputs:
    """Gamma and W for a scale family from one long path, stage-one conventions."""
    stage = fitmod.scale_stage(path, scale, cfg)
    return LimitInputs(gamma=stage.gamma_gamma_hat, w=stage.w_gamma_hat)


def long_run_drift_inputs(
    path: SamplePath, model: CandidateModel, cfg: OptConfig = fitmod.DEFAULT_OPT
) -> LimitInputs:
    """Gamma for a drift family from one long path (its own W equals Gamma)."""
    full = fitmod.fit_model(path, model, cfg)
    return LimitInputs(gamma=full.gamma_alpha_hat, w=full.gamma_alpha_hat)


# --- built-in nestings ---------------------------------------------------------------

_IS2 = 2.0**-0.5

# Orthonormal bases of the parameter subspaces along which one built-in family
# sits inside another. Scale1's constant embeds in Scale3/Scale4 along the
# diagonal (gamma, gamma) since (g + g x^2)/(1 + x^2) is constant.
_NESTINGS = {
    ("Scale1", "Scale3"): [[_IS2], [_IS2]],
    ("Scale1", "Scale4"): [[_IS2], [0.0], [_IS2]],
    ("Scale2", "Scale3"): [[1.0], [0.0]],
    ("Scale2", "Scale4"): [[1.0], [0.0], [0.0]],
    ("Scale3", "Scale4"): [[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]],
    ("Drift1", "Drift3"): [[0.0], [1.0]],
    ("Drift2", "Drift3"): [[1.0], [0.0]],
}


def builtin_nesting(small: str, large: str) -> NestingMap:
    """Embedding for the built-in nested candidate pairs (offset always zero)."""
    try:
        f = np.array(_NESTINGS[(small, large)], dtype=float)
    except KeyError:
        known = ", ".join(f"{s} in {l}" for s, l in sorted(_NESTINGS))
        raise UsageError(
            f"no built-in nesting of {small!r} inside {large!r}; known: {known}"
        ) from None
    return NestingMap(f=f, c=np.zeros(f.shape[0]))
