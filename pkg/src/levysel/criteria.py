"""Information criteria for the two selection stages, plus free energies.

Scale stage (smaller is better; p = dim of the scale parameter):

    GQAIC1        -2 h1 + (2/h) tr(GammaGamma^-1 W_gamma)
    GQAIC1_SCALAR -2 h1 + (p/h) nu4_hat            (the univariate reduction)
    GQAIC1_TRUNC  GQAIC1 with GammaGamma^-1 zeroed when lambda_min < b_n,
                  b_n = T_n^{-(1-kappa)/2}
    GQAIC1_MOD    -2 h1 + p (nu4_hat/h - nu2_hat^2)  (diffusion-compatible: the
                  penalty tends to 2p under Wiener noise)
    GQBIC1        -2 h1 + (p/h) log T_n             (selection-consistent)
    GQBIC1_SHARP  -2 h1 + p log n                   (the naive count; overfits)
    FAIC1         -2 h1 + 2 p                       (flat AIC, for contrast)

Drift stage: GQAIC2 = FAIC2 = -2 h2 + 2 p, GQBIC2 = -2 h2 + p log T_n.

The free energies are negative normalized log marginal likelihoods over a stage's
parameter box. Their integrands concentrate on an O(1/sqrt(T_n)) neighborhood of
the stage maximizer, so the quadrature splits each axis into panels around it and
applies Gauss-Legendre per panel with log-sum-exp accumulation.
"""

from __future__ import annotations

import enum
import math
from typing import Callable, Optional

import numpy as np

from . import fit as fitmod
from . import gqlf
from .errors import NumericalError, QuadratureError, SingularMatrixError, UsageError
from .fit import FitResult, OptConfig
from .models import CandidateModel, Coefficient
from .sde import PathMeta, SamplePath

COND_MAX = 1e12
DEFAULT_TRUNC_KAPPA = 0.2


class ScaleCriterion(str, enum.Enum):
    GQAIC1 = "gqaic1"
    GQAIC1_SCALAR = "gqaic1_scalar"
    GQAIC1_TRUNC = "gqaic1_trunc"
    GQAIC1_MOD = "gqaic1_mod"
    GQBIC1 = "gqbic1"
    GQBIC1_SHARP = "gqbic1_sharp"
    FAIC1 = "faic1"


class DriftCriterion(str, enum.Enum):
    GQAIC2 = "gqaic2"
    GQBIC2 = "gqbic2"
    FAIC2 = "faic2"


def trunc_threshold(meta: PathMeta, kappa: float = DEFAULT_TRUNC_KAPPA) -> float:
    """b_n = T_n^{-(1-kappa)/2}."""
    if not (0.0 < kappa < 1.0):
        raise ValueError(f"kappa must be in (0, 1), got {kappa}")
    return meta.t_n ** (-(1.0 - kappa) / 2.0)


def _trace_term(fit: FitResult) -> float:
    gg = fit.gamma_gamma_hat
    if np.linalg.cond(gg) >= COND_MAX:
        raise SingularMatrixError(
            f"GammaGamma_hat of {fit.scale_name} is numerically singular; "
            "use the truncated variant (gqaic1_trunc)"
        )
    return float(np.trace(np.linalg.solve(gg, fit.w_gamma_hat)))


def scale_criterion_detail(
    fit: FitResult,
    kind: ScaleCriterion,
    meta: PathMeta,
    trunc_kappa: float = DEFAULT_TRUNC_KAPPA,
) -> tuple[float, dict]:
    """Criterion value plus flags (currently: whether truncation fired)."""
    kind = ScaleCriterion(kind)
    p = fit.p_gamma
    base = -2.0 * fit.h1_value
    flags = {"truncation_fired": False}
    if kind is ScaleCriterion.GQAIC1:
        value = base + (2.0 / meta.h) * _trace_term(fit)
    elif kind is ScaleCriterion.GQAIC1_SCALAR:
        value = base + (p / meta.h) * fit.nu4_hat
    elif kind is ScaleCriterion.GQAIC1_TRUNC:
        b_n = trunc_threshold(meta, trunc_kappa)
        lam_min = float(np.linalg.eigvalsh(fit.gamma_gamma_hat)[0])
        if lam_min < b_n:
            flags["truncation_fired"] = True
            value = base
        else:
            value = base + (2.0 / meta.h) * _trace_term(fit)
    elif kind is ScaleCriterion.GQAIC1_MOD:
        value = base + p * (fit.nu4_hat / meta.h - fit.nu2_hat**2)
    elif kind is ScaleCriterion.GQBIC1:
        value = base + (p / meta.h) * math.log(meta.t_n)
    elif kind is ScaleCriterion.GQBIC1_SHARP:
        value = base + p * math.log(meta.n)
    elif kind is ScaleCriterion.FAIC1:
        value = base + 2.0 * p
    else:  # pragma: no cover
        raise UsageError(f"unknown scale criterion {kind!r}")
    return float(value), flags


def scale_criterion(
    fit: FitResult,
    kind: ScaleCriterion,
    meta: PathMeta,
    trunc_kappa: float = DEFAULT_TRUNC_KAPPA,
) -> float:
    return scale_criterion_detail(fit, kind, meta, trunc_kappa)[0]


def drift_criterion(fit: FitResult, kind: DriftCriterion, meta: PathMeta) -> float:
    kind = DriftCriterion(kind)
    if fit.h2_value is None or fit.p_alpha is None:
        raise UsageError("drift criterion needs a fit with a drift stage")
    base = -2.0 * fit.h2_value
    if kind in (DriftCriterion.GQAIC2, DriftCriterion.FAIC2):
        return float(base + 2.0 * fit.p_alpha)
    if kind is DriftCriterion.GQBIC2:
        return float(base + fit.p_alpha * math.log(meta.t_n))
    raise UsageError(f"unknown drift criterion {kind!r}")  # pragma: no cover


def modified_scale_penalty(fit: FitResult, meta: PathMeta) -> float:
    """The GQAIC1_MOD penalty p (nu4/h - nu2^2); ~2p under Wiener noise."""
    return float(fit.p_gamma * (fit.nu4_hat / meta.h - fit.nu2_hat**2))


# --- free energies ----------------------------------------------------------------


def _panel_edges(lo: float, hi: float, center: float, width: float) -> list[tuple[float, float]]:
    cuts = [lo]
    for c in (center - width, center + width):
        if cuts[-1] < c < hi:
            cuts.append(c)
    cuts.append(hi)
    return [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1) if cuts[i + 1] > cuts[i]]


def _log_quad(
    log_f: Callable[[np.ndarray], float],
    box: np.ndarray,
    center: np.ndarray,
    curvature: np.ndarray,
    nodes: int,
) -> float:
    """log integral of exp(log_f) over the box, panel Gauss-Legendre + LSE."""
    p = box.shape[0]
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    per_dim = []
    for k in range(p):
        lo, hi = box[k]
        curv = curvature[k]
        # ~10 posterior sds half-width; fall back to a quarter box when flat
        width = 10.0 / math.sqrt(curv) if curv > 0 else 0.25 * (hi - lo)
        width = min(max(width, 1e-8 * (hi - lo)), hi - lo)
        panels = _panel_edges(lo, hi, float(center[k]), width)
        pts, wts = [], []
        for a, b in panels:
            half = 0.5 * (b - a)
            pts.append(0.5 * (a + b) + half * xi)
            wts.append(half * wi)
        per_dim.append((np.concatenate(pts), np.concatenate(wts)))
    logs = []
    if p == 1:
        pts, wts = per_dim[0]
        for t, w in zip(pts, wts):
            logs.append(log_f(np.array([t])) + math.log(w))
    else:
        for t1, w1 in zip(*per_dim[0]):
            for t2, w2 in zip(*per_dim[1]):
                logs.append(log_f(np.array([t1, t2])) + math.log(w1 * w2))
    logs = np.asarray(logs)
    keep = logs > -np.inf
    if not keep.any():
        raise QuadratureError("integrand vanished at every quadrature node")
    m = float(logs[keep].max())
    total = float(np.exp(logs[keep] - m).sum())
    if not (np.isfinite(total) and total > 0.0):
        raise QuadratureError("quadrature underflowed after recentering")
    return m + math.log(total)


def _uniform_log_prior(box: np.ndarray) -> Callable[[np.ndarray], float]:
    log_vol = float(np.log(box[:, 1] - box[:, 0]).sum())

    def log_prior(theta):
        return -log_vol

    return log_prior


def _resolve_prior(prior, box) -> Callable[[np.ndarray], float]:
    if prior is None:
        return _uniform_log_prior(box)

    def log_prior(theta):
        v = float(prior(theta))
        if v < 0.0 or not np.isfinite(v):
            raise NumericalError(f"prior returned invalid density {v} at {theta}")
        return math.log(v) if v > 0.0 else -np.inf

    return log_prior


def free_energy_scale(
    path: SamplePath,
    scale: Coefficient,
    b: float,
    prior: Optional[Callable] = None,
    nodes: int = 64,
    box: Optional[np.ndarray] = None,
    center: Optional[np.ndarray] = None,
    cfg: OptConfig = fitmod.DEFAULT_OPT,
) -> float:
    """-(n b)^-1 log int exp(b h1(gamma)) prior(gamma) dgamma over the box.

    `b` is the inverse-temperature: 1 gives the plain marginal likelihood, h the
    time-scaled one whose expansion penalty is (p / 2 T_n) log T_n.
    """
    if scale.dim > 2:
        raise UsageError(
            f"free energy supports at most 2 scale parameters, {scale.name} has {scale.dim}"
        )
    if not b > 0:
        raise ValueError(f"need b > 0, got {b}")
    box = scale.box if box is None else np.asarray(box, dtype=float)
    if center is None:
        center = fitmod.fit_scale(path, scale, cfg).theta
    center = np.clip(np.asarray(center, dtype=float), box[:, 0], box[:, 1])
    log_prior = _resolve_prior(prior, box)

    def log_f(gamma):
        lp = log_prior(gamma)
        if lp == -np.inf:
            return -np.inf
        try:
            return b * gqlf.h1(path, scale, gamma, cfg.s_min) + lp
        except NumericalError:
            return -np.inf

    curv = np.clip(-b * np.diag(gqlf.h1_hessian(path, scale, center, cfg.s_min)), 0.0, None)
    return -_log_quad(log_f, box, center, curv, nodes) / (path.n * b)


def free_energy_drift(
    path: SamplePath,
    model: CandidateModel,
    gamma_hat: np.ndarray,
    prior: Optional[Callable] = None,
    nodes: int = 64,
    box: Optional[np.ndarray] = None,
    center: Optional[np.ndarray] = None,
    cfg: OptConfig = fitmod.DEFAULT_OPT,
) -> float:
    """-T_n^-1 log int exp(h2(alpha; gamma_hat)) prior(alpha) dalpha over the box."""
    drift = model.drift
    if drift.dim > 2:
        raise UsageError(
            f"free energy supports at most 2 drift parameters, {drift.name} has {drift.dim}"
        )
    box = drift.box if box is None else np.asarray(box, dtype=float)
    if center is None:
        center = fitmod.fit_drift(path, model, gamma_hat, cfg).theta
    center = np.clip(np.asarray(center, dtype=float), box[:, 0], box[:, 1])
    log_prior = _resolve_prior(prior, box)

    def log_f(alpha):
        lp = log_prior(alpha)
        if lp == -np.inf:
            return -np.inf
        try:
            return gqlf.h2(path, model, alpha, gamma_hat, cfg.s_min) + lp
        except NumericalError:
            return -np.inf

    curv = np.clip(-np.diag(gqlf.h2_hessian(path, model, center, gamma_hat, cfg.s_min)), 0.0, None)
    return -_log_quad(log_f, box, center, curv, nodes) / path.t_n
