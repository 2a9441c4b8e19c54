"""Two-stage quasi-likelihood fitting and the empirical sandwich matrices.

Stage one maximizes h1 over the scale parameter; stage two plugs the fitted scale
into h2 and maximizes over the drift parameter. Optimization is multi-start
Nelder-Mead projected onto the parameter box, deterministic given the start grid,
with ties broken by objective value and then lexicographically smallest parameter.

The empirical matrices feeding criteria, studentization, and the limit law are the
plug-in averages

    GammaAlpha = n^-1 sum (da x da) / S
    GammaGamma = (2n)^-1 sum (dS x dS) / S^2
    W_gamma    = (4 T_n)^-1 sum (dS chi^2 / S^2) x (dS chi^2 / S^2)
    W_alphagamma = (2 T_n)^-1 sum (da chi / S) x (dS chi^2 / S^2)

with chi_j the drift-compensated increment D_j X - h a_{j-1}(alpha_hat). At scale
selection time no drift estimate exists yet, so scale_stage uses the raw increment
(the omitted term is O(h) relative); fit_model, with both stages done, compensates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize, stats

from . import gqlf
from .errors import FitError, NumericalError, SingularMatrixError
from .models import CandidateModel, Coefficient, grad_or_fd
from .sde import PathMeta, SamplePath

COND_MAX = 1e12


@dataclass(frozen=True)
class OptConfig:
    """Multi-start simplex settings.

    starts=None uses the default grid of 3^p interior points (quartile fractions per
    coordinate); an integer asks for that many points of the same construction with
    a finer per-axis grid.
    """

    starts: Optional[int] = None
    max_iter: int = 2000
    f_tol: float = 1e-10
    x_tol: float = 1e-8
    s_min: float = gqlf.S_MIN
    boundary_rtol: float = 1e-6


DEFAULT_OPT = OptConfig()


def start_points(box: np.ndarray, count: Optional[int] = None) -> np.ndarray:
    """Deterministic start grid in the box; 3 quartile points per axis by default."""
    p = box.shape[0]
    if count is None:
        m = 3
        count = m**p
    else:
        if count < 1:
            raise ValueError(f"need at least one start, got {count}")
        m = max(1, math.ceil(count ** (1.0 / p)))
    fracs = (np.arange(1, m + 1)) / (m + 1.0)
    axes = [box[k, 0] + fracs * (box[k, 1] - box[k, 0]) for k in range(p)]
    grid = np.array(list(itertools.product(*axes)))
    return grid[:count]


@dataclass
class StageFit:
    """Result of one optimization stage."""

    theta: np.ndarray
    value: float
    converged: bool
    boundary_hit: bool
    n_starts: int


def _maximize(objective, coef: Coefficient, cfg: OptConfig) -> StageFit:
    """Best-of-starts Nelder-Mead maximization of `objective` over coef's box."""

    def neg(theta):
        try:
            v = objective(theta)
        except NumericalError:
            return np.inf
        return -v if np.isfinite(v) else np.inf

    bounds = optimize.Bounds(coef.box[:, 0], coef.box[:, 1])
    best = None
    for x0 in start_points(coef.box, cfg.starts):
        # failures surface as +inf by design, so the simplex bookkeeping may
        # legally produce inf - inf; keep that out of the warning stream
        with np.errstate(invalid="ignore", over="ignore"):
            res = optimize.minimize(
                neg,
                x0,
                method="Nelder-Mead",
                bounds=bounds,
                options={
                    "maxiter": cfg.max_iter,
                    "xatol": cfg.x_tol,
                    "fatol": cfg.f_tol,
                },
            )
        if not np.isfinite(res.fun):
            continue
        cand = (float(-res.fun), tuple(np.asarray(res.x, dtype=float)), bool(res.success))
        if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
            best = cand
    if best is None:
        raise FitError(
            f"no optimizer start produced a finite {coef.name} objective "
            f"({start_points(coef.box, cfg.starts).shape[0]} starts)"
        )
    value, theta_t, success = best
    theta = coef.clip(np.array(theta_t))
    return StageFit(
        theta=theta,
        value=value,
        converged=success,
        boundary_hit=coef.boundary_hit(theta, cfg.boundary_rtol),
        n_starts=start_points(coef.box, cfg.starts).shape[0],
    )


def fit_scale(path: SamplePath, scale: Coefficient, cfg: OptConfig = DEFAULT_OPT) -> StageFit:
    """Stage-one maximizer of h1 over the scale box."""
    return _maximize(lambda g: gqlf.h1(path, scale, g, cfg.s_min), scale, cfg)


def fit_drift(
    path: SamplePath,
    model: CandidateModel,
    gamma_hat: np.ndarray,
    cfg: OptConfig = DEFAULT_OPT,
) -> StageFit:
    """Stage-two maximizer of h2 over the drift box, scale fixed at gamma_hat."""
    return _maximize(lambda a: gqlf.h2(path, model, a, gamma_hat, cfg.s_min), model.drift, cfg)


def nu_hats(
    path: SamplePath, scale: Coefficient, gamma_hat, s_min: float = gqlf.S_MIN
) -> tuple[float, float]:
    """Standardized second and fourth empirical moments of the raw increments."""
    s = gqlf.scale_squares(path, scale, gamma_hat, s_min)
    dx = path.increments()
    r2 = dx * dx / s
    t_n = path.t_n
    return float(r2.sum() / t_n), float((r2 * r2).sum() / t_n)


def _scale_pieces(path, scale, gamma_hat, s_min):
    x = path.state_values()
    s = gqlf.scale_squares(path, scale, gamma_hat, s_min)
    c = scale(x, np.asarray(gamma_hat, dtype=float))
    ds = 2.0 * c * grad_or_fd(scale, x, np.asarray(gamma_hat, dtype=float))
    return s, ds


def empirical_scale_matrices(
    path: SamplePath,
    scale: Coefficient,
    gamma_hat,
    drift: Optional[Coefficient] = None,
    alpha_hat=None,
    s_min: float = gqlf.S_MIN,
) -> tuple[np.ndarray, np.ndarray]:
    """(GammaGamma_hat, W_gamma_hat); compensates the residual only when a fitted
    drift is supplied."""
    s, ds = _scale_pieces(path, scale, gamma_hat, s_min)
    chi = path.increments()
    if drift is not None:
        chi = chi - path.h * drift(path.state_values(), np.asarray(alpha_hat, dtype=float))
    g = ds / s
    gamma_gamma = (g @ g.T) / (2.0 * path.n)
    q = g * (chi * chi / s)
    w_gamma = (q @ q.T) / (4.0 * path.t_n)
    return gamma_gamma, w_gamma


def empirical_drift_matrix(
    path: SamplePath,
    model: CandidateModel,
    gamma_hat,
    alpha_hat,
    s_min: float = gqlf.S_MIN,
) -> np.ndarray:
    """GammaAlpha_hat."""
    s = gqlf.scale_squares(path, model.scale, gamma_hat, s_min)
    da = grad_or_fd(model.drift, path.state_values(), np.asarray(alpha_hat, dtype=float))
    a2 = da / np.sqrt(s)
    return (a2 @ a2.T) / path.n


@dataclass
class SandwichMatrices:
    gamma_alpha: np.ndarray
    gamma_gamma: np.ndarray
    w_gamma: np.ndarray
    w_alphagamma: np.ndarray
    sigma: np.ndarray
    v_hat: np.ndarray


def empirical_matrices(
    path: SamplePath,
    model: CandidateModel,
    gamma_hat,
    alpha_hat,
    s_min: float = gqlf.S_MIN,
) -> SandwichMatrices:
    """All plug-in matrices and the sandwich V_hat, theta ordered (alpha, gamma)."""
    x = path.state_values()
    s, ds = _scale_pieces(path, model.scale, gamma_hat, s_min)
    a = model.drift(x, np.asarray(alpha_hat, dtype=float))
    da = grad_or_fd(model.drift, x, np.asarray(alpha_hat, dtype=float))
    chi = path.increments() - path.h * a

    a2 = da / np.sqrt(s)
    gamma_alpha = (a2 @ a2.T) / path.n
    g = ds / s
    gamma_gamma = (g @ g.T) / (2.0 * path.n)
    q = g * (chi * chi / s)
    w_gamma = (q @ q.T) / (4.0 * path.t_n)
    r = da * (chi / s)
    w_alphagamma = (r @ q.T) / (2.0 * path.t_n)

    p_a, p_g = gamma_alpha.shape[0], gamma_gamma.shape[0]
    sigma = np.block([[gamma_alpha, w_alphagamma], [w_alphagamma.T, w_gamma]])
    gamma_full = np.zeros((p_a + p_g, p_a + p_g))
    gamma_full[:p_a, :p_a] = gamma_alpha
    gamma_full[p_a:, p_a:] = gamma_gamma
    if np.linalg.cond(gamma_full) >= COND_MAX:
        raise SingularMatrixError(
            f"empirical information matrix of {model.label} is numerically singular "
            f"(cond >= {COND_MAX:.0e})"
        )
    inv = np.linalg.inv(gamma_full)
    v_hat = inv @ sigma @ inv
    v_hat = 0.5 * (v_hat + v_hat.T)
    return SandwichMatrices(gamma_alpha, gamma_gamma, w_gamma, w_alphagamma, sigma, v_hat)


@dataclass
class FitResult:
    """Everything the criteria and reports consume; drift fields are None for a
    scale-only stage."""

    scale_name: str
    gamma_hat: np.ndarray
    h1_value: float
    gamma_gamma_hat: np.ndarray
    w_gamma_hat: np.ndarray
    nu2_hat: float
    nu4_hat: float
    converged: dict
    boundary_hit: dict
    drift_name: Optional[str] = None
    alpha_hat: Optional[np.ndarray] = None
    h2_value: Optional[float] = None
    gamma_alpha_hat: Optional[np.ndarray] = None
    w_alphagamma_hat: Optional[np.ndarray] = None
    v_hat: Optional[np.ndarray] = None

    @property
    def p_gamma(self) -> int:
        return self.gamma_hat.size

    @property
    def p_alpha(self) -> Optional[int]:
        return None if self.alpha_hat is None else self.alpha_hat.size

    def to_json(self) -> dict:
        def conv(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            return v

        return {k: conv(v) for k, v in self.__dict__.items()}


def scale_stage(path: SamplePath, scale: Coefficient, cfg: OptConfig = DEFAULT_OPT) -> FitResult:
    """Fit the scale family alone; matrices use the raw-increment residual."""
    sf = fit_scale(path, scale, cfg)
    gamma_gamma, w_gamma = empirical_scale_matrices(path, scale, sf.theta, s_min=cfg.s_min)
    nu2, nu4 = nu_hats(path, scale, sf.theta, cfg.s_min)
    return FitResult(
        scale_name=scale.name,
        gamma_hat=sf.theta,
        h1_value=sf.value,
        gamma_gamma_hat=gamma_gamma,
        w_gamma_hat=w_gamma,
        nu2_hat=nu2,
        nu4_hat=nu4,
        converged={"scale": sf.converged, "drift": None},
        boundary_hit={"scale": sf.boundary_hit, "drift": None},
    )


def fit_model(path: SamplePath, model: CandidateModel, cfg: OptConfig = DEFAULT_OPT) -> FitResult:
    """Both stages plus the compensated sandwich matrices and V_hat."""
    sf = fit_scale(path, model.scale, cfg)
    df = fit_drift(path, model, sf.theta, cfg)
    mats = empirical_matrices(path, model, sf.theta, df.theta, cfg.s_min)
    nu2, nu4 = nu_hats(path, model.scale, sf.theta, cfg.s_min)
    return FitResult(
        scale_name=model.scale.name,
        gamma_hat=sf.theta,
        h1_value=sf.value,
        gamma_gamma_hat=mats.gamma_gamma,
        w_gamma_hat=mats.w_gamma,
        nu2_hat=nu2,
        nu4_hat=nu4,
        converged={"scale": sf.converged, "drift": df.converged},
        boundary_hit={"scale": sf.boundary_hit, "drift": df.boundary_hit},
        drift_name=model.drift.name,
        alpha_hat=df.theta,
        h2_value=df.value,
        gamma_alpha_hat=mats.gamma_alpha,
        w_alphagamma_hat=mats.w_alphagamma,
        v_hat=mats.v_hat,
    )


@dataclass
class ConfidenceIntervals:
    """Per-coordinate normal intervals, theta ordered (alpha..., gamma...)."""

    level: float
    lower: np.ndarray
    upper: np.ndarray
    degenerate: np.ndarray  # bool per coordinate: V_hat diagonal was zero

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "degenerate": self.degenerate.tolist(),
        }


def confidence_interval(fit: FitResult, meta: PathMeta, level: float = 0.95) -> ConfidenceIntervals:
    """theta_hat_k +/- z * sqrt(V_hat_kk / T_n) for each coordinate."""
    if fit.v_hat is None:
        raise NumericalError("confidence intervals need a full fit (v_hat missing)")
    if not (0.0 < level < 1.0):
        raise ValueError(f"level must be in (0, 1), got {level}")
    diag = np.diag(fit.v_hat).copy()
    scale_tol = 1e-12 * max(1.0, float(np.abs(fit.v_hat).max()))
    if (diag < -scale_tol).any():
        raise NumericalError("V_hat is not positive semidefinite on its diagonal")
    diag = np.clip(diag, 0.0, None)
    theta = np.concatenate([fit.alpha_hat, fit.gamma_hat])
    z = float(stats.norm.ppf(0.5 * (1.0 + level)))
    half = z * np.sqrt(diag / meta.t_n)
    return ConfidenceIntervals(
        level=level,
        lower=theta - half,
        upper=theta + half,
        degenerate=(diag == 0.0),
    )
