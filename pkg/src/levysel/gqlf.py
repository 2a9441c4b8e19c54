"""Gaussian quasi-likelihoods on an observed path.

Write S_{j-1}(gamma) = c(X_{t_{j-1}}, gamma)^2 and a_{j-1}(alpha) = a(X_{t_{j-1}},
alpha). The scale-stage quasi-likelihood is the exact Gaussian log-likelihood of the
small-time approximation X_{t_j} ~ N(X_{t_{j-1}}, h S_{j-1}):

    h1(gamma) = -1/2 sum_j [ log(2 pi h S_{j-1}) + (D_j X)^2 / (h S_{j-1}) ]

and the drift stage keeps only the alpha-dependent part of the mean-corrected
version:

    h2(alpha; gamma) = sum_j [ a_{j-1} D_j X - (h/2) a_{j-1}^2 ] / S_{j-1}.

h2_star is the full mean-corrected Gaussian log-likelihood; algebraically
h2_star = h1 + h2, which doubles as a cross-check of all three implementations.

Squared scales are guarded below by s_min: a candidate whose scale degenerates along
the observed states raises DegenerateScaleError naming the first offending step.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateScaleError, NumericalError
from .models import CandidateModel, Coefficient, grad_or_fd
from .sde import SamplePath

S_MIN = 1e-12

_LOG_2PI = math.log(2.0 * math.pi)
_EPS = float(np.finfo(float).eps)


def scale_squares(path: SamplePath, scale: Coefficient, gamma, s_min: float = S_MIN) -> np.ndarray:
    """S_{j-1}(gamma) over the path's state values, positivity-guarded."""
    c = scale(path.state_values(), np.asarray(gamma, dtype=float))
    s = c * c
    if not np.isfinite(s).all():
        j = int(np.flatnonzero(~np.isfinite(s))[0])
        raise NumericalError(f"non-finite squared scale at observation {j}")
    if s.min() < s_min:
        j = int(np.argmin(s))
        raise DegenerateScaleError(index=j, value=s[j], s_min=s_min)
    return s


def h1(path: SamplePath, scale: Coefficient, gamma, s_min: float = S_MIN) -> float:
    """Scale-stage Gaussian quasi-log-likelihood at gamma."""
    s = scale_squares(path, scale, gamma, s_min)
    dx = path.increments()
    h = path.h
    return float(-0.5 * (path.n * (_LOG_2PI + math.log(h)) + np.log(s).sum() + (dx * dx / s).sum() / h))


def h2(
    path: SamplePath,
    model: CandidateModel,
    alpha,
    gamma,
    s_min: float = S_MIN,
) -> float:
    """Drift-stage quasi-log-likelihood at alpha, scale plugged in at gamma."""
    s = scale_squares(path, model.scale, gamma, s_min)
    a = model.drift(path.state_values(), np.asarray(alpha, dtype=float))
    dx = path.increments()
    return float(((a * dx - 0.5 * path.h * a * a) / s).sum())


def h2_star(
    path: SamplePath,
    model: CandidateModel,
    alpha,
    gamma,
    s_min: float = S_MIN,
) -> float:
    """Mean-corrected Gaussian quasi-log-likelihood; equals h1 + h2 identically."""
    s = scale_squares(path, model.scale, gamma, s_min)
    a = model.drift(path.state_values(), np.asarray(alpha, dtype=float))
    h = path.h
    resid = path.increments() - h * a
    return float(-0.5 * (path.n * (_LOG_2PI + math.log(h)) + np.log(s).sum() + (resid * resid / s).sum() / h))


def h1_gradient(path: SamplePath, scale: Coefficient, gamma, s_min: float = S_MIN) -> np.ndarray:
    """d h1 / d gamma, chain rule on analytic coefficient gradients when present."""
    gamma = np.asarray(gamma, dtype=float)
    if scale.grad_fn is None:
        return _fd_gradient(lambda g: h1(path, scale, g, s_min), gamma, scale)
    x = path.state_values()
    s = scale_squares(path, scale, gamma, s_min)
    c = scale(x, gamma)
    ds = 2.0 * c * grad_or_fd(scale, x, gamma)  # dS/dgamma, shape (p, n)
    dx = path.increments()
    w = dx * dx / (path.h * s) - 1.0
    return 0.5 * (ds / s * w).sum(axis=1)


def h2_gradient(
    path: SamplePath,
    model: CandidateModel,
    alpha,
    gamma,
    s_min: float = S_MIN,
) -> np.ndarray:
    """d h2 / d alpha at fixed gamma."""
    alpha = np.asarray(alpha, dtype=float)
    if model.drift.grad_fn is None:
        return _fd_gradient(lambda a: h2(path, model, a, gamma, s_min), alpha, model.drift)
    x = path.state_values()
    s = scale_squares(path, model.scale, gamma, s_min)
    a = model.drift(x, alpha)
    da = grad_or_fd(model.drift, x, alpha)  # (p, n)
    resid = path.increments() - path.h * a
    return (da * resid / s).sum(axis=1)


def h1_hessian(path: SamplePath, scale: Coefficient, gamma, s_min: float = S_MIN) -> np.ndarray:
    return _fd_hessian(lambda g: h1(path, scale, g, s_min), np.asarray(gamma, dtype=float))


def h2_hessian(
    path: SamplePath,
    model: CandidateModel,
    alpha,
    gamma,
    s_min: float = S_MIN,
) -> np.ndarray:
    return _fd_hessian(lambda a: h2(path, model, a, gamma, s_min), np.asarray(alpha, dtype=float))


def _fd_gradient(f, theta: np.ndarray, coef: Coefficient) -> np.ndarray:
    out = np.empty(theta.size)
    for k in range(theta.size):
        step = _EPS ** (1.0 / 3.0) * max(1.0, abs(theta[k]))
        up, dn = theta.copy(), theta.copy()
        up[k] = min(theta[k] + step, coef.box[k, 1])
        dn[k] = max(theta[k] - step, coef.box[k, 0])
        out[k] = (f(up) - f(dn)) / (up[k] - dn[k])
    return out


def _fd_hessian(f, theta: np.ndarray) -> np.ndarray:
    """Symmetric-by-construction central second differences."""
    p = theta.size
    steps = np.array([_EPS**0.25 * max(1.0, abs(t)) for t in theta])
    out = np.empty((p, p))
    f0 = f(theta)

    def at(delta):
        return f(theta + delta)

    for i in range(p):
        ei = np.zeros(p)
        ei[i] = steps[i]
        out[i, i] = (at(ei) - 2.0 * f0 + at(-ei)) / steps[i] ** 2
        for j in range(i + 1, p):
            ej = np.zeros(p)
            ej[j] = steps[j]
            mixed = (at(ei + ej) - at(ei - ej) - at(-ei + ej) + at(-ei - ej)) / (
                4.0 * steps[i] * steps[j]
            )
            out[i, j] = mixed
            out[j, i] = mixed
    return out
