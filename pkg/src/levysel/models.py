"""Candidate coefficient families and the built-in model space.

A Coefficient bundles a parametric function of the state with its parameter box and
(where available) an analytic parameter gradient. The built-in registry carries the
seven families used throughout: four scale candidates of increasing flexibility and
three drift candidates. Evaluation functions are plain module-level functions so
candidates pickle cleanly into worker processes.

Boxes are harness choices, not part of the model definition; they are embedded in
every output. The leading coordinate of each scale family (the constant term) is
kept positive, [0.01, 20]; remaining scale coordinates and all drift coordinates
live in [-10, 10], so each family's best approximation to the experiment's true
scale 3/(1+x^2) is interior to its box. Positivity of the squared scale along the
observed states is enforced at fit time, not through the box.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import UsageError

_EPS_CBRT = float(np.finfo(float).eps) ** (1.0 / 3.0)


@dataclass(frozen=True)
class Coefficient:
    """Parametric state coefficient theta -> (x -> value)."""

    name: str
    dim: int
    box: np.ndarray  # (dim, 2) rows (lo, hi)
    eval_fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"coefficient dimension must be >= 1, got {self.dim}")
        box = np.asarray(self.box, dtype=float)
        if box.shape != (self.dim, 2):
            raise ValueError(f"box must have shape ({self.dim}, 2), got {box.shape}")
        if not np.isfinite(box).all() or not (box[:, 0] < box[:, 1]).all():
            raise ValueError(f"box rows must be finite with lo < hi, got {box}")
        object.__setattr__(self, "box", box)

    def __call__(self, x, theta):
        return self.eval_fn(np.asarray(x, dtype=float), np.asarray(theta, dtype=float))

    def contains(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool((theta >= self.box[:, 0]).all() and (theta <= self.box[:, 1]).all())

    def clip(self, theta) -> np.ndarray:
        return np.clip(np.asarray(theta, dtype=float), self.box[:, 0], self.box[:, 1])

    def boundary_hit(self, theta, rtol: float = 1e-6) -> bool:
        """True when any coordinate is within rtol * box width of a bound."""
        theta = np.asarray(theta, dtype=float)
        width = self.box[:, 1] - self.box[:, 0]
        return bool(
            (theta - self.box[:, 0] <= rtol * width).any()
            or (self.box[:, 1] - theta <= rtol * width).any()
        )


@dataclass(frozen=True)
class CandidateModel:
    """One scale family paired with one drift family."""

    label: str
    scale: Coefficient
    drift: Coefficient


def grad_or_fd(coef: Coefficient, x, theta) -> np.ndarray:
    """Parameter gradient of shape (dim,) + x.shape.

    Analytic when the coefficient carries one; otherwise central differences with
    step eps^(1/3) * max(1, |theta_k|) per coordinate, stencil points clamped to the
    box and the divisor taken from the actual spread.
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if coef.grad_fn is not None:
        return coef.grad_fn(x, theta)
    rows = []
    for k in range(coef.dim):
        step = _EPS_CBRT * max(1.0, abs(theta[k]))
        up, dn = theta.copy(), theta.copy()
        up[k] = min(theta[k] + step, coef.box[k, 1])
        dn[k] = max(theta[k] - step, coef.box[k, 0])
        spread = up[k] - dn[k]
        if spread <= 0:
            raise ValueError(f"degenerate FD stencil for {coef.name} coordinate {k}")
        rows.append((coef.eval_fn(x, up) - coef.eval_fn(x, dn)) / spread)
    return np.stack([np.broadcast_to(r, x.shape) for r in rows])


# --- built-in families (module level so Coefficient values pickle) ---------------

def _scale1_eval(x, g):
    return g[0] + 0.0 * x


def _scale1_grad(x, g):
    return np.stack([np.ones_like(x)])


def _scale2_eval(x, g):
    return g[0] / (1.0 + x * x)


def _scale2_grad(x, g):
    return np.stack([1.0 / (1.0 + x * x)])


def _scale3_eval(x, g):
    x2 = x * x
    return (g[0] + g[1] * x2) / (1.0 + x2)


def _scale3_grad(x, g):
    x2 = x * x
    den = 1.0 + x2
    return np.stack([1.0 / den, x2 / den])


def _scale4_eval(x, g):
    x2 = x * x
    return (g[0] + g[1] * x + g[2] * x2) / (1.0 + x2)


def _scale4_grad(x, g):
    x2 = x * x
    den = 1.0 + x2
    return np.stack([1.0 / den, x / den, x2 / den])


def _drift1_eval(x, a):
    return -a[0] + 0.0 * x


def _drift1_grad(x, a):
    return np.stack([-np.ones_like(x)])


def _drift2_eval(x, a):
    return -a[0] * x


def _drift2_grad(x, a):
    return np.stack([-x])


def _drift3_eval(x, a):
    return -a[0] * x - a[1]


def _drift3_grad(x, a):
    return np.stack([-x, -np.ones_like(x)])


_POS = (0.01, 20.0)
_SYM = (-10.0, 10.0)

_REGISTRY = {
    "Scale1": Coefficient("Scale1", 1, np.array([_POS]), _scale1_eval, _scale1_grad),
    "Scale2": Coefficient("Scale2", 1, np.array([_POS]), _scale2_eval, _scale2_grad),
    "Scale3": Coefficient("Scale3", 2, np.array([_POS, _SYM]), _scale3_eval, _scale3_grad),
    "Scale4": Coefficient(
        "Scale4", 3, np.array([_POS, _SYM, _SYM]), _scale4_eval, _scale4_grad
    ),
    "Drift1": Coefficient("Drift1", 1, np.array([_SYM]), _drift1_eval, _drift1_grad),
    "Drift2": Coefficient("Drift2", 1, np.array([_SYM]), _drift2_eval, _drift2_grad),
    "Drift3": Coefficient("Drift3", 2, np.array([_SYM, _SYM]), _drift3_eval, _drift3_grad),
}


def available_candidates() -> list[str]:
    return sorted(_REGISTRY)


def registry(name: str) -> Coefficient:
    """Built-in candidate by name; unknown names list what exists."""
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UsageError(
            f"unknown candidate {name!r}; available: {', '.join(available_candidates())}"
        ) from None


def resolve_candidates(names) -> list[Coefficient]:
    return [c if isinstance(c, Coefficient) else registry(c) for c in names]
