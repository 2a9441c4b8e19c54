"""Canonical benchmark setup: true model, noise cases, candidate banks.

The data-generating model is ``dX = -X/2 dt + 3/(1 + X^2) dZ`` started at
zero, which sits inside the candidate bank as Scale2 with gamma = 3 and
Drift2 with alpha = 1/2.  Three standardized driving noises are used:
Brownian-like light tails (case i), symmetric heavy tails with excess
kurtosis 3 (case ii), and a skewed heavy-tailed case (case iii).
"""

from __future__ import annotations

from .errors import UsageError
from .models import Coefficient, resolve_candidates
from .noise import BilateralGammaNoise, GaussianNoise, LevySpec, NigNoise
from .sde import TrueModel

TRUE_GAMMA = 3.0
TRUE_ALPHA = 0.5

DEFAULT_SCALES = ("Scale1", "Scale2", "Scale3", "Scale4")
DEFAULT_DRIFTS = ("Drift1", "Drift2", "Drift3")

# 1-based positions of the true model within the default candidate banks.
TRUE_SCALE_INDEX = 2
TRUE_DRIFT_INDEX = 2


def true_drift(x: float) -> float:
    return -TRUE_ALPHA * x


def true_scale(x: float) -> float:
    return TRUE_GAMMA / (1.0 + x * x)


TRUE_MODEL = TrueModel(drift=true_drift, scale=true_scale, x0=0.0)


def case_noise(case: str) -> LevySpec:
    """Standardized driving noise for benchmark case ``i``, ``ii``, or ``iii``.

    Case i is normal-inverse-Gaussian with cumulant rates (0, 1, 0, 0.03),
    nearly Brownian.  Case ii is a symmetric bilateral-gamma difference
    with rates (0, 1, 0, 3).  Case iii is a skewed normal-inverse-Gaussian
    with rates (0, 1, 0.8, 89/75).  ``gaussian`` is accepted as well.
    """
    key = case.strip().lower()
    if key == "i":
        return NigNoise(alpha=10.0, beta=0.0, delta_rate=10.0, mu_rate=0.0)
    if key == "ii":
        root2 = 2.0**0.5
        return BilateralGammaNoise(
            shape_pos_rate=1.0, rate_pos=root2, shape_neg_rate=1.0, rate_neg=root2
        )
    if key == "iii":
        return NigNoise(alpha=25.0 / 3.0, beta=20.0 / 3.0, delta_rate=1.8, mu_rate=-2.4)
    if key == "gaussian":
        return GaussianNoise()
    raise UsageError(f"unknown noise case {case!r}; expected i, ii, iii, or gaussian")


def default_candidates() -> tuple[list[Coefficient], list[Coefficient]]:
    """The benchmark's four scale and three drift candidates, in table order."""
    scales = resolve_candidates(DEFAULT_SCALES)
    drifts = resolve_candidates(DEFAULT_DRIFTS)
    return scales, drifts
