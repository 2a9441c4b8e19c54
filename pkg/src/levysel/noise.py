"""Driving-noise specifications and increment sampling.

Three families of driving Levy process are supported: standard Brownian motion,
normal inverse Gaussian, and bilateral gamma. The estimation theory wants a
standardized driver (unit-time mean 0, variance 1); the constructors only warn when
a spec is not standardized, since nothing below breaks without it.

Cumulants of the unit-time law are exposed as rates: the increment over a step of
length h has r-th cumulant h * rate_r, by infinite divisibility. nu3 and nu4 name
the third and fourth rates because they are what the scale-stage criteria consume.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DataError, NumericalError
from .rng import RngStream

STANDARDIZATION_TOL = 1e-8


@dataclass(frozen=True)
class GaussianNoise:
    """Standard Brownian motion. No parameters; always standardized."""

    kind = "gaussian"


@dataclass(frozen=True)
class NigNoise:
    """Normal inverse Gaussian process.

    Z_t ~ NIG(alpha, beta, delta_rate * t, mu_rate * t): tail heaviness alpha,
    asymmetry beta, scale delta_rate, location drift mu_rate. Requires
    0 <= |beta| < alpha and delta_rate > 0.
    """

    alpha: float
    beta: float
    delta_rate: float
    mu_rate: float

    kind = "nig"

    def __post_init__(self):
        if not (self.alpha > 0 and abs(self.beta) < self.alpha):
            raise ValueError(
                f"NIG requires 0 <= |beta| < alpha, got alpha={self.alpha}, beta={self.beta}"
            )
        if not self.delta_rate > 0:
            raise ValueError(f"NIG requires delta_rate > 0, got {self.delta_rate}")
        _warn_if_not_standardized(self)

    @property
    def gamma_bar(self) -> float:
        return math.sqrt(self.alpha**2 - self.beta**2)


@dataclass(frozen=True)
class BilateralGammaNoise:
    """Difference of two independent gamma subordinators.

    Z_t ~ Gamma(shape_pos_rate * t, rate_pos) - Gamma(shape_neg_rate * t, rate_neg),
    with gamma laws in shape/rate form. All four parameters must be positive.
    """

    shape_pos_rate: float
    rate_pos: float
    shape_neg_rate: float
    rate_neg: float

    kind = "bgamma"

    def __post_init__(self):
        for name in ("shape_pos_rate", "rate_pos", "shape_neg_rate", "rate_neg"):
            if not getattr(self, name) > 0:
                raise ValueError(f"bilateral gamma requires {name} > 0, got {getattr(self, name)}")
        _warn_if_not_standardized(self)


LevySpec = Union[GaussianNoise, NigNoise, BilateralGammaNoise]


@dataclass(frozen=True)
class CumulantRates:
    """Unit-time cumulants (mean, variance, third, fourth) of the driving noise."""

    mean_rate: float
    var_rate: float
    nu3: float
    nu4: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mean_rate, self.var_rate, self.nu3, self.nu4])


def cumulant_rates(spec: LevySpec) -> CumulantRates:
    """Closed-form unit-time cumulant rates of `spec`."""
    if isinstance(spec, GaussianNoise):
        return CumulantRates(0.0, 1.0, 0.0, 0.0)
    if isinstance(spec, NigNoise):
        g = spec.gamma_bar
        a2 = spec.alpha**2
        return CumulantRates(
            mean_rate=spec.mu_rate + spec.delta_rate * spec.beta / g,
            var_rate=spec.delta_rate * a2 / g**3,
            nu3=3.0 * spec.delta_rate * spec.beta * a2 / g**5,
            nu4=3.0 * spec.delta_rate * a2 * (a2 + 4.0 * spec.beta**2) / g**7,
        )
    if isinstance(spec, BilateralGammaNoise):
        # kappa_r = shape * (r-1)! / rate^r per side; odd orders subtract.
        ap, lp = spec.shape_pos_rate, spec.rate_pos
        am, lm = spec.shape_neg_rate, spec.rate_neg
        return CumulantRates(
            mean_rate=ap / lp - am / lm,
            var_rate=ap / lp**2 + am / lm**2,
            nu3=2.0 * (ap / lp**3 - am / lm**3),
            nu4=6.0 * (ap / lp**4 + am / lm**4),
        )
    raise DataError(f"unknown noise spec {spec!r}")


def standardization_gap(spec: LevySpec) -> tuple[float, float]:
    """(mean_rate, var_rate - 1); both ~0 for a standardized driver."""
    r = cumulant_rates(spec)
    return r.mean_rate, r.var_rate - 1.0


def _warn_if_not_standardized(spec) -> None:
    mean_gap, var_gap = standardization_gap(spec)
    if abs(mean_gap) > STANDARDIZATION_TOL or abs(var_gap) > STANDARDIZATION_TOL:
        warnings.warn(
            f"{spec.kind} noise is not standardized: mean rate {mean_gap:.3e}, "
            f"variance rate 1{var_gap:+.3e}",
            stacklevel=3,
        )


def increments(spec: LevySpec, n: int, h: float, stream: RngStream) -> np.ndarray:
    """n independent increments of Z over steps of length h.

    Pure in its arguments: the same (spec, n, h, stream) always returns the same
    vector. Raises NumericalError if a non-finite draw survives one resample pass.
    """
    if n <= 0:
        raise DataError(f"need n >= 1 increments, got n={n}")
    if not h > 0:
        raise DataError(f"need h > 0, got h={h}")
    rng = stream.generator()
    z = _draw(spec, n, h, rng)
    bad = ~np.isfinite(z)
    if bad.any():
        z[bad] = _draw(spec, int(bad.sum()), h, rng)
        if not np.isfinite(z).all():
            raise NumericalError(
                f"non-finite {spec.kind} increments persisted after one resample "
                f"(h={h}, n={n}, seed={stream.seed}, stream={stream.stream_id})"
            )
    return z


def _draw(spec: LevySpec, n: int, h: float, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec, GaussianNoise):
        return rng.standard_normal(n) * math.sqrt(h)
    if isinstance(spec, NigNoise):
        return _draw_nig(spec, n, h, rng)
    if isinstance(spec, BilateralGammaNoise):
        gp = rng.gamma(shape=spec.shape_pos_rate * h, scale=1.0 / spec.rate_pos, size=n)
        gm = rng.gamma(shape=spec.shape_neg_rate * h, scale=1.0 / spec.rate_neg, size=n)
        return gp - gm
    raise DataError(f"unknown noise spec {spec!r}")


def _draw_nig(spec: NigNoise, n: int, h: float, rng: np.random.Generator) -> np.ndarray:
    """NIG increments by inverse-Gaussian subordination of a normal.

    The subordinator draw uses the Michael-Schucany-Haas transform with rejection:
    one chi-square root of the defining quadratic, accepted with probability
    m/(m+x), else folded to m^2/x.
    """
    dt_delta = spec.delta_rate * h
    m = dt_delta / spec.gamma_bar      # IG mean
    lam = dt_delta * dt_delta          # IG shape
    y = rng.standard_normal(n) ** 2
    my = m * y
    x = m + m * (my - np.sqrt(my * (4.0 * lam + my))) / (2.0 * lam)
    # roundoff can push the small root to 0-; keep the fold m^2/x finite
    x = np.maximum(x, np.finfo(float).tiny)
    u = rng.uniform(size=n)
    ig = np.where(u <= m / (m + x), x, m * m / x)
    return spec.mu_rate * h + spec.beta * ig + np.sqrt(ig) * rng.standard_normal(n)


def sample_cumulants(x: np.ndarray) -> np.ndarray:
    """Unbiased k-statistics (k1..k4) of a sample; the sampler's empirical check."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4:
        raise DataError(f"need at least 4 observations for k-statistics, got {n}")
    d = x - x.mean()
    m2 = np.mean(d**2)
    m3 = np.mean(d**3)
    m4 = np.mean(d**4)
    k1 = x.mean()
    k2 = n / (n - 1.0) * m2
    k3 = n * n * m3 / ((n - 1.0) * (n - 2.0))
    k4 = n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0))
    return np.array([k1, k2, k3, k4])


def spec_to_config(spec: LevySpec) -> dict:
    """Plain-dict form used in config files and embedded run metadata."""
    if isinstance(spec, GaussianNoise):
        return {"kind": "gaussian"}
    if isinstance(spec, NigNoise):
        return {
            "kind": "nig",
            "alpha": spec.alpha,
            "beta": spec.beta,
            "delta_rate": spec.delta_rate,
            "mu_rate": spec.mu_rate,
        }
    if isinstance(spec, BilateralGammaNoise):
        return {
            "kind": "bgamma",
            "shape_pos_rate": spec.shape_pos_rate,
            "rate_pos": spec.rate_pos,
            "shape_neg_rate": spec.shape_neg_rate,
            "rate_neg": spec.rate_neg,
        }
    raise DataError(f"unknown noise spec {spec!r}")


def spec_from_config(cfg: dict) -> LevySpec:
    """Inverse of spec_to_config; raises DataError on malformed input."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise DataError(f"noise config must be a dict with a 'kind' key, got {cfg!r}")
    kind = cfg["kind"]
    fields = {k: v for k, v in cfg.items() if k != "kind"}
    try:
        if kind == "gaussian":
            if fields:
                raise TypeError(f"unexpected keys {sorted(fields)}")
            return GaussianNoise()
        if kind == "nig":
            return NigNoise(**fields)
        if kind == "bgamma":
            return BilateralGammaNoise(**fields)
    except (TypeError, ValueError) as exc:
        raise DataError(f"bad {kind} noise config: {exc}") from exc
    raise DataError(f"unknown noise kind {kind!r}")
