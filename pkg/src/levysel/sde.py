"""Sample paths and Euler simulation of the data-generating equation.

The observed process solves dX_t = A(X_t) dt + C(X_{t-}) dZ_t on an equispaced grid
t_j = j*h. Simulation runs an Euler scheme on a grid `refine` times finer than the
observation grid and records every refine-th point, so discretization bias in the
recorded increments is an order below the sampling error the estimators see.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DataError, ExplosionError, NumericalError
from .noise import LevySpec, increments
from .rng import RngStream

EXPLOSION_GUARD = 1e12


@dataclass(frozen=True)
class PathMeta:
    """Sampling design of a path: number of increments and step size."""

    n: int
    h: float

    @property
    def t_n(self) -> float:
        return self.n * self.h


@dataclass(frozen=True)
class TrueModel:
    """Data-generating drift A and scale C with the initial state."""

    drift: Callable[[float], float]
    scale: Callable[[float], float]
    x0: float = 0.0


class SamplePath:
    """Equispaced observations X_0, X_h, ..., X_{nh}."""

    def __init__(self, h: float, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise DataError(f"a path needs at least 2 observations, got shape {values.shape}")
        if not np.isfinite(values).all():
            j = int(np.flatnonzero(~np.isfinite(values))[0])
            raise DataError(f"non-finite observation at index {j}")
        if not h > 0:
            raise DataError(f"need h > 0, got h={h}")
        self.h = float(h)
        self.values = values

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def t_n(self) -> float:
        return self.n * self.h

    @property
    def meta(self) -> PathMeta:
        return PathMeta(n=self.n, h=self.h)

    def state_values(self) -> np.ndarray:
        """X_{t_0}, ..., X_{t_{n-1}}: the states the coefficients are evaluated at."""
        return self.values[:-1]

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def __repr__(self):
        return f"SamplePath(n={self.n}, h={self.h})"

    def to_csv(self, target, config: Optional[dict] = None) -> None:
        """Write time,value rows with 17 significant digits.

        `config` (resolved run settings, seed included) is embedded as a leading
        '# ' comment so the file documents how it was produced.
        """
        own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
        f = open(target, "w") if own else target
        try:
            if config is not None:
                f.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
            f.write("time,value\n")
            for j, v in enumerate(self.values):
                f.write(f"{j * self.h:.17g},{v:.17g}\n")
        finally:
            if own:
                f.close()

    @classmethod
    def from_csv(cls, source, h: Optional[float] = None) -> "SamplePath":
        """Read a path written by to_csv (or any time,value CSV).

        The time column must be equispaced to 1e-6 relative. The step is its
        median difference unless `h` is given, which takes over for files whose
        time column is an index or in other units.
        """
        own = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
        f = open(source, "r") if own else source
        try:
            lines = f.readlines()
        finally:
            if own:
                f.close()
        rows = [
            (k + 1, line.strip())
            for k, line in enumerate(lines)
            if line.strip() and not line.lstrip().startswith("#")
        ]
        if not rows:
            raise DataError("empty CSV: no data rows found")
        header_lineno, header = rows[0]
        if [c.strip().lower() for c in header.split(",")] != ["time", "value"]:
            raise DataError(
                f"line {header_lineno}: expected header 'time,value', got {header!r}"
            )
        times, values = [], []
        for lineno, line in rows[1:]:
            parts = line.split(",")
            if len(parts) != 2:
                raise DataError(f"line {lineno}: expected 2 columns, got {len(parts)}")
            try:
                times.append(float(parts[0]))
                values.append(float(parts[1]))
            except ValueError as exc:
                raise DataError(f"line {lineno}: {exc}") from exc
        if len(values) < 2:
            raise DataError(f"need at least 2 data rows, got {len(values)}")
        dt = np.diff(times)
        ref = float(np.median(dt))
        if not ref > 0:
            raise DataError(f"nonincreasing time column (median step {ref:.17g})")
        bad = np.flatnonzero(np.abs(dt - ref) > 1e-6 * ref)
        if bad.size:
            k = int(bad[0])
            raise DataError(
                f"line {rows[1 + k + 1][0]}: time step {dt[k]:.17g} deviates from "
                f"h={ref:.17g} beyond 1e-6 relative"
            )
        step = ref if h is None else float(h)
        if not step > 0:
            raise DataError(f"nonpositive time step {step}")
        return cls(h=step, values=np.asarray(values))


def euler_path(
    model: TrueModel,
    spec: LevySpec,
    n: int,
    h: float,
    stream: RngStream,
    refine: int = 10,
    guard: float = EXPLOSION_GUARD,
) -> SamplePath:
    """Simulate n observation steps of size h, Euler stepping at h/refine."""
    if n < 1:
        raise DataError(f"need n >= 1, got n={n}")
    if refine < 1:
        raise DataError(f"need refine >= 1, got refine={refine}")
    hf = h / refine
    dz = increments(spec, n * refine, hf, stream).tolist()
    drift, scale = model.drift, model.scale
    x = float(model.x0)
    out = np.empty(n + 1)
    out[0] = x
    k = 0
    for j in range(1, n + 1):
        for _ in range(refine):
            x = x + drift(x) * hf + scale(x) * dz[k]
            k += 1
            if not (-guard < x < guard):
                if math.isnan(x):
                    raise NumericalError(f"state became NaN at fine step {k}")
                raise ExplosionError(step=k, value=x, guard=guard)
        out[j] = x
    return SamplePath(h=h, values=out)
