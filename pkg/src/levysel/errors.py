"""Exception hierarchy shared across the library and the CLI.

The CLI maps these onto process exit codes: UsageError -> 1, DataError -> 2,
NumericalError (and subclasses) -> 3.
"""


class LevyselError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class UsageError(LevyselError):
    """Bad flags, unknown names, inconsistent options."""

    exit_code = 1


class DataError(LevyselError):
    """Malformed input data or config files."""

    exit_code = 2


class NumericalError(LevyselError):
    """A computation failed numerically (optimization, linalg, quadrature)."""

    exit_code = 3


class DegenerateScaleError(NumericalError):
    """Squared scale fell below the positivity guard at some observation."""

    def __init__(self, index, value, s_min):
        self.index = int(index)
        self.value = float(value)
        self.s_min = float(s_min)
        super().__init__(
            f"squared scale {value:.3e} < s_min {s_min:.1e} at observation {index}"
        )


class ExplosionError(NumericalError):
    """Simulated trajectory left the explosion guard band."""

    def __init__(self, step, value, guard):
        self.step = int(step)
        self.value = float(value)
        self.guard = float(guard)
        super().__init__(
            f"trajectory explosion at fine step {step}: |X| = {abs(value):.3e} > {guard:.1e}"
        )


class FitError(NumericalError):
    """No optimizer start produced a finite objective."""


class SingularMatrixError(NumericalError):
    """An empirical information matrix is numerically singular."""


class QuadratureError(NumericalError):
    """Free-energy quadrature underflowed or failed to stabilize."""
