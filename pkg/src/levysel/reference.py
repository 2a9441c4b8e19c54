"""Published selection frequencies for the benchmark experiment.

The packaged CSV holds, for each noise case, criterion pair, and sampling
grid, how often each of the twelve candidate combinations was selected out
of 1000 replications.  Counts are transcribed verbatim from the source
tables; two rows are known not to sum to 1000 there (see the CSV header),
so consumers should normalise by the actual row total, not by 1000.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import UsageError

REFERENCE_CASES = ("i", "ii", "iii")
REFERENCE_CRITERIA = ("faic", "gqaic", "gqbic", "gqbic-sharp")
REFERENCE_GRIDS = ((0.01, 10.0), (0.005, 10.0), (0.01, 50.0), (0.005, 50.0))

_DATA_FILE = "benchmark_selection_counts.csv"


@dataclass(frozen=True)
class ReferenceTable:
    """Selection counts for one (case, criterion, grid) cell of the benchmark.

    ``counts[d, s]`` is the number of replications in which drift candidate
    ``d + 1`` and scale candidate ``s + 1`` were selected jointly.
    """

    case: str
    criterion: str
    h: float
    t_n: float
    counts: np.ndarray

    @property
    def replications(self) -> int:
        return int(self.counts.sum())

    def frequency(self, drift: int, scale: int) -> float:
        """Relative selection frequency of 1-based candidate pair (drift, scale)."""
        return float(self.counts[drift - 1, scale - 1]) / self.replications

    def scale_marginal(self) -> np.ndarray:
        """Selection frequencies of the scale candidates, summed over drifts."""
        return self.counts.sum(axis=0) / self.replications

    def drift_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=1) / self.replications


def _load_rows() -> list[dict[str, str]]:
    text = resources.files("levysel.data").joinpath(_DATA_FILE).read_text()
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return list(csv.DictReader(lines))


def benchmark_reference(case: str, criterion: str, h: float, t_n: float) -> ReferenceTable:
    """Look up the bundled reference counts for one case, criterion pair, and grid.

    ``criterion`` uses the selection-pair labels (``faic``, ``gqaic``,
    ``gqbic``, ``gqbic-sharp``); only those four appear in the source.
    """
    if case not in REFERENCE_CASES:
        raise UsageError(f"unknown reference case {case!r}; expected one of {REFERENCE_CASES}")
    if criterion not in REFERENCE_CRITERIA:
        raise UsageError(
            f"no reference counts for criterion {criterion!r}; "
            f"available: {', '.join(REFERENCE_CRITERIA)}"
        )
    if not any(abs(h - gh) < 1e-12 and abs(t_n - gt) < 1e-9 for gh, gt in REFERENCE_GRIDS):
        raise UsageError(
            f"no reference grid point (h={h}, t_n={t_n}); available: {REFERENCE_GRIDS}"
        )
    counts = np.zeros((3, 4), dtype=int)
    seen = 0
    for row in _load_rows():
        if (
            row["case"] == case
            and row["criterion"] == criterion
            and abs(float(row["h"]) - h) < 1e-12
            and abs(float(row["t_n"]) - t_n) < 1e-9
        ):
            counts[int(row["drift"]) - 1, int(row["scale"]) - 1] = int(row["count"])
            seen += 1
    if seen != 12:
        raise UsageError(f"reference data incomplete for ({case}, {criterion}, {h}, {t_n})")
    return ReferenceTable(case=case, criterion=criterion, h=h, t_n=t_n, counts=counts)
