"""Peak identification, relative peakedness, fidelity error, and the
matrix difference used for cross-configuration comparison."""

from __future__ import annotations

from dataclasses import dataclass

from .circuits import BitString
from .errors import DomainMismatchError, UndefinedMetricError
from .sim import ShotHistogram


@dataclass(frozen=True)
class RunMetrics:
    """Per-run outcome: identification flag, empirical frequencies of the
    target and of its strongest competitor, the contrast c_exp, and the
    fidelity error (f clamped for reports, f_raw as computed)."""

    identified: bool
    p_hat_peak: float
    p_hat_second: float
    c_exp: float
    f: float
    f_raw: float


def identify(hist: ShotHistogram, target: BitString) -> bool:
    """True iff the target strictly out-counts every other outcome.

    A tie means the device failed to make the peak distinguishable, so
    ties are failures; this keeps the predicate deterministic.
    """
    if hist.shots == 0:
        raise UndefinedMetricError("empty histogram")
    t_count = hist.count(target)
    t_index = target.index
    return all(c < t_count for idx, c in hist.counts.items() if idx != t_index)


def strongest_competitor(hist: ShotHistogram, target: BitString) -> int:
    """Largest count among non-target outcomes (0 if there are none)."""
    t_index = target.index
    return max((c for idx, c in hist.counts.items() if idx != t_index), default=0)


def relative_peakedness(hist: ShotHistogram, target: BitString) -> float:
    """(p_peak - p_second) / (p_peak + p_second) over empirical frequencies,
    with p_peak the target's frequency; negative when a competitor wins."""
    if hist.shots == 0:
        raise UndefinedMetricError("empty histogram")
    peak = hist.count(target)
    second = strongest_competitor(hist, target)
    if peak + second == 0:
        raise UndefinedMetricError("target and strongest competitor both have zero counts")
    return (peak - second) / (peak + second)


def contrast_from_probabilities(p_peak: float, p_second: float) -> float:
    """Relative peakedness evaluated on exact probabilities (the
    infinite-shot limit)."""
    if p_peak + p_second <= 0:
        raise UndefinedMetricError("target and strongest competitor both have zero mass")
    return (p_peak - p_second) / (p_peak + p_second)


def fidelity_error(c_exp: float, c_max: float) -> float:
    """Raw fidelity error 1 - c_exp / c_max (no clamping)."""
    if c_max <= 0:
        raise UndefinedMetricError("c_max must be positive")
    return 1.0 - c_exp / c_max


def clamp_fidelity_error(f_raw: float) -> float:
    """Display value confined to [0, 1]; sampling noise can push c_exp a
    hair above c_max, and non-identified runs can push it below 0."""
    return min(1.0, max(0.0, f_raw))


def run_metrics(hist: ShotHistogram, target: BitString, c_max: float) -> RunMetrics:
    shots = hist.shots
    if shots == 0:
        raise UndefinedMetricError("empty histogram")
    peak = hist.count(target)
    second = strongest_competitor(hist, target)
    c_exp = relative_peakedness(hist, target)
    f_raw = fidelity_error(c_exp, c_max)
    return RunMetrics(
        identified=identify(hist, target),
        p_hat_peak=peak / shots,
        p_hat_second=second / shots,
        c_exp=c_exp,
        f=clamp_fidelity_error(f_raw),
        f_raw=f_raw,
    )


def delta_matrix(a, b) -> "DeltaGrid":
    """Cell-wise fidelity-error difference F_a - F_b over the shared grid.

    Only cells identified in both matrices carry a value; everything else
    is absent (None).  Inputs are BenchmarkMatrix objects.
    """
    if a.qubits != b.qubits or a.depths != b.depths:
        raise DomainMismatchError("benchmark matrices cover different (n, d) grids")
    values: dict[tuple[int, int], float | None] = {}
    for key, cell_a in a.cells.items():
        cell_b = b.cells[key]
        if cell_a.status == "identified" and cell_b.status == "identified":
            values[key] = cell_a.mean_f - cell_b.mean_f
        else:
            values[key] = None
    return DeltaGrid(qubits=tuple(a.qubits), depths=tuple(a.depths), values=values)


@dataclass(frozen=True)
class DeltaGrid:
    qubits: tuple[int, ...]
    depths: tuple[int, ...]
    values: dict[tuple[int, int], float | None]
