"""Empirical estimators over the departure record of one class."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class Estimate:
    """Across-replication mean with a Student-t confidence half-width."""

    mean: float
    half_width: float

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high


def mean_ci(values: Sequence[float], confidence: float = 0.95) -> Estimate:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise EstimationError("no values")
    mean = float(x.mean())
    if x.size < 2:
        return Estimate(mean, math.nan)
    sem = float(x.std(ddof=1)) / math.sqrt(x.size)
    return Estimate(mean, float(stats.t.ppf(0.5 + confidence / 2, x.size - 1)) * sem)


def _pairs(departures) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(departures, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise EstimationError("departures must be (sojourn, exit_time) pairs")
    return arr[:, 0], arr[:, 1]


def sawtooth_from_arrays(sojourn: np.ndarray, exits: np.ndarray) -> tuple[float, float, float]:
    if exits.size < 2:
        raise EstimationError(f"need at least 2 departures, got {exits.size}")
    gaps = np.diff(exits)
    if not np.all(gaps > 0):
        raise EstimationError("exit times must be strictly increasing")
    span = exits[-1] - exits[0]
    s = sojourn[:-1]
    left = float(np.dot(s, gaps)) / span
    half_sq = float(np.dot(gaps, gaps)) / (2.0 * span)
    return left, left + half_sq, left + 2.0 * half_sq


def estimate_age_sawtooth(departures) -> tuple[float, float, float]:
    """Time-average age and its left/right limits from ``(sojourn, exit_time)`` pairs.

    The window runs from the first to the last departure; on each gap ``D_i``
    after departure ``i`` the age rises linearly from ``S_i`` to ``S_i + D_i``.
    Returns ``(h_left, h, h_right)``.
    """
    sojourn, exits = _pairs(departures)
    return sawtooth_from_arrays(sojourn, exits)


def interdeparture_stats(exit_times) -> tuple[float, float]:
    """Sample mean and second moment of the gaps between successive exit times."""
    exits = np.asarray(exit_times, dtype=float)
    if exits.size < 2:
        raise EstimationError(f"need at least 2 departures, got {exits.size}")
    gaps = np.diff(exits)
    return float(gaps.mean()), float(np.mean(gaps * gaps))


def sojourn_stats(sojourns) -> float:
    s = np.asarray(sojourns, dtype=float)
    if s.size < 1:
        raise EstimationError("need at least 1 departure")
    return float(s.mean())


def peak_age_from_arrays(sojourn: np.ndarray, exits: np.ndarray) -> float:
    """Mean age just before each departure: ``S_i + D_i`` averaged over gaps."""
    if exits.size < 2:
        raise EstimationError(f"need at least 2 departures, got {exits.size}")
    return float(np.mean(sojourn[:-1] + np.diff(exits)))
