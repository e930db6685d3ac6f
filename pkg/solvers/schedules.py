from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

FORWARD_ANNEAL_US = 20
RAMP_US = 10


@dataclass(frozen=True)
class AnnealSchedule:
    """Piecewise-linear anneal path as (time in microseconds, s) breakpoints.

    s = 1 is the fully annealed (classical) end of the path.
    """

    points: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        points = tuple((float(t), float(s)) for t, s in self.points)
        if len(points) < 2:
            raise ValueError("an anneal schedule needs at least two points")
        if points[0][0] != 0.0:
            raise ValueError(f"schedule must start at t=0, starts at t={points[0][0]}")
        times = [t for t, _ in points]
        if any(later <= earlier for earlier, later in zip(times, times[1:])):
            raise ValueError(f"schedule times must be strictly increasing: {times}")
        if any(not 0.0 <= s <= 1.0 for _, s in points):
            raise ValueError("anneal parameter s must stay within [0, 1]")
        object.__setattr__(self, 'points', points)

    @property
    def duration(self) -> float:
        return self.points[-1][0]

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.points])

    @property
    def s_values(self) -> np.ndarray:
        return np.array([s for _, s in self.points])

    def s_at(self, t):
        return np.interp(t, self.times, self.s_values)

    def sweep_count(self, sweeps_per_microsecond: int) -> int:
        return int(round(self.duration * sweeps_per_microsecond))

    def sweep_parameters(self, sweeps_per_microsecond: int) -> np.ndarray:
        """s sampled at the midpoint of each Metropolis sweep."""
        count = self.sweep_count(sweeps_per_microsecond)
        midpoints = (np.arange(count) + 0.5) / sweeps_per_microsecond
        return self.s_at(midpoints)

    def as_list(self) -> List[Tuple[float, float]]:
        return list(self.points)


def forward_schedule() -> AnnealSchedule:
    """Default forward anneal: s ramps from 0 to 1 over 20 microseconds."""
    return AnnealSchedule(((0, 0), (FORWARD_ANNEAL_US, 1)))


def reverse_schedule(r: float, t_r: float) -> AnnealSchedule:
    """Reverse anneal of depth r held for t_r microseconds.

    Args:
        r (float):
            Reversal distance in (0, 1]. The schedule dips from s=1 to s=1-r.

        t_r (float):
            Reversal time, how long the schedule pauses at s=1-r.

    Returns:
        AnnealSchedule: [(0, 1), (10, 1-r), (10+t_r, 1-r), (20+t_r, 1)]
    """
    if not 0 < r <= 1:
        raise ValueError(f"reversal distance r must be in (0, 1], got {r}")
    if t_r <= 0:
        raise ValueError(f"reversal time t_r must be positive, got {t_r}")
    return AnnealSchedule((
        (0, 1),
        (RAMP_US, 1 - r),
        (RAMP_US + t_r, 1 - r),
        (2 * RAMP_US + t_r, 1),
    ))


def temperatures(schedule_s: Sequence[float], hot_temperature: float) -> np.ndarray:
    """Map the anneal parameter to a classical temperature, T(s) = T_hot * (1 - s)."""
    return hot_temperature * (1.0 - np.asarray(schedule_s, dtype=np.float64))
