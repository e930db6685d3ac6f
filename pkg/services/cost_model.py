"""QPU access time accounting used to compare forward and reverse annealing at equal cost.

total access time = (anneal + readout + delay) * samples + programming

All times are integer microseconds.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

READOUT_US = 123
PROGRAMMING_US = 8001
ROUNDED_REVERSE_RATIO = Fraction(24, 100)


@dataclass(frozen=True)
class CostModel:
    anneal_us: int
    readout_us: int
    delay_us: int
    programming_us: int

    def __post_init__(self):
        for name in ('anneal_us', 'readout_us', 'delay_us', 'programming_us'):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a nonnegative integer number of microseconds, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def per_sample_us(self) -> int:
        return self.anneal_us + self.readout_us + self.delay_us

    def to_dict(self):
        return {
            'anneal_us': self.anneal_us,
            'readout_us': self.readout_us,
            'delay_us': self.delay_us,
            'programming_us': self.programming_us,
        }


def default_forward_cost() -> CostModel:
    return CostModel(anneal_us=20, readout_us=READOUT_US, delay_us=21, programming_us=PROGRAMMING_US)


def default_reverse_cost() -> CostModel:
    # the 520 us delay is state preparation before every reverse anneal
    return CostModel(anneal_us=30, readout_us=READOUT_US, delay_us=520, programming_us=PROGRAMMING_US)


def access_time(model: CostModel, num_samples: int) -> int:
    if num_samples < 0:
        raise ValueError(f"num_samples must be nonnegative, got {num_samples}")
    return model.per_sample_us * int(num_samples) + model.programming_us


def reverse_ratio(forward: Optional[CostModel] = None, reverse: Optional[CostModel] = None,
                  rounded: bool = False) -> Fraction:
    """Reverse anneals affordable per forward anneal at equal access time."""
    if rounded:
        return ROUNDED_REVERSE_RATIO
    forward = forward or default_forward_cost()
    reverse = reverse or default_reverse_cost()
    return Fraction(forward.per_sample_us, reverse.per_sample_us)


def _round_half_up(value: Fraction) -> int:
    return (2 * value.numerator + value.denominator) // (2 * value.denominator)


def equal_time_reverse_count(forward_samples: int, forward: Optional[CostModel] = None,
                             reverse: Optional[CostModel] = None, rounded: bool = False) -> int:
    """Reverse sample count with the same per-QUBO access time as `forward_samples`.

    `rounded` uses the flat 0.24 factor (1000 forward -> 240 reverse) instead of the
    exact per-sample ratio (1000 -> 244).
    """
    if forward_samples < 1:
        raise ValueError(f"forward_samples must be at least 1, got {forward_samples}")
    return _round_half_up(forward_samples * reverse_ratio(forward, reverse, rounded))


def forward_count_for_reverse(reverse_samples: int, forward: Optional[CostModel] = None,
                              reverse: Optional[CostModel] = None, rounded: bool = False) -> int:
    if reverse_samples < 1:
        raise ValueError(f"reverse_samples must be at least 1, got {reverse_samples}")
    return _round_half_up(reverse_samples / reverse_ratio(forward, reverse, rounded))
