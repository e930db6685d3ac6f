import numpy as np
import pytest

from solvers.schedules import AnnealSchedule, forward_schedule, reverse_schedule, temperatures


def _assert_points(schedule, expected):
    times, s_values = zip(*expected)
    np.testing.assert_allclose(schedule.times, times)
    np.testing.assert_allclose(schedule.s_values, s_values)


@pytest.mark.parametrize('r, t_r, expected', [
    (0.45, 10, [(0, 1), (10, 0.55), (20, 0.55), (30, 1)]),
    (1.0, 10, [(0, 1), (10, 0), (20, 0), (30, 1)]),
    (0.2, 10, [(0, 1), (10, 0.8), (20, 0.8), (30, 1)]),
    (0.4, 100, [(0, 1), (10, 0.6), (110, 0.6), (120, 1)]),
])
def test_reverse_schedule_points(r, t_r, expected):
    _assert_points(reverse_schedule(r, t_r), expected)


def test_forward_schedule_points():
    schedule = forward_schedule()
    _assert_points(schedule, [(0, 0), (20, 1)])
    assert schedule.duration == 20


@pytest.mark.parametrize('r, t_r', [(0.0, 10), (1.5, 10), (-0.1, 10), (0.5, 0), (0.5, -3)])
def test_reverse_schedule_rejects_out_of_range(r, t_r):
    with pytest.raises(ValueError):
        reverse_schedule(r, t_r)


def test_schedule_validation():
    with pytest.raises(ValueError):
        AnnealSchedule(((1, 0), (2, 1)))
    with pytest.raises(ValueError):
        AnnealSchedule(((0, 0), (0, 1)))
    with pytest.raises(ValueError):
        AnnealSchedule(((0, 0), (5, 1.2)))


def test_sweep_parameters_follow_the_path():
    schedule = reverse_schedule(0.5, 10)
    s = schedule.sweep_parameters(2)
    assert len(s) == schedule.sweep_count(2) == 60
    assert s[0] == pytest.approx(1 - 0.5 * 0.25 / 10)
    np.testing.assert_allclose(s[20:40], 0.5)
    assert s.min() >= 0.5 and s.max() <= 1.0


def test_temperatures_vanish_when_fully_annealed():
    np.testing.assert_allclose(temperatures([0.0, 0.5, 1.0], 4.0), [4.0, 2.0, 0.0])
