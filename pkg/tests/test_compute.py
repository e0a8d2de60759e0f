"""Compute schedule model and frame clock tests."""

import math

import pytest

from nanoswarm.compute import (
    ComputeTaskSpec,
    DRONET_TASK,
    PROFILES,
    SSD_TASK,
    ScheduleModel,
    VISION_TASK_NAME,
    effective_rate,
    frame_clock,
    rate_or_zero,
)


class TestTaskSpec:
    def test_latency_validation(self):
        with pytest.raises(ValueError):
            ComputeTaskSpec("bad", 0.0)

    def test_metadata_echoed(self):
        assert DRONET_TASK.parameters_mb == pytest.approx(0.0832)
        assert SSD_TASK.power_mw == pytest.approx(134.0)


class TestScheduleModel:
    def test_cycle_time_is_sum_plus_overhead(self):
        m = ScheduleModel((SSD_TASK, DRONET_TASK), overhead=0.02)
        assert m.cycle_time == pytest.approx(0.5892 + 0.0159 + 0.02)

    def test_task_lookup(self):
        m = PROFILES["ssd_dronet"]
        assert m.task("dronet") is DRONET_TASK
        with pytest.raises(KeyError):
            m.task("segmentation")
        assert m.has_task("ssd_mbv2") and not m.has_task("segmentation")

    def test_interleaving_rates(self):
        # Both tasks in the shared engine run at the same cycle rate,
        # 1 / 0.6251 s = 1.6 Hz.
        m = PROFILES["ssd_dronet"]
        assert effective_rate(m, "dronet") == pytest.approx(1.5997, abs=1e-3)
        assert effective_rate(m, "ssd_mbv2") == pytest.approx(1.5997, abs=1e-3)

    def test_peak_rate(self):
        assert effective_rate(PROFILES["dronet_peak"], "dronet") == pytest.approx(
            62.9, abs=0.05
        )

    def test_five_hz_profile(self):
        assert effective_rate(PROFILES["dronet_5hz"], "dronet") == pytest.approx(
            5.0, abs=0.005
        )

    def test_rate_or_zero(self):
        assert rate_or_zero(None, VISION_TASK_NAME) == 0.0
        assert rate_or_zero(PROFILES["none"], VISION_TASK_NAME) == 0.0
        m = PROFILES["dronet_peak"]
        assert rate_or_zero(m, "segmentation") == 0.0
        assert rate_or_zero(m, "dronet") == effective_rate(m, "dronet")

    def test_standalone_rate_exceeds_interleaved(self):
        interleaved = effective_rate(PROFILES["ssd_dronet"], "dronet")
        alone = effective_rate(PROFILES["dronet_peak"], "dronet")
        assert alone > 30 * interleaved


class TestFrameClock:
    def test_zero_rate_never_grants(self):
        assert not any(frame_clock(0.0, k * 0.01, 0.01) for k in range(1, 1000))

    def test_grant_count_matches_rate(self):
        # Over T seconds at rate f the clock grants floor(T * f) frames.
        dt = 0.01
        for rate in (1.0, 1.6, 2.0, 5.0, 7.3, 10.0, 62.9):
            grants = sum(
                frame_clock(rate, (k + 1) * dt, dt) for k in range(6000)
            )
            assert grants == math.floor(60.0 * rate + 1e-6), rate

    def test_first_grant_at_one_period(self):
        dt = 0.01
        first = next(
            (k + 1) * dt for k in range(10000) if frame_clock(5.0, (k + 1) * dt, dt)
        )
        assert first == pytest.approx(0.2)

    def test_even_spacing(self):
        dt = 0.01
        times = [
            (k + 1) * dt for k in range(20000) if frame_clock(2.5, (k + 1) * dt, dt)
        ]
        gaps = {round(b - a, 6) for a, b in zip(times, times[1:])}
        assert gaps == {0.4}

    def test_rate_faster_than_tick_grants_every_tick(self):
        dt = 0.01
        grants = [frame_clock(200.0, (k + 1) * dt, dt) for k in range(100)]
        assert all(grants)
