"""Tracking metrics and the comparison report builder."""

import math

import numpy as np
import pytest

from mfcontrol import (
    ComparisonRow,
    Metrics,
    ReferenceTrajectory,
    TraceRecord,
    build_comparison,
    compute_metrics,
)
from mfcontrol.metrics import _count_oscillations

HOLD = ReferenceTrajectory(((0.0, 0.0, 0.0),))
STEP = ReferenceTrajectory(((0.0, 0.0, 0.0), (1.0, 0.5, 1.0)))


def _records(t, y_true, y_ref=None, e=None):
    t = np.asarray(t, dtype=float)
    y_true = np.asarray(y_true, dtype=float)
    y_ref = np.zeros_like(t) if y_ref is None else np.asarray(y_ref, dtype=float)
    e = y_true - y_ref if e is None else np.asarray(e, dtype=float)
    return [
        TraceRecord(
            t=tk, y_true=yk, y_measured=yk, y_ref=rk, e=ek, u=0.0,
            v1=0.0, v2=0.0, f_est=0.0, warming_up=False, saturated=False,
        )
        for tk, yk, rk, ek in zip(t, y_true, y_ref, e)
    ]


def _step_records(h=0.01, duration=6.0, tau=0.25):
    # first-order approach to the moved setpoint: no overshoot, clean settle
    t = np.arange(0.0, duration, h)
    y_ref = np.array([STEP.eval(tk)[0] for tk in t])
    y = np.where(t < 1.0, 0.0, 0.5 * (1.0 - np.exp(-(t - 1.0) / tau)))
    return t, y, y_ref


class TestComputeMetrics:
    def test_rmse_of_sine_error(self):
        t = np.arange(0.0, 1.0, 0.001)
        e = 0.1 * np.sin(2.0 * math.pi * t)
        m = compute_metrics(_records(t, e), HOLD)
        assert m.rmse == pytest.approx(0.1 / math.sqrt(2.0), rel=1e-9)

    def test_iae_of_constant_error(self):
        t = np.arange(0.0, 2.0, 0.01)
        m = compute_metrics(_records(t, np.full_like(t, 0.3)), HOLD)
        assert m.iae == pytest.approx(0.3 * 2.0, rel=1e-2)

    def test_metric_bounds(self):
        rng = np.random.default_rng(2)
        t = np.arange(0.0, 3.0, 0.01)
        e = rng.normal(0.0, 0.1, size=t.size)
        m = compute_metrics(_records(t, e), HOLD)
        assert m.iae >= 0.0
        assert m.rmse**2 <= np.max(np.abs(e)) ** 2 + 1e-15

    def test_settling_time_of_exponential_approach(self):
        t, y, y_ref = _step_records()
        m = compute_metrics(_records(t, y, y_ref), STEP)
        # 2 percent of the 0.5 step: enter at tau*ln(50) after the move
        expect = 0.25 * math.log(50.0)
        assert m.settling_time == pytest.approx(expect, abs=0.05)
        assert m.segment_settling_times[-1] == m.settling_time
        assert m.max_overshoot == pytest.approx(0.0, abs=1e-9)

    def test_settled_trace_stays_in_band(self):
        t, y, y_ref = _step_records()
        m = compute_metrics(_records(t, y, y_ref), STEP)
        band = 0.02 * 0.5
        settle_at = 1.0 + m.settling_time
        tail = np.abs(y - y_ref)[t >= settle_at + 0.01]
        assert np.all(tail <= band + 1e-12)

    def test_unsettled_when_tail_dwell_too_short(self):
        # error re-enters the band only at the very end: no settle call
        t = np.arange(0.0, 6.0, 0.01)
        y_ref = np.array([STEP.eval(tk)[0] for tk in t])
        y = np.where(t < 5.9, y_ref + 0.1, y_ref)
        m = compute_metrics(_records(t, y, y_ref), STEP)
        assert m.settling_time is None

    def test_overshoot_fraction_of_step(self):
        t = np.arange(0.0, 6.0, 0.01)
        y_ref = np.array([STEP.eval(tk)[0] for tk in t])
        y = y_ref.copy()
        y[t >= 2.0] = 0.5
        y[(t >= 2.0) & (t < 2.2)] = 0.56  # 12 percent past the 0.5 target
        m = compute_metrics(_records(t, y, y_ref), STEP)
        assert m.max_overshoot == pytest.approx(0.12, abs=0.01)

    def test_diverged_flag_blanks_settling(self):
        t, y, y_ref = _step_records()
        m = compute_metrics(_records(t, y, y_ref), STEP, diverged=True)
        assert m.diverged
        assert m.settling_time is None

    def test_recovery_time_after_disturbance(self):
        from mfcontrol import DisturbanceEvent

        t = np.arange(0.0, 10.0, 0.01)
        y = np.zeros_like(t)
        kick = (t >= 3.0) & (t < 5.8)  # 0.8 s past the event end
        y[kick] = 0.2
        m = compute_metrics(
            _records(t, y), HOLD, disturbances=(DisturbanceEvent(3.0, 2.0, 0.05),)
        )
        assert len(m.recovery_times) == 1
        assert m.recovery_times[0] == pytest.approx(0.8, abs=0.05)

    def test_oscillation_index_counts_reversals(self):
        h = 0.01
        t = np.arange(0.0, 8.0, h)
        wobble = 0.05 * np.sin(2.0 * math.pi * 1.0 * t)  # 1 Hz, 8 s
        m_wobble = compute_metrics(_records(t, wobble), HOLD)
        m_flat = compute_metrics(_records(t, np.zeros_like(t)), HOLD)
        assert m_flat.oscillation_index == 0
        # never settles, so counting starts at the hold's midpoint: the last
        # 4 s of a 1 Hz sine reverse direction twice per cycle
        assert 7 <= m_wobble.oscillation_index <= 9

    def test_empty_trace(self):
        m = compute_metrics([], HOLD)
        assert m.rmse == 0.0 and m.settling_time is None


class TestCountOscillations:
    def test_single_signed_derivative_has_none(self):
        assert _count_oscillations(np.full(50, 0.3)) == 0
        assert _count_oscillations(np.full(50, -0.3)) == 0

    def test_hysteresis_suppresses_dither(self):
        de = np.tile([1e-4, -1e-4], 200)  # below the threshold band
        assert _count_oscillations(de) == 0

    def test_square_wave_counts_flips(self):
        de = np.tile([0.5] * 10 + [-0.5] * 10, 5)
        assert _count_oscillations(de) == 9


class TestComparisonReport:
    def _metrics(self, osc):
        return Metrics(
            rmse=0.01, iae=0.1, max_overshoot=0.0, settling_time=1.0,
            segment_settling_times=(1.0,), oscillation_index=osc,
            recovery_times=(), diverged=False,
        )

    def test_sweep_monotonicity_ignores_row_order(self):
        rows = [
            ComparisonRow("c", k_i=0.1, metrics=self._metrics(40)),
            ComparisonRow("a", k_i=0.001, metrics=self._metrics(8)),
            ComparisonRow("b", k_i=0.01, metrics=self._metrics(9)),
        ]
        report = build_comparison(rows)
        # presentation order is preserved; the verdict sorts by gain internally
        assert [r.label for r in report.rows] == ["c", "a", "b"]
        assert report.oscillation_monotone is True

    def test_non_monotone_flagged(self):
        rows = [
            ComparisonRow("a", k_i=0.001, metrics=self._metrics(20)),
            ComparisonRow("b", k_i=0.01, metrics=self._metrics(9)),
        ]
        assert build_comparison(rows).oscillation_monotone is False

    def test_unswept_rows_have_no_monotone_verdict(self):
        rows = [ComparisonRow("ip", k_i=None, metrics=self._metrics(8))]
        assert build_comparison(rows).oscillation_monotone is None

    def test_markdown_table_shape(self):
        rows = [ComparisonRow("ipd", k_i=None, metrics=self._metrics(8))]
        text = build_comparison(rows).markdown()
        lines = text.splitlines()
        assert lines[0].startswith("| controller |")
        assert len(lines) == 3
        assert "ipd" in lines[2]

    def test_empty_report(self):
        report = build_comparison([])
        assert report.rows == ()
        assert report.oscillation_monotone is None
        assert report.markdown().count("\n") <= 2
