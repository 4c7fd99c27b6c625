"""Trace metrics and side-by-side controller comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import ReferenceTrajectory

# A settle only counts with this much in-band tail before the segment ends,
# so a single in-band sample at the boundary is not a settle.
MIN_SETTLE_DWELL = 0.5

# Oscillation counting: the error is box-smoothed over this many samples
# before differentiating, and derivative swings inside the hysteresis band are
# ignored. Together these keep encoder-quantization chatter out of the count
# while low-frequency limit cycles pass through.
OSCILLATION_SMOOTH_SAMPLES = 15
OSCILLATION_EPS = 5e-3


@dataclass(frozen=True)
class Metrics:
    """Aggregate tracking quality of one closed-loop trace.

    rmse and iae are computed on the recorded error e = y_measured - y_ref;
    motion-shape metrics (overshoot, settling, oscillation, recovery) use the
    true output so sensor quantization does not masquerade as motion.
    Settling times are relative to their segment's start; None marks a segment
    that never stayed inside the band.
    """

    rmse: float
    iae: float
    max_overshoot: float
    settling_time: float | None
    segment_settling_times: tuple[float | None, ...]
    oscillation_index: int
    recovery_times: tuple[float | None, ...]
    diverged: bool


def compute_metrics(
    records,
    reference: ReferenceTrajectory,
    disturbances=(),
    diverged: bool = False,
    band_fraction: float = 0.02,
) -> Metrics:
    """Score a trace against its reference schedule.

    The settle band is band_fraction times the largest setpoint change of the
    schedule (band_fraction itself if the schedule never moves).
    """
    if len(records) < 2:
        return Metrics(
            rmse=0.0, iae=0.0, max_overshoot=0.0, settling_time=None,
            segment_settling_times=(), oscillation_index=0, recovery_times=(),
            diverged=diverged,
        )
    t = np.array([r.t for r in records])
    e = np.array([r.e for r in records])
    y_true = np.array([r.y_true for r in records])
    y_ref = np.array([r.y_ref for r in records])
    e_true = y_true - y_ref
    h = t[1] - t[0]

    rmse = float(np.sqrt(np.mean(e * e)))
    iae = float(h * np.sum(np.abs(e)))

    box = np.ones(OSCILLATION_SMOOTH_SAMPLES) / OSCILLATION_SMOOTH_SAMPLES
    e_smooth = np.convolve(e_true, box, mode="same")
    de_smooth = np.diff(e_smooth) / h

    segs = reference.segments
    deltas = [
        (b.setpoint - a.setpoint) for a, b in zip(segs, segs[1:]) if b.setpoint != a.setpoint
    ]
    band = band_fraction * max((abs(d) for d in deltas), default=1.0)

    bounds = [s.start for s in segs] + [t[-1] + h]
    segment_settling: list[float | None] = []
    overshoots: list[float] = []
    oscillations = 0
    for i, seg in enumerate(segs):
        prev_sp = segs[i - 1].setpoint if i > 0 else segs[0].setpoint
        delta = seg.setpoint - prev_sp
        lo, hi = bounds[i], bounds[i + 1]
        mask = (t >= lo) & (t < hi)
        if not mask.any():
            continue
        ts = t[mask]
        es = e_true[mask]
        if delta != 0.0:
            overshoots.append(max(0.0, float(np.max((y_true[mask] - seg.setpoint) * np.sign(delta))) / abs(delta)))
            settle = _settle_time(ts, es, band, lo)
            segment_settling.append(settle)
        else:
            settle = _settle_time(ts, es, band, lo)
        start_at = lo + settle if settle is not None else 0.5 * (lo + min(hi, ts[-1] + h))
        tail_mask = (t[1:] >= start_at) & (t[1:] < hi)
        if int(tail_mask.sum()) >= 2:
            oscillations += _count_oscillations(de_smooth[tail_mask])

    if diverged:
        settling_time = None
        segment_settling = [None for _ in segment_settling]
    elif not segment_settling:
        settling_time = 0.0 if bool(np.all(np.abs(e_true) <= band)) else None
    elif any(s is None for s in segment_settling):
        settling_time = None
    else:
        settling_time = max(segment_settling)

    recovery: list[float | None] = []
    for ev in disturbances:
        end = ev.start + ev.duration
        mask = t >= end
        if not mask.any():
            recovery.append(None)
            continue
        ts = t[mask]
        es = e_true[mask]
        rec = _settle_time(ts, es, band, end)
        recovery.append(None if diverged else rec)

    return Metrics(
        rmse=rmse,
        iae=iae,
        max_overshoot=max(overshoots, default=0.0),
        settling_time=settling_time,
        segment_settling_times=tuple(segment_settling),
        oscillation_index=oscillations,
        recovery_times=tuple(recovery),
        diverged=diverged,
    )


def _settle_time(ts: np.ndarray, es: np.ndarray, band: float, origin: float):
    """Time after `origin` at which |e| enters the band and stays; None if it never does."""
    outside = np.abs(es) > band
    if not outside.any():
        return 0.0
    h = ts[1] - ts[0] if ts.size > 1 else 0.0
    last_out = ts[outside][-1]
    if ts[-1] - last_out < MIN_SETTLE_DWELL:
        return None
    return float(last_out + h - origin)


def _count_oscillations(de: np.ndarray, eps: float = OSCILLATION_EPS) -> int:
    """Sign alternations of the error derivative, with +-eps hysteresis."""
    count = 0
    state = 0
    for v in de:
        if v > eps:
            if state == -1:
                count += 1
            state = 1
        elif v < -eps:
            if state == 1:
                count += 1
            state = -1
    return count


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    k_i: float | None
    metrics: Metrics


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]
    # True/False when the rows form an integral-gain sweep, else None
    oscillation_monotone: bool | None

    def markdown(self) -> str:
        header = (
            "| controller | rmse | iae | overshoot | settling [s] | oscillations | diverged |"
        )
        rule = "|---|---|---|---|---|---|---|"
        lines = [header, rule]
        for row in self.rows:
            m = row.metrics
            settle = "-" if m.settling_time is None else f"{m.settling_time:.2f}"
            lines.append(
                f"| {row.label} | {m.rmse:.5f} | {m.iae:.4f} | {m.max_overshoot:.4f} "
                f"| {settle} | {m.oscillation_index} | {'yes' if m.diverged else 'no'} |"
            )
        if self.oscillation_monotone is not None:
            verdict = "non-decreasing" if self.oscillation_monotone else "NOT monotone"
            lines.append("")
            lines.append(
                f"Oscillation index across the integral-gain sweep: {verdict}."
            )
        return "\n".join(lines)


def build_comparison(rows) -> ComparisonReport:
    """Assemble a report; flags K_I-monotonicity when >= 2 rows carry an integral gain sweep."""
    rows = tuple(rows)
    swept = [r for r in rows if r.k_i is not None]
    monotone: bool | None = None
    if len(swept) >= 2:
        ordered = sorted(swept, key=lambda r: r.k_i)
        indices = [r.metrics.oscillation_index for r in ordered]
        monotone = all(a <= b for a, b in zip(indices, indices[1:]))
    return ComparisonReport(rows=rows, oscillation_monotone=monotone)
