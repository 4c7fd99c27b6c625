"""Signal plumbing: time grids, sample windows, reference schedules, measurement noise."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

# Default quantization step: a full turn split over an 11-bit encoder count.
DEFAULT_QUANTIZATION = 2.0 * math.pi / 2048.0

# Spacing jitter beyond this is a caller bug, not accumulated fp noise.
_SPACING_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Fixed-step clock: controller period h, run duration, integrator substeps per period."""

    h: float
    duration: float
    substeps: int = 10

    def __post_init__(self) -> None:
        if self.h <= 0.0:
            raise ValueError(f"controller period must be positive, got {self.h}")
        if self.substeps < 1:
            raise ValueError(f"substeps must be >= 1, got {self.substeps}")
        n = round(self.duration / self.h)
        if n < 1 or abs(self.duration - n * self.h) > 1e-12:
            raise ValueError(
                f"duration {self.duration} is not an integer number of periods h={self.h}"
            )

    @property
    def n_ticks(self) -> int:
        return round(self.duration / self.h)


@dataclass(frozen=True)
class ReferenceSegment:
    """One scheduled setpoint: the reference moves to `setpoint` starting at
    `start`, taking `transition` seconds, then holds."""

    start: float
    setpoint: float
    transition: float = 0.0


class ReferenceTrajectory:
    """Piecewise setpoint schedule joined by quintic blends.

    Each transition uses the 10x^3 - 15x^4 + 6x^5 profile, so position,
    velocity and acceleration are continuous everywhere and both endpoint
    derivatives vanish.  Outside the schedule the nearest setpoint is held
    with zero derivatives.
    """

    def __init__(self, segments) -> None:
        segs = tuple(
            s if isinstance(s, ReferenceSegment) else ReferenceSegment(*s) for s in segments
        )
        if not segs:
            raise ValueError("reference needs at least one segment")
        for seg in segs:
            if seg.transition < 0.0:
                raise ValueError("transition duration must be >= 0")
        for a, b in zip(segs, segs[1:]):
            if b.start <= a.start:
                raise ValueError("segment start times must be strictly increasing")
            if b.start < a.start + a.transition:
                raise ValueError("segment transitions must not overlap")
            if b.transition == 0.0 and b.setpoint != a.setpoint:
                raise ValueError("a setpoint change needs a positive transition duration")
        self.segments = segs

    def change_times(self) -> list[float]:
        """Start times of segments that move the setpoint (integrator reset instants)."""
        return [
            b.start for a, b in zip(self.segments, self.segments[1:]) if b.setpoint != a.setpoint
        ]

    def eval(self, t: float) -> tuple[float, float, float]:
        """Return (y_ref, dy_ref, ddy_ref) at time t."""
        segs = self.segments
        if t <= segs[0].start:
            return (segs[0].setpoint, 0.0, 0.0)
        i = 0
        for k, seg in enumerate(segs):
            if seg.start <= t:
                i = k
            else:
                break
        seg = segs[i]
        if seg.transition == 0.0 or t >= seg.start + seg.transition:
            return (seg.setpoint, 0.0, 0.0)
        prev = segs[i - 1].setpoint if i > 0 else segs[0].setpoint
        delta = seg.setpoint - prev
        T = seg.transition
        x = (t - seg.start) / T
        s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
        ds = x * x * (30.0 + x * (-60.0 + 30.0 * x))
        dds = x * (60.0 + x * (-180.0 + 120.0 * x))
        return (prev + delta * s, delta * ds / T, delta * dds / (T * T))


class SampleWindow:
    """Fixed-capacity rolling window of (timestamp, value) pairs, oldest first.

    Timestamps must arrive strictly increasing with uniform spacing (the first
    observed gap sets the spacing); once full, each push evicts the oldest pair.
    """

    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._entries: deque[tuple[float, float]] = deque(maxlen=capacity)
        self._spacing: float | None = None
        self._last_t: float | None = None

    def push(self, t: float, value: float) -> None:
        if self._last_t is not None:
            dt = t - self._last_t
            if dt <= 0.0:
                raise ValueError(f"non-monotone timestamp {t} after {self._last_t}")
            if self._spacing is None:
                self._spacing = dt
            elif abs(dt - self._spacing) > _SPACING_TOL:
                raise ValueError(f"uneven sample spacing {dt}, established {self._spacing}")
        self._last_t = t
        self._entries.append((t, float(value)))

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def full(self) -> bool:
        return len(self._entries) == self.capacity

    def times(self) -> list[float]:
        return [t for t, _ in self._entries]

    def values(self) -> np.ndarray:
        return np.fromiter((v for _, v in self._entries), dtype=float, count=len(self._entries))

    def shift_values(self, offset: float) -> None:
        """Add a constant to every stored value (timestamps untouched)."""
        shifted = [(t, v + offset) for t, v in self._entries]
        self._entries.clear()
        self._entries.extend(shifted)


class NoiseModel:
    """Measurement corruption: additive gaussian noise, then quantization to step q.

    q = 0 disables quantization, std = 0 skips the noise draw entirely; equal
    seeds reproduce the corruption sequence bit-exactly.
    """

    def __init__(self, quantization: float = 0.0, std: float = 0.0, seed: int = 0) -> None:
        if quantization < 0.0:
            raise ValueError("quantization step must be >= 0")
        if std < 0.0:
            raise ValueError("noise std must be >= 0")
        self.quantization = quantization
        self.std = std
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def reset(self) -> None:
        """Rewind the noise stream to its seed state."""
        self._rng = np.random.default_rng(self.seed)

    def corrupt(self, y_true: float) -> float:
        y = y_true
        if self.std > 0.0:
            y = y + self.std * self._rng.standard_normal()
        if self.quantization > 0.0:
            y = self.quantization * round(y / self.quantization)
        return float(y)
