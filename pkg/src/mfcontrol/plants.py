"""Simulated plants: a two-propeller pivoting-arm surrogate and exact oracle models."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

VOLTAGE_LIMIT = 24.0
VOLTAGE_OFFSET = 10.0


@dataclass(frozen=True)
class ActuatorCommand:
    """Motor voltages after mixing and supply clamping."""

    v1: float
    v2: float


def mix_voltages(u: float, limit: float = VOLTAGE_LIMIT) -> ActuatorCommand:
    """Split a scalar command into opposing motor voltages around the spin bias.

    u >= 0 gives (offset + u, -offset - u); u < 0 gives (-offset + u, offset - u);
    both voltages clamp to the supply limit.  u = 0 takes the positive branch.
    """
    if u >= 0.0:
        v1 = VOLTAGE_OFFSET + u
        v2 = -VOLTAGE_OFFSET - u
    else:
        v1 = -VOLTAGE_OFFSET + u
        v2 = VOLTAGE_OFFSET - u
    return ActuatorCommand(_clamp(v1, limit), _clamp(v2, limit))


def _clamp(v: float, limit: float) -> float:
    return min(max(v, -limit), limit)


@dataclass(frozen=True)
class DisturbanceEvent:
    """Constant bias torque applied over [start, start + duration)."""

    start: float
    duration: float
    torque: float

    def __post_init__(self) -> None:
        if self.duration < 0.0:
            raise ValueError("disturbance duration must be >= 0")

    def active(self, t: float) -> bool:
        return self.start <= t < self.start + self.duration


@dataclass(frozen=True)
class AeroSurrogateParams:
    """Pivoting-arm parameters: inertia, viscous friction, gravity lever, thrust gain.

    thrust_gain maps effective differential voltage (past the spin threshold)
    to net torque. Values are invented desk-scale stand-ins, sized so the
    torque, friction and gravity terms stay comparable under volt-scale
    commands.
    """

    inertia: float = 0.02
    friction: float = 0.10
    gravity: float = 0.50
    thrust_gain: float = 0.18

    def __post_init__(self) -> None:
        if self.inertia <= 0.0:
            raise ValueError("inertia must be positive")
        if self.friction < 0.0 or self.gravity < 0.0 or self.thrust_gain < 0.0:
            raise ValueError("friction, gravity and thrust_gain must be >= 0")


def rotor_thrust(v: float, threshold: float = VOLTAGE_OFFSET) -> float:
    """Normalized thrust of one rotor: zero below the spin threshold, linear past it.

    A propeller near standstill moves no meaningful air; the mixer's voltage
    offset exists precisely to hold both rotors at this threshold so the
    differential command acts without a gap. Modeled as a symmetric dead zone
    of width `threshold`.
    """
    if v > threshold:
        return v - threshold
    if v < -threshold:
        return v + threshold
    return 0.0


def aero_derivative(
    params: AeroSurrogateParams,
    state: tuple[float, float],
    cmd: ActuatorCommand,
    disturbances=(),
    t: float = 0.0,
) -> tuple[float, float]:
    """State derivative of the arm.

    theta'' = [k_t*(T(v1) - T(v2))/2 - b*theta' - c_g*sin(theta) + d(t)] / J
    with T the per-rotor dead-zone thrust map. Under the standard mixer this
    reduces to a net torque of k_t*u for |u| within the supply headroom.
    """
    theta, omega = state
    torque = params.thrust_gain * 0.5 * (rotor_thrust(cmd.v1) - rotor_thrust(cmd.v2))
    d = 0.0
    for ev in disturbances:
        if ev.active(t):
            d += ev.torque
    acc = (torque - params.friction * omega - params.gravity * math.sin(theta) + d) / params.inertia
    return (omega, acc)


class PlantModel(ABC):
    """Continuous-time plant driven by a zero-order-held scalar command."""

    state_dim: int = 2

    @abstractmethod
    def derivative(self, state: tuple[float, ...], u: float, t: float) -> tuple[float, ...]:
        """Time derivative of the state under held command u."""

    @abstractmethod
    def output(self, state: tuple[float, ...]) -> float:
        """Measured output."""

    def voltages(self, u: float) -> tuple[float, float]:
        """Actuator voltages recorded in traces; (0, 0) for plants without the mixer."""
        return (0.0, 0.0)


class AeroSurrogate(PlantModel):
    """Pivoting arm driven by two opposed propellers through the voltage mixer."""

    def __init__(self, params: AeroSurrogateParams | None = None, disturbances=()) -> None:
        self.params = params if params is not None else AeroSurrogateParams()
        self.disturbances = tuple(disturbances)

    def derivative(self, state, u, t):
        return aero_derivative(self.params, state, mix_voltages(u), self.disturbances, t)

    def output(self, state) -> float:
        return state[0]

    def voltages(self, u: float) -> tuple[float, float]:
        cmd = mix_voltages(u)
        return (cmd.v1, cmd.v2)


class DoubleIntegrator(PlantModel):
    """Exact oracle plant y'' = alpha_true * u."""

    def __init__(self, alpha_true: float = 10.0) -> None:
        self.alpha_true = alpha_true

    def derivative(self, state, u, t):
        return (state[1], self.alpha_true * u)

    def output(self, state) -> float:
        return state[0]
