"""Fixed-step closed-loop simulation: measure, corrupt, control, hold, integrate."""

from __future__ import annotations

from dataclasses import dataclass

from .controllers import Controller, ControllerSpec
from .plants import PlantModel
from .signals import NoiseModel, ReferenceTrajectory, TimeGrid

# Any state component beyond this magnitude (or NaN) stops the run as diverged.
DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class TraceRecord:
    """One controller tick of a closed-loop run."""

    t: float
    y_true: float
    y_measured: float
    y_ref: float
    e: float
    u: float
    v1: float
    v2: float
    f_est: float
    warming_up: bool
    saturated: bool


@dataclass(frozen=True)
class SimResult:
    records: list[TraceRecord]
    diverged: bool


def rk4_step(f, state: tuple[float, ...], u: float, t: float, dt: float) -> tuple[float, ...]:
    """One classical Runge-Kutta step of x' = f(x, u, t) with u held constant."""
    k1 = f(state, u, t)
    k2 = f(_axpy(state, k1, 0.5 * dt), u, t + 0.5 * dt)
    k3 = f(_axpy(state, k2, 0.5 * dt), u, t + 0.5 * dt)
    k4 = f(_axpy(state, k3, dt), u, t + dt)
    sixth = dt / 6.0
    return tuple(
        x + sixth * (a + 2.0 * (b + c) + d) for x, a, b, c, d in zip(state, k1, k2, k3, k4)
    )


def _axpy(state, k, a):
    return tuple(x + a * v for x, v in zip(state, k))


def simulate(
    plant: PlantModel,
    controller_spec: ControllerSpec,
    reference: ReferenceTrajectory,
    noise: NoiseModel,
    grid: TimeGrid,
    initial_state: tuple[float, ...] | None = None,
) -> SimResult:
    """Run the closed loop over the grid and return the per-tick trace.

    Each tick: read the plant output, corrupt it, evaluate the reference,
    step the controller, then hold the command while the plant integrates
    `grid.substeps` RK4 steps across the period.  The run stops early with
    diverged=True if any state component leaves [-1e6, 1e6] or turns NaN.
    """
    noise.reset()
    controller = Controller(controller_spec, reference, grid.h)
    state = tuple(initial_state) if initial_state is not None else (0.0,) * plant.state_dim
    dt = grid.h / grid.substeps
    records: list[TraceRecord] = []
    diverged = False
    for i in range(grid.n_ticks):
        t = i * grid.h
        y_true = plant.output(state)
        y_measured = noise.corrupt(y_true)
        ref = reference.eval(t)
        step = controller.step(t, y_measured, ref)
        v1, v2 = plant.voltages(step.u)
        records.append(
            TraceRecord(
                t=t,
                y_true=y_true,
                y_measured=y_measured,
                y_ref=ref[0],
                e=step.e,
                u=step.u,
                v1=v1,
                v2=v2,
                f_est=step.f_est,
                warming_up=step.warming_up,
                saturated=step.saturated,
            )
        )
        for k in range(grid.substeps):
            state = rk4_step(plant.derivative, state, step.u, t + k * dt, dt)
        if not all(abs(x) < DIVERGENCE_LIMIT for x in state):
            diverged = True
            break
    return SimResult(records=records, diverged=diverged)
