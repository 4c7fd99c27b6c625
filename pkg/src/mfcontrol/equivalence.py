"""Classic-PID equivalents of the intelligent controllers' discrete update laws,
and closed-form stability verdicts for the third-order error dynamics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClassicGains:
    """Textbook PID gains; equivalence-mapped values may legitimately be negative."""

    k_p: float
    k_i: float = 0.0
    k_d: float = 0.0


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of the Routh test: per-condition slacks and their minimum."""

    hurwitz: bool
    conditions: tuple[tuple[str, float], ...]
    margin: float


def pi_from_ip(k_p_loop: float, alpha: float, h: float) -> ClassicGains:
    """Classic PI gains whose sampled velocity form reproduces the discrete
    intelligent-P update at period h.

    Sampling-tied: the map is valid only at this h and is not meant for
    transferring tunings in the reverse direction.
    """
    _check_alpha_h(alpha, h)
    return ClassicGains(k_p=-1.0 / (alpha * h), k_i=k_p_loop / (alpha * h), k_d=0.0)


def pid_from_ipd(k_p_loop: float, k_d_loop: float, alpha: float, h: float) -> ClassicGains:
    """Classic PID gains whose velocity form reproduces the discrete
    intelligent-PD update at period h.  Same sampling caveat as pi_from_ip.
    """
    _check_alpha_h(alpha, h)
    return ClassicGains(
        k_p=k_d_loop / (alpha * h),
        k_i=k_p_loop / (alpha * h),
        k_d=-1.0 / (alpha * h),
    )


def _check_alpha_h(alpha: float, h: float) -> None:
    if alpha == 0.0:
        raise ValueError("alpha must be nonzero")
    if h <= 0.0:
        raise ValueError("sampling period must be positive")


def hurwitz_cubic(k_p: float, k_i: float, k_d: float) -> StabilityVerdict:
    """Routh verdict for s^3 + K_D s^2 + K_P s + K_I (strict inequalities).

    K_I = 0 drops the order: the verdict then tests s^2 + K_D s + K_P.
    The margin is the smallest condition slack, so margin == 0 means at least
    one condition sits exactly on its boundary.
    """
    if k_i == 0.0:
        conditions = (("K_D > 0", k_d), ("K_P > 0", k_p))
    else:
        conditions = (
            ("K_D > 0", k_d),
            ("K_I > 0", k_i),
            ("K_D*K_P - K_I > 0", k_d * k_p - k_i),
        )
    margin = min(value for _, value in conditions)
    return StabilityVerdict(hurwitz=margin > 0.0, conditions=conditions, margin=margin)


def ip_recursion_sequence(errors, k_p_loop: float, alpha: float, h: float) -> np.ndarray:
    """Discrete intelligent-P command sequence driven by an error sequence.

    u(t) = u(t-h) - [e(t) - e(t-h)]/(h*alpha) + (K_P/alpha)*e(t), with zero
    initial history.
    """
    e = np.asarray(errors, dtype=float)
    e1 = np.concatenate(([0.0], e[:-1]))
    du = -(e - e1) / (h * alpha) + (k_p_loop / alpha) * e
    return np.cumsum(du)


def ipd_recursion_sequence(
    errors, k_p_loop: float, k_d_loop: float, alpha: float, h: float
) -> np.ndarray:
    """Discrete intelligent-PD command sequence driven by an error sequence.

    [u(t) - u(t-h)]/h = -dde(t)/(alpha*h) + (K_P/(alpha*h))*e(t)
                        + (K_D/(alpha*h))*de(t),
    with backward differences for de and dde and zero initial history.
    """
    e = np.asarray(errors, dtype=float)
    e1 = np.concatenate(([0.0], e[:-1]))
    e2 = np.concatenate(([0.0, 0.0], e[:-2]))
    du = (
        -(e - 2.0 * e1 + e2) / (alpha * h * h)
        + (k_p_loop / alpha) * e
        + (k_d_loop / alpha) * (e - e1) / h
    )
    return np.cumsum(du)


def pid_velocity_sequence(errors, gains: ClassicGains, h: float) -> np.ndarray:
    """Sampled velocity-form PID command sequence for the same error input.

    u(t) = u(t-h) + h*(k_p*de + k_i*e + k_d*dde), backward differences, zero
    initial history.  k_d = 0 gives the sampled PI.
    """
    e = np.asarray(errors, dtype=float)
    e1 = np.concatenate(([0.0], e[:-1]))
    e2 = np.concatenate(([0.0, 0.0], e[:-2]))
    du = gains.k_p * (e - e1) + h * gains.k_i * e + gains.k_d * (e - 2.0 * e1 + e2) / h
    return np.cumsum(du)


@dataclass(frozen=True)
class Fact1Row:
    k_p: float
    k_i: float
    hurwitz: bool
    settled: bool | None  # None when the simulation cross-check was skipped


@dataclass(frozen=True)
class Fact1Report:
    rows: tuple[Fact1Row, ...]

    @property
    def any_hurwitz(self) -> bool:
        return any(r.hurwitz for r in self.rows)

    @property
    def any_settled(self) -> bool:
        return any(bool(r.settled) for r in self.rows)


def demonstrate_fact1(
    kp_values=(1.0, 10.0, 100.0),
    ki_values=(1.0, 10.0, 100.0),
    run_simulations: bool = True,
    duration: float = 30.0,
) -> Fact1Report:
    """Show that dropping the derivative gain breaks second-order control.

    With K_D = 0 the error dynamics' s^2 coefficient vanishes, so the Routh
    test fails for every (K_P, K_I) on the grid; optionally each point is also
    simulated on the exact double-integrator plant to confirm the step response
    never settles into the 2% band.
    """
    rows = []
    for k_p in kp_values:
        for k_i in ki_values:
            verdict = hurwitz_cubic(k_p, k_i, 0.0)
            settled = None
            if run_simulations:
                settled = _step_settles(k_p, k_i, duration)
            rows.append(Fact1Row(k_p=k_p, k_i=k_i, hurwitz=verdict.hurwitz, settled=settled))
    return Fact1Report(rows=tuple(rows))


def _step_settles(k_p: float, k_i: float, duration: float) -> bool:
    # local imports: the simulation stack imports this module for ClassicGains
    from .controllers import ControllerSpec, GainSet
    from .estimation import UltraLocalConfig
    from .metrics import compute_metrics
    from .plants import DoubleIntegrator
    from .signals import NoiseModel, ReferenceTrajectory, TimeGrid
    from .sim import simulate

    spec = ControllerSpec(
        kind="ipid",
        gains=GainSet(k_p=k_p, k_i=k_i, k_d=0.0),
        ultra_local=UltraLocalConfig(alpha=10.0, order=2, window=30, h=0.01),
    )
    reference = ReferenceTrajectory([(0.0, 0.0, 0.0), (1.0, 1.0, 1.0)])
    grid = TimeGrid(h=0.01, duration=duration, substeps=10)
    result = simulate(DoubleIntegrator(10.0), spec, reference, NoiseModel(), grid)
    metrics = compute_metrics(result.records, reference, diverged=result.diverged)
    return (not result.diverged) and metrics.settling_time is not None
