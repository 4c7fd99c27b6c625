"""Built-in benchmark catalog: nine canned closed-loop runs on the rotor surrogate.

Runs 1-3 drive the first-order loop shape, 4-6 the proportional-derivative
shape, 7-9 sweep the integral gain upward. Runs 3 and 6 inject a torque bias
mid-run; runs 2 and 5 use the longer alternating-sign schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .controllers import ControllerSpec, GainSet
from .estimation import UltraLocalConfig
from .metrics import ComparisonReport, ComparisonRow, Metrics, build_comparison, compute_metrics
from .plants import AeroSurrogate, AeroSurrogateParams, DisturbanceEvent
from .signals import (
    DEFAULT_QUANTIZATION,
    NoiseModel,
    ReferenceSegment,
    ReferenceTrajectory,
    TimeGrid,
)
from .sim import SimResult, simulate

ALPHA = 10.0
K_P = 25.0
K_D = 10.0
KI_VALUES = (0.001, 0.01, 0.1)
LOOP_PERIOD = 0.01
WINDOW_SAMPLES = 30
DURATION = 30.0

# Command authority left after the differential-voltage offset is spent.
U_LIMIT = 14.0

DISTURBANCE_START = 15.0
DISTURBANCE_DURATION = 5.0
DISTURBANCE_TORQUE = 0.05

# Integral-gain multiplier applied to KI_VALUES by default. The deterioration
# threshold depends on the plant, so the surrogate sweeps scaled values; the
# tested claim is monotonicity, not the absolute numbers.
DEFAULT_KI_SCALE = 1.0

SIMPLE_SEGMENTS = (
    ReferenceSegment(start=0.0, setpoint=0.0),
    ReferenceSegment(start=2.0, setpoint=0.5, transition=2.0),
    ReferenceSegment(start=10.0, setpoint=0.0, transition=2.0),
)

COMPLEX_SEGMENTS = (
    ReferenceSegment(start=0.0, setpoint=0.0),
    ReferenceSegment(start=2.0, setpoint=0.5, transition=2.0),
    ReferenceSegment(start=7.0, setpoint=-0.3, transition=2.0),
    ReferenceSegment(start=13.0, setpoint=0.4, transition=2.0),
    ReferenceSegment(start=19.0, setpoint=-0.2, transition=2.0),
    ReferenceSegment(start=25.0, setpoint=0.0, transition=2.0),
)

FAMILIES = ("ip-vs-ipd", "ipid-sweep")


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything one closed-loop run needs, minus the noise seed."""

    id: int
    label: str
    controller: ControllerSpec
    reference: ReferenceTrajectory
    grid: TimeGrid
    plant_params: AeroSurrogateParams
    disturbances: tuple[DisturbanceEvent, ...] = ()
    quantization: float = DEFAULT_QUANTIZATION
    noise_std: float = 0.0
    initial_state: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class ScenarioResult:
    spec: ScenarioSpec
    result: SimResult
    metrics: Metrics


def _ip_spec(k_p: float = K_P) -> ControllerSpec:
    return ControllerSpec(
        kind="ip",
        gains=GainSet(k_p=k_p),
        ultra_local=UltraLocalConfig(alpha=ALPHA, order=1, window=WINDOW_SAMPLES, h=LOOP_PERIOD),
        u_limits=(-U_LIMIT, U_LIMIT),
    )


def _ipd_spec(k_i: float = 0.0) -> ControllerSpec:
    kind = "ipid" if k_i > 0.0 else "ipd"
    return ControllerSpec(
        kind=kind,
        gains=GainSet(k_p=K_P, k_i=k_i, k_d=K_D),
        ultra_local=UltraLocalConfig(alpha=ALPHA, order=2, window=WINDOW_SAMPLES, h=LOOP_PERIOD),
        u_limits=(-U_LIMIT, U_LIMIT),
    )


def builtin_scenarios(ki_scale: float = DEFAULT_KI_SCALE) -> tuple[ScenarioSpec, ...]:
    """The nine-run catalog; ki_scale multiplies the integral gains of runs 7-9."""
    if ki_scale <= 0.0:
        raise ValueError("ki_scale must be positive")
    grid = TimeGrid(h=LOOP_PERIOD, duration=DURATION)
    params = AeroSurrogateParams()
    simple = ReferenceTrajectory(SIMPLE_SEGMENTS)
    complex_ = ReferenceTrajectory(COMPLEX_SEGMENTS)
    bias = (
        DisturbanceEvent(
            start=DISTURBANCE_START, duration=DISTURBANCE_DURATION, torque=DISTURBANCE_TORQUE
        ),
    )

    def make(sid, label, controller, reference, disturbances=()):
        return ScenarioSpec(
            id=sid,
            label=label,
            controller=controller,
            reference=reference,
            grid=grid,
            plant_params=params,
            disturbances=disturbances,
        )

    scenarios = [
        make(1, "first-order loop, simple schedule", _ip_spec(), simple),
        make(2, "first-order loop, alternating schedule", _ip_spec(), complex_),
        make(3, "first-order loop, torque bias", _ip_spec(), simple, bias),
        make(4, "PD loop, simple schedule", _ipd_spec(), simple),
        make(5, "PD loop, alternating schedule", _ipd_spec(), complex_),
        make(6, "PD loop, torque bias", _ipd_spec(), simple, bias),
    ]
    for offset, k_i in enumerate(KI_VALUES):
        scenarios.append(
            make(
                7 + offset,
                f"PID loop, integral gain {k_i * ki_scale:g}",
                _ipd_spec(k_i=k_i * ki_scale),
                simple,
            )
        )
    return tuple(scenarios)


def get_scenario(sid: int, ki_scale: float = DEFAULT_KI_SCALE) -> ScenarioSpec:
    for spec in builtin_scenarios(ki_scale):
        if spec.id == sid:
            return spec
    raise KeyError(f"unknown scenario id {sid}; catalog has 1..9")


def run_scenario(spec: ScenarioSpec, seed: int = 0) -> ScenarioResult:
    """Simulate one catalog entry; the noise stream is seeded by seed + spec.id."""
    noise = NoiseModel(
        quantization=spec.quantization, std=spec.noise_std, seed=seed + spec.id
    )
    plant = AeroSurrogate(spec.plant_params, disturbances=spec.disturbances)
    result = simulate(
        plant=plant,
        controller_spec=spec.controller,
        reference=spec.reference,
        noise=noise,
        grid=spec.grid,
        initial_state=spec.initial_state,
    )
    metrics = compute_metrics(
        result.records,
        spec.reference,
        disturbances=spec.disturbances,
        diverged=result.diverged,
    )
    return ScenarioResult(spec=spec, result=result, metrics=metrics)


def family_variants(
    family: str, ki_scale: float = DEFAULT_KI_SCALE
) -> tuple[tuple[str, float | None, ScenarioSpec], ...]:
    """(label, swept integral gain or None, spec) rows for a named comparison family."""
    if family == "ip-vs-ipd":
        base = builtin_scenarios(ki_scale)
        return (
            ("ip", None, base[0]),
            ("ipd", None, base[3]),
        )
    if family == "ipid-sweep":
        base = builtin_scenarios(ki_scale)
        rows: list[tuple[str, float | None, ScenarioSpec]] = [
            ("ipd (K_I=0)", 0.0, base[3])
        ]
        for spec, k_i in zip(base[6:9], KI_VALUES):
            rows.append((f"ipid (K_I={k_i * ki_scale:g})", k_i * ki_scale, spec))
        return tuple(rows)
    raise KeyError(f"unknown family {family!r}; known families: {', '.join(FAMILIES)}")


def compare_family(
    family: str, ki_scale: float = DEFAULT_KI_SCALE, seed: int = 0
) -> tuple[ComparisonReport, tuple[ScenarioResult, ...]]:
    """Run every variant of a family and fold the metrics into one report."""
    variants = family_variants(family, ki_scale)
    results = []
    rows = []
    for label, k_i, spec in variants:
        outcome = run_scenario(replace(spec, label=label), seed=seed)
        results.append(outcome)
        rows.append(ComparisonRow(label=label, k_i=k_i, metrics=outcome.metrics))
    return build_comparison(rows), tuple(results)
