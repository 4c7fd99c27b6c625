"""Model-free control toolkit.

Feedback laws that treat the plant as y^(n) = F + alpha*u over a short moving
window, estimate the lumped unknown F from recent input/output samples, and
cancel it through the input channel. Ships the windowed FIR estimator, the
derivative-free variant built on an output integral transform, classic-PID
gain equivalences with a Routh-Hurwitz gate, a rotor surrogate plant, and a
nine-run benchmark catalog.
"""

from .config import ConfigError, LoadedScenario, load_scenario_config
from .controllers import (
    ClassicPid,
    ControlStep,
    Controller,
    ControllerSpec,
    GainSet,
    ip_law,
    ipd_law,
    ipd_riachy_law,
    ipid_law,
)
from .equivalence import (
    ClassicGains,
    Fact1Report,
    Fact1Row,
    StabilityVerdict,
    demonstrate_fact1,
    hurwitz_cubic,
    ip_recursion_sequence,
    ipd_recursion_sequence,
    pi_from_ip,
    pid_from_ipd,
    pid_velocity_sequence,
)
from .estimation import (
    FirKernels,
    RiachyIntegrator,
    UltraLocalConfig,
    build_kernels_order1,
    build_kernels_order2,
    estimate_F_order1_diff,
    estimate_F_order1_window,
    estimate_F_order2,
)
from .metrics import ComparisonReport, ComparisonRow, Metrics, build_comparison, compute_metrics
from .plants import (
    ActuatorCommand,
    AeroSurrogate,
    AeroSurrogateParams,
    DisturbanceEvent,
    DoubleIntegrator,
    PlantModel,
    aero_derivative,
    mix_voltages,
    rotor_thrust,
)
from .scenarios import (
    ScenarioResult,
    ScenarioSpec,
    builtin_scenarios,
    compare_family,
    family_variants,
    get_scenario,
    run_scenario,
)
from .signals import (
    NoiseModel,
    ReferenceSegment,
    ReferenceTrajectory,
    SampleWindow,
    TimeGrid,
)
from .sim import SimResult, TraceRecord, rk4_step, simulate

__version__ = "0.1.0"

__all__ = [
    "ActuatorCommand",
    "AeroSurrogate",
    "AeroSurrogateParams",
    "ClassicGains",
    "ClassicPid",
    "ComparisonReport",
    "ComparisonRow",
    "ConfigError",
    "ControlStep",
    "Controller",
    "ControllerSpec",
    "DisturbanceEvent",
    "DoubleIntegrator",
    "Fact1Report",
    "Fact1Row",
    "FirKernels",
    "GainSet",
    "LoadedScenario",
    "Metrics",
    "NoiseModel",
    "PlantModel",
    "ReferenceSegment",
    "ReferenceTrajectory",
    "RiachyIntegrator",
    "SampleWindow",
    "ScenarioResult",
    "ScenarioSpec",
    "SimResult",
    "StabilityVerdict",
    "TimeGrid",
    "TraceRecord",
    "UltraLocalConfig",
    "aero_derivative",
    "build_comparison",
    "build_kernels_order1",
    "build_kernels_order2",
    "builtin_scenarios",
    "compare_family",
    "compute_metrics",
    "demonstrate_fact1",
    "estimate_F_order1_diff",
    "estimate_F_order1_window",
    "estimate_F_order2",
    "family_variants",
    "get_scenario",
    "hurwitz_cubic",
    "ip_law",
    "ip_recursion_sequence",
    "ipd_law",
    "ipd_recursion_sequence",
    "ipd_riachy_law",
    "ipid_law",
    "load_scenario_config",
    "mix_voltages",
    "pi_from_ip",
    "pid_from_ipd",
    "pid_velocity_sequence",
    "rk4_step",
    "rotor_thrust",
    "run_scenario",
    "simulate",
]
