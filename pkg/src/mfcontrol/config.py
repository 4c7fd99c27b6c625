"""Scenario config files: one closed-loop run described as a small TOML document.

Schema (all keys optional unless noted; unknown keys are rejected):

    id = 4                 # integer tag mixed into the noise seed
    label = "my run"
    duration = 30.0        # required
    h = 0.01
    substeps = 10
    seed = 0

    [controller]           # required
    kind = "ipd"           # ip | ipd | ipid | classic-pid
    k_p = 25.0             # required
    k_i = 0.0
    k_d = 10.0
    alpha = 10.0           # required unless kind = classic-pid
    window = 30
    derivative_mode = "riachy"        # or "backward-difference"
    f_estimator = "window"            # or "difference" (ip only)
    u_min = -14.0
    u_max = 14.0

    [plant]
    inertia = 0.02
    friction = 0.10
    gravity = 0.50
    thrust_gain = 0.18

    [noise]
    quantization = 0.00306796157577128
    std = 0.0

    [initial]
    position = 0.0
    velocity = 0.0

    [[reference]]          # at least one segment required
    start = 0.0
    setpoint = 0.0
    transition = 0.0

    [[disturbance]]
    start = 15.0
    duration = 5.0
    torque = 0.05
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .controllers import ControllerSpec, DERIVATIVE_MODES, F_ESTIMATORS, GainSet, KINDS
from .equivalence import ClassicGains
from .estimation import UltraLocalConfig
from .plants import AeroSurrogateParams, DisturbanceEvent
from .scenarios import ScenarioSpec, DEFAULT_KI_SCALE, LOOP_PERIOD, U_LIMIT, WINDOW_SAMPLES, ALPHA
from .signals import DEFAULT_QUANTIZATION, ReferenceSegment, ReferenceTrajectory, TimeGrid


class ConfigError(ValueError):
    """Raised for unreadable, ill-typed, or contradictory scenario configs."""


@dataclass(frozen=True)
class LoadedScenario:
    spec: ScenarioSpec
    seed: int


def _require_table(doc: dict, key: str, where: str) -> dict:
    value = doc.get(key)
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: missing required table [{key}]")
    return value


def _take(table: dict, key: str, kind, where: str, default=None, required: bool = False):
    if key not in table:
        if required:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    value = table.pop(key)
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(
            f"{where}: key {key!r} must be {getattr(kind, '__name__', kind)}, got {value!r}"
        )
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{where}: key {key!r} must be finite, got {value!r}")
    return value


def _reject_unknown(table: dict, where: str) -> None:
    if table:
        raise ConfigError(f"{where}: unknown keys {sorted(table)}")


def _parse_controller(table: dict, h: float) -> ControllerSpec:
    where = "[controller]"
    kind = _take(table, "kind", str, where, required=True)
    if kind not in KINDS:
        raise ConfigError(f"{where}: kind must be one of {KINDS}, got {kind!r}")
    k_p = _take(table, "k_p", float, where, required=True)
    k_i = _take(table, "k_i", float, where, default=0.0)
    k_d = _take(table, "k_d", float, where, default=0.0)
    u_min = _take(table, "u_min", float, where, default=-U_LIMIT)
    u_max = _take(table, "u_max", float, where, default=U_LIMIT)

    if kind == "classic-pid":
        for key in ("alpha", "window", "derivative_mode", "f_estimator"):
            if key in table:
                raise ConfigError(f"{where}: key {key!r} does not apply to classic-pid")
        _reject_unknown(table, where)
        try:
            return ControllerSpec(
                kind=kind,
                gains=ClassicGains(k_p=k_p, k_i=k_i, k_d=k_d),
                u_limits=(u_min, u_max),
            )
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc

    alpha = _take(table, "alpha", float, where, default=ALPHA)
    window = _take(table, "window", int, where, default=WINDOW_SAMPLES)
    derivative_mode = _take(table, "derivative_mode", str, where, default="riachy")
    f_estimator = _take(table, "f_estimator", str, where, default="window")
    if derivative_mode not in DERIVATIVE_MODES:
        raise ConfigError(
            f"{where}: derivative_mode must be one of {DERIVATIVE_MODES}, got {derivative_mode!r}"
        )
    if f_estimator not in F_ESTIMATORS:
        raise ConfigError(
            f"{where}: f_estimator must be one of {F_ESTIMATORS}, got {f_estimator!r}"
        )
    _reject_unknown(table, where)
    order = 1 if kind == "ip" else 2
    try:
        return ControllerSpec(
            kind=kind,
            gains=GainSet(k_p=k_p, k_i=k_i, k_d=k_d),
            ultra_local=UltraLocalConfig(alpha=alpha, order=order, window=window, h=h),
            derivative_mode=derivative_mode,
            u_limits=(u_min, u_max),
            f_estimator=f_estimator,
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_reference(items) -> ReferenceTrajectory:
    if not isinstance(items, list) or not items or not all(isinstance(x, dict) for x in items):
        raise ConfigError("[[reference]]: at least one segment table is required")
    segments = []
    for i, raw in enumerate(items):
        where = f"[[reference]] #{i + 1}"
        start = _take(raw, "start", float, where, required=True)
        setpoint = _take(raw, "setpoint", float, where, required=True)
        transition = _take(raw, "transition", float, where, default=0.0)
        _reject_unknown(raw, where)
        segments.append(ReferenceSegment(start=start, setpoint=setpoint, transition=transition))
    try:
        return ReferenceTrajectory(tuple(segments))
    except ValueError as exc:
        raise ConfigError(f"[[reference]]: {exc}") from exc


def _parse_disturbances(items) -> tuple[DisturbanceEvent, ...]:
    if items is None:
        return ()
    if not isinstance(items, list) or not all(isinstance(x, dict) for x in items):
        raise ConfigError("[[disturbance]]: must be an array of tables")
    events = []
    for i, raw in enumerate(items):
        where = f"[[disturbance]] #{i + 1}"
        start = _take(raw, "start", float, where, required=True)
        duration = _take(raw, "duration", float, where, required=True)
        torque = _take(raw, "torque", float, where, required=True)
        _reject_unknown(raw, where)
        try:
            events.append(DisturbanceEvent(start=start, duration=duration, torque=torque))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    return tuple(events)


def load_scenario_config(path: str | Path) -> LoadedScenario:
    """Parse and validate one scenario TOML file; no simulation is started here."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc

    where = "top level"
    sid = _take(doc, "id", int, where, default=0)
    label = _take(doc, "label", str, where, default=path.stem)
    duration = _take(doc, "duration", float, where, required=True)
    h = _take(doc, "h", float, where, default=LOOP_PERIOD)
    substeps = _take(doc, "substeps", int, where, default=10)
    seed = _take(doc, "seed", int, where, default=0)

    controller_tbl = dict(_require_table(doc, "controller", where))
    doc.pop("controller")
    controller = _parse_controller(controller_tbl, h)

    plant_tbl = dict(doc.pop("plant", {}))
    pw = "[plant]"
    try:
        plant = AeroSurrogateParams(
            inertia=_take(plant_tbl, "inertia", float, pw, default=AeroSurrogateParams.inertia),
            friction=_take(plant_tbl, "friction", float, pw, default=AeroSurrogateParams.friction),
            gravity=_take(plant_tbl, "gravity", float, pw, default=AeroSurrogateParams.gravity),
            thrust_gain=_take(
                plant_tbl, "thrust_gain", float, pw, default=AeroSurrogateParams.thrust_gain
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"{pw}: {exc}") from exc
    _reject_unknown(plant_tbl, pw)

    noise_tbl = dict(doc.pop("noise", {}))
    nw = "[noise]"
    quantization = _take(noise_tbl, "quantization", float, nw, default=DEFAULT_QUANTIZATION)
    std = _take(noise_tbl, "std", float, nw, default=0.0)
    _reject_unknown(noise_tbl, nw)
    if quantization < 0.0 or std < 0.0:
        raise ConfigError(f"{nw}: quantization and std must be >= 0")

    initial_tbl = dict(doc.pop("initial", {}))
    iw = "[initial]"
    position = _take(initial_tbl, "position", float, iw, default=0.0)
    velocity = _take(initial_tbl, "velocity", float, iw, default=0.0)
    _reject_unknown(initial_tbl, iw)

    reference = _parse_reference(doc.pop("reference", None))
    disturbances = _parse_disturbances(doc.pop("disturbance", None))
    _reject_unknown(doc, where)

    try:
        grid = TimeGrid(h=h, duration=duration, substeps=substeps)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc

    spec = ScenarioSpec(
        id=sid,
        label=label,
        controller=controller,
        reference=reference,
        grid=grid,
        plant_params=plant,
        disturbances=disturbances,
        quantization=quantization,
        noise_std=std,
        initial_state=(position, velocity),
    )
    return LoadedScenario(spec=spec, seed=seed)
