"""Intelligent P/PD/PID control laws over ultra-local models, and the classic
velocity-form PID they are compared against.

Error convention everywhere: e = y - y_ref.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .equivalence import ClassicGains
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
from .signals import ReferenceTrajectory, SampleWindow

KINDS = ("ip", "ipd", "ipid", "classic-pid")
DERIVATIVE_MODES = ("riachy", "backward-difference")
F_ESTIMATORS = ("window", "difference")


@dataclass(frozen=True)
class GainSet:
    """Gains for the intelligent family: K_P > 0, K_I and K_D nonnegative."""

    k_p: float
    k_i: float = 0.0
    k_d: float = 0.0

    def __post_init__(self) -> None:
        if self.k_p <= 0.0:
            raise ValueError("K_P must be positive")
        if self.k_i < 0.0 or self.k_d < 0.0:
            raise ValueError("K_I and K_D must be nonnegative")


def ip_law(f_est: float, dy_ref: float, e: float, k_p: float, alpha: float) -> float:
    """u = -(F_est - dy_ref + K_P e) / alpha   (first-order model)."""
    return -(f_est - dy_ref + k_p * e) / alpha


def ipd_law(
    f_est: float, ddy_ref: float, e: float, de: float, k_p: float, k_d: float, alpha: float
) -> float:
    """u = -(F_est - ddy_ref + K_P e + K_D de) / alpha   (second-order model)."""
    return -(f_est - ddy_ref + k_p * e + k_d * de) / alpha


def ipid_law(
    f_est: float,
    ddy_ref: float,
    e: float,
    de: float,
    int_e: float,
    k_p: float,
    k_i: float,
    k_d: float,
    alpha: float,
) -> float:
    """u = -(F_est - ddy_ref + K_P e + K_I int_e + K_D de) / alpha."""
    return -(f_est - ddy_ref + k_p * e + k_i * int_e + k_d * de) / alpha


def ipd_riachy_law(
    frak_f_est: float,
    ddy_ref: float,
    dy_ref: float,
    e: float,
    int_e: float,
    k_p: float,
    k_i: float,
    k_d: float,
    alpha: float,
) -> float:
    """Derivative-free form: u = -(𝔉_est - ddy_ref + K_P e + K_I int_e - K_D dy_ref) / alpha.

    𝔉_est comes from estimating on Y = y + K_D * integral(y), which folds
    K_D*dy into the lumped term, so no error derivative appears.  K_D = 0
    degenerates to the plain law.
    """
    return -(frak_f_est - ddy_ref + k_p * e + k_i * int_e - k_d * dy_ref) / alpha


@dataclass(frozen=True)
class ControllerSpec:
    """Everything needed to instantiate a controller.

    u_limits clamp the command; while the previous tick saturated, integral
    accumulations are frozen (anti-windup).  derivative_mode picks how the
    iPD/iPID obtain their derivative action; f_estimator picks the order-1
    F estimate (windowed kernels or one-step difference).
    """

    kind: str
    gains: GainSet | ClassicGains
    ultra_local: UltraLocalConfig | None = None
    derivative_mode: str = "riachy"
    u_limits: tuple[float, float] = (-math.inf, math.inf)
    f_estimator: str = "window"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown controller kind {self.kind!r}")
        if self.derivative_mode not in DERIVATIVE_MODES:
            raise ValueError(f"unknown derivative mode {self.derivative_mode!r}")
        if self.f_estimator not in F_ESTIMATORS:
            raise ValueError(f"unknown F estimator {self.f_estimator!r}")
        lo, hi = self.u_limits
        if not lo < hi:
            raise ValueError("u_limits must satisfy min < max")
        if self.kind == "classic-pid":
            if not isinstance(self.gains, ClassicGains):
                raise ValueError("classic-pid takes ClassicGains")
            return
        if not isinstance(self.gains, GainSet):
            raise ValueError(f"{self.kind} takes a GainSet")
        if self.ultra_local is None:
            raise ValueError(f"{self.kind} needs an ultra-local model config")
        if self.kind == "ip":
            if self.ultra_local.order != 1:
                raise ValueError("ip runs on the order-1 model")
            if self.gains.k_i != 0.0 or self.gains.k_d != 0.0:
                raise ValueError("ip uses K_P only")
        else:
            if self.ultra_local.order != 2:
                raise ValueError(f"{self.kind} runs on the order-2 model")
            if self.kind == "ipd" and self.gains.k_i != 0.0:
                raise ValueError("ipd has no integral gain")


@dataclass(frozen=True)
class ControlStep:
    """One controller tick: command, estimate, error and status flags."""

    u: float
    f_est: float  # nan while warming up
    e: float
    warming_up: bool
    saturated: bool


class ClassicPid:
    """Velocity-form PID: u advances by h*(k_p*de + k_i*e + k_d*dde).

    Backward differences, zero initial history; the stored command is the
    clamped one, which is what gives the velocity form its innate anti-windup.
    """

    def __init__(self, gains: ClassicGains, h: float, u_limits=(-math.inf, math.inf)) -> None:
        if h <= 0.0:
            raise ValueError("sampling period must be positive")
        self.gains = gains
        self.h = h
        self.u_limits = u_limits
        self._u = 0.0
        self._e1 = 0.0
        self._e2 = 0.0
        self.last_saturated = False

    def step(self, e: float) -> float:
        g, h = self.gains, self.h
        de = (e - self._e1) / h
        dde = (e - 2.0 * self._e1 + self._e2) / (h * h)
        u = self._u + h * (g.k_p * de + g.k_i * e + g.k_d * dde)
        lo, hi = self.u_limits
        clamped = min(max(u, lo), hi)
        self.last_saturated = clamped != u
        self._e2, self._e1, self._u = self._e1, e, clamped
        return clamped


class Controller:
    """Stateful per-tick controller around one of the intelligent laws.

    Owns the sample windows, the F estimate, the error integral and the
    optional Riachy transform.  Until the windows fill, the command is 0 and
    warming_up is flagged.  Integral accumulators reset at every setpoint
    change of the reference and freeze while the command saturates.
    """

    def __init__(
        self,
        spec: ControllerSpec,
        reference: ReferenceTrajectory | None,
        h: float,
    ) -> None:
        self.spec = spec
        self.h = h
        cfg = spec.ultra_local
        if cfg is not None and abs(cfg.h - h) > 1e-12:
            raise ValueError(f"ultra-local period {cfg.h} differs from loop period {h}")
        self._classic: ClassicPid | None = None
        self._kernels: FirKernels | None = None
        self._y_win: SampleWindow | None = None
        self._u_win: SampleWindow | None = None
        self._riachy: RiachyIntegrator | None = None
        self._use_riachy = False
        self._use_diff = False
        if spec.kind == "classic-pid":
            self._classic = ClassicPid(spec.gains, h, spec.u_limits)
        else:
            assert cfg is not None
            self._use_diff = cfg.order == 1 and spec.f_estimator == "difference"
            if not self._use_diff:
                builder = build_kernels_order1 if cfg.order == 1 else build_kernels_order2
                self._kernels = builder(cfg)
                self._y_win = SampleWindow(cfg.window)
                self._u_win = SampleWindow(cfg.window)
            if cfg.order == 2 and spec.derivative_mode == "riachy":
                self._use_riachy = True
                self._riachy = RiachyIntegrator(spec.gains.k_d)
        self._resets = sorted(reference.change_times()) if reference is not None else []
        self._u_prev = 0.0
        self._e_prev = 0.0
        self._y_prev: float | None = None
        self._int_e = 0.0
        self._saturated = False

    def step(self, t: float, y_measured: float, ref: tuple[float, float, float]) -> ControlStep:
        y_ref, dy_ref, ddy_ref = ref
        e = y_measured - y_ref
        if self._classic is not None:
            u = self._classic.step(e)
            self._u_prev = u
            return ControlStep(
                u=u, f_est=math.nan, e=e, warming_up=False,
                saturated=self._classic.last_saturated,
            )

        frozen = self._saturated  # previous tick's saturation gates this tick's integrals
        while self._resets and t >= self._resets[0] - 0.5 * self.h:
            self._resets.pop(0)
            self._int_e = 0.0
            if self._riachy is not None:
                drop = self._riachy.reset(t)
                if self._y_win is not None and len(self._y_win):
                    # rebasing keeps the estimate continuous: the kernel kills constants
                    self._y_win.shift_values(-drop)

        spec = self.spec
        gains = spec.gains
        alpha = spec.ultra_local.alpha

        if self._use_diff:
            f_est = estimate_F_order1_diff(y_measured, self._y_prev, self._u_prev, self.h, alpha)
            self._y_prev = y_measured
        else:
            if self._use_riachy:
                y_sample = self._riachy.update(t, y_measured, self.h, advance=not frozen)
            else:
                y_sample = y_measured
            self._y_win.push(t, y_sample)
            # u(t) is not known yet: store the command held over [t-h, t)
            self._u_win.push(t, self._u_prev)
            if spec.ultra_local.order == 1:
                f_est = estimate_F_order1_window(self._kernels, self._y_win, self._u_win)
            else:
                f_est = estimate_F_order2(self._kernels, self._y_win, self._u_win)

        warming = f_est is None
        if warming:
            u_raw = 0.0
        elif spec.kind == "ip":
            u_raw = ip_law(f_est, dy_ref, e, gains.k_p, alpha)
        else:
            if not frozen:
                self._int_e += 0.5 * self.h * (e + self._e_prev)
            if self._use_riachy:
                u_raw = ipd_riachy_law(
                    f_est, ddy_ref, dy_ref, e, self._int_e,
                    gains.k_p, gains.k_i, gains.k_d, alpha,
                )
            else:
                de = (e - self._e_prev) / self.h
                u_raw = ipid_law(
                    f_est, ddy_ref, e, de, self._int_e,
                    gains.k_p, gains.k_i, gains.k_d, alpha,
                )

        lo, hi = spec.u_limits
        u = min(max(u_raw, lo), hi)
        saturated = u != u_raw
        self._u_prev = u
        self._e_prev = e
        self._saturated = saturated
        return ControlStep(
            u=u,
            f_est=math.nan if warming else f_est,
            e=e,
            warming_up=warming,
            saturated=saturated,
        )
