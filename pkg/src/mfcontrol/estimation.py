"""Windowed algebraic estimation of the ultra-local model's lumped dynamics term.

The model is y^(n) = F + alpha*u with n in {1, 2}.  F lumps every unmodelled
effect and disturbance; it is recovered over a short rolling window by a pair
of FIR kernels applied to the stored y and u samples.  The kernels annihilate
the window-local polynomial initial conditions, so no derivative of the raw
measurement is ever formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signals import SampleWindow

_ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class UltraLocalConfig:
    """Ultra-local model setup: input gain alpha, model order, window length M, period h."""

    alpha: float
    order: int
    window: int
    h: float

    def __post_init__(self) -> None:
        if self.alpha == 0.0:
            raise ValueError("alpha must be nonzero")
        if self.order not in (1, 2):
            raise ValueError(f"model order must be 1 or 2, got {self.order}")
        if self.window < 4:
            raise ValueError(f"window must hold at least 4 samples, got {self.window}")
        if self.h <= 0.0:
            raise ValueError(f"sample period must be positive, got {self.h}")

    @property
    def tau(self) -> float:
        """Nominal window duration M*h."""
        return self.window * self.h

    @property
    def span(self) -> float:
        """Actual extent covered by M samples at spacing h."""
        return (self.window - 1) * self.h


@dataclass(frozen=True, eq=False)
class FirKernels:
    """Discrete kernel pair: F_est = w_y . y_window + w_u . u_window.

    sigma holds the window-local sample coordinates (0 = oldest sample).
    """

    order: int
    w_y: np.ndarray
    w_u: np.ndarray
    sigma: np.ndarray


# 3-point Gauss-Legendre on [-1, 1]: exact through degree 5, enough for the
# quartic u-kernel times a linear hat function.
_GL_NODES = (-math.sqrt(3.0 / 5.0), 0.0, math.sqrt(3.0 / 5.0))
_GL_WEIGHTS = (5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0)


def _hat_product_weights(kernel, nodes: np.ndarray) -> np.ndarray:
    """Integrate `kernel` exactly against each piecewise-linear hat on `nodes`.

    This is the trapezoid-family product rule (endpoint weights halved): the
    integral of kernel * y is evaluated with y replaced by its piecewise-linear
    reconstruction.  Constants and ramps are reproduced exactly by that
    reconstruction, so the discrete moment conditions of the continuous kernels
    hold to floating-point precision; smooth signals see an O(h^2) error.
    """
    w = np.zeros(nodes.size)
    a = nodes[:-1]
    b = nodes[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    for gn, gw in zip(_GL_NODES, _GL_WEIGHTS):
        x = mid + half * gn
        k = kernel(x) * (gw * half)
        rise = (x - a) / (b - a)
        w[:-1] += k * (1.0 - rise)
        w[1:] += k * rise
    return w


def build_kernels_order2(cfg: UltraLocalConfig) -> FirKernels:
    """Kernel pair for y'' = F + alpha*u.

    Continuous forms over the window span S, with sigma = 0 at the oldest
    sample:

        k_y(sigma) = (60 / S^5) * (S^2 + 6*sigma^2 - 6*S*sigma)
        k_u(sigma) = -(30 * alpha / S^5) * (S - sigma)^2 * sigma^2

    k_y annihilates constants and ramps and maps sigma^2/2 to 1; k_u maps a
    constant u to -alpha.
    """
    if cfg.order != 2:
        raise ValueError("order-2 kernels need an order-2 config")
    sigma = np.arange(cfg.window, dtype=float) * cfg.h
    S = float(sigma[-1])
    c_y = 60.0 / S**5
    c_u = -30.0 * cfg.alpha / S**5

    def k_y(s):
        return c_y * (S * S + 6.0 * s * s - 6.0 * S * s)

    def k_u(s):
        return c_u * (S - s) ** 2 * s * s

    return FirKernels(
        order=2,
        w_y=_hat_product_weights(k_y, sigma),
        w_u=_hat_product_weights(k_u, sigma),
        sigma=sigma,
    )


def build_kernels_order1(cfg: UltraLocalConfig) -> FirKernels:
    """Kernel pair for y' = F + alpha*u.

    Continuous forms over the window span S:

        k_y(sigma) = -(6 / S^3) * (S - 2*sigma)
        k_u(sigma) = -(6 * alpha / S^3) * (S - sigma) * sigma

    k_y annihilates constants and maps the ramp y = sigma to 1; k_u maps a
    constant u to -alpha.
    """
    if cfg.order != 1:
        raise ValueError("order-1 kernels need an order-1 config")
    sigma = np.arange(cfg.window, dtype=float) * cfg.h
    S = float(sigma[-1])
    c_y = -6.0 / S**3
    c_u = -6.0 * cfg.alpha / S**3

    def k_y(s):
        return c_y * (S - 2.0 * s)

    def k_u(s):
        return c_u * (S - s) * s

    return FirKernels(
        order=1,
        w_y=_hat_product_weights(k_y, sigma),
        w_u=_hat_product_weights(k_u, sigma),
        sigma=sigma,
    )


def _apply_kernels(kernels: FirKernels, y_window: SampleWindow, u_window: SampleWindow):
    if not (y_window.full and u_window.full):
        return None  # warming up
    ty = y_window.times()
    tu = u_window.times()
    if abs(ty[0] - tu[0]) > _ALIGN_TOL or abs(ty[-1] - tu[-1]) > _ALIGN_TOL:
        raise ValueError("y and u windows are not aligned")
    if len(ty) != kernels.w_y.size:
        raise ValueError("window length does not match kernel length")
    return float(kernels.w_y @ y_window.values() + kernels.w_u @ u_window.values())


def estimate_F_order2(kernels: FirKernels, y_window: SampleWindow, u_window: SampleWindow):
    """F estimate for the order-2 model; None while either window is short."""
    if kernels.order != 2:
        raise ValueError("estimate_F_order2 needs order-2 kernels")
    return _apply_kernels(kernels, y_window, u_window)


def estimate_F_order1_window(kernels: FirKernels, y_window: SampleWindow, u_window: SampleWindow):
    """Windowed F estimate for the order-1 model; None while either window is short."""
    if kernels.order != 1:
        raise ValueError("estimate_F_order1_window needs order-1 kernels")
    return _apply_kernels(kernels, y_window, u_window)


def estimate_F_order1_diff(y_now: float, y_prev, u_prev: float, h: float, alpha: float):
    """One-step difference estimate (y_t - y_prev)/h - alpha*u_prev.

    Cheapest order-1 form; amplifies measurement noise by 1/h.  Returns None
    until a previous sample exists.
    """
    if y_prev is None:
        return None
    return (y_now - y_prev) / h - alpha * u_prev


class RiachyIntegrator:
    """Measurement transform Y = y + K_D * integral(y) from a resettable origin.

    Feeding Y (instead of y) to the order-2 estimator yields an estimate of
    F + K_D*dy, which lets the control law drop its explicit error-derivative
    term.  The running integral advances by trapezoid steps; `reset` moves the
    origin so the accumulator stays bounded over long runs.
    """

    def __init__(self, k_d: float, t0: float = 0.0) -> None:
        self.k_d = k_d
        self.accumulator = 0.0
        self.origin = t0
        self._last: tuple[float, float] | None = None

    def reset(self, t: float) -> float:
        """Move the integration origin to t and zero the accumulator.

        Returns the constant K_D * accumulator that the shift removes; any
        stored Y samples must be shifted by minus this value to stay on the
        new origin (a constant shift, which the estimation kernel annihilates).
        """
        drop = self.k_d * self.accumulator
        self.accumulator = 0.0
        self.origin = t
        self._last = None
        return drop

    def update(self, t: float, y: float, h: float, advance: bool = True) -> float:
        """Advance the integral to time t and return Y(t).

        advance=False evaluates Y with the accumulator frozen (anti-windup
        while the command saturates) but still tracks the sample so a later
        unfreeze resumes locally instead of integrating across the gap.
        """
        if advance:
            if self._last is None:
                gap = t - self.origin
                if gap > 0.0:
                    # no stored sample at the origin itself; backward rectangle
                    self.accumulator += gap * y
            else:
                self.accumulator += 0.5 * h * (y + self._last[1])
        self._last = (t, y)
        return y + self.k_d * self.accumulator
