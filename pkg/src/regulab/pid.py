"""Discrete-time proportional-integral-derivative regulation.

The controller is the textbook three-term law

    u = kp * e  +  (1/ti) * integral(e)  +  td * d(e)/dt

discretized with a rectangular (backward-Euler) integral and a
first-difference derivative. The derivative term is defined as 0 on the
first step. There is no anti-windup, clamping, or derivative filtering;
the point is a hand-checkable ideal regulator. ``ti = math.inf`` disables
the integral term, ``td = 0`` the derivative term, and in that reduction
the output is bit-identical to ``kp * error``.

``simulate_pid`` closes the loop around a first-order scalar plant
x' = plant_gain * u + disturbance, integrated by explicit Euler. That is
enough to show the behavioral contrast this module exists for: a P-only
controller leaves a steady offset under constant disturbance, while PI
drives the error to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PidGains:
    """kp is dimensionless, ti is the integral time in seconds (math.inf
    disables integration), td the derivative time in seconds."""

    kp: float
    ti: float = math.inf
    td: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.kp):
            raise ValueError(f"kp must be finite, got {self.kp}")
        if not (self.ti > 0):  # inf allowed, nan/zero/negative rejected
            raise ValueError(f"ti must be > 0 (math.inf to disable), got {self.ti}")
        if not (self.td >= 0 and math.isfinite(self.td)):
            raise ValueError(f"td must be finite and >= 0, got {self.td}")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    initialized: bool = False


@dataclass(frozen=True)
class PidOutput:
    value: float


@dataclass(frozen=True)
class PidTrajectory:
    """Closed-loop record: x[k], u[k], e[k] at tick k."""

    ticks: np.ndarray
    x: np.ndarray
    u: np.ndarray
    e: np.ndarray


def pid_step(
    g: PidGains, st: PidState, error: float, dt: float
) -> tuple[PidOutput, PidState]:
    """One controller update. Integral accumulates error*dt before use
    (rectangular rule); derivative is (error - prev_error)/dt, 0 on the
    first call."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not math.isfinite(error):
        raise ValueError(f"error input must be finite, got {error}")
    integral = st.integral + error * dt
    out = g.kp * error
    if math.isfinite(g.ti):
        out += integral / g.ti
    if g.td != 0.0 and st.initialized:
        out += g.td * (error - st.prev_error) / dt
    return PidOutput(out), PidState(integral=integral, prev_error=error, initialized=True)


def simulate_pid(
    g: PidGains,
    plant_gain: float,
    setpoint: float,
    x0: float,
    dt: float,
    T: int,
    disturbance: float = 0.0,
) -> PidTrajectory:
    """Setpoint tracking on the first-order plant
    x[k+1] = x[k] + dt * (plant_gain * u[k] + disturbance).

    Aborts with a diagnostic naming the tick if |x| exceeds 1e12.
    """
    if T < 1:
        raise ValueError(f"need at least 1 step, got {T}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ticks = np.arange(T, dtype=int)
    xs = np.empty(T, dtype=float)
    us = np.empty(T, dtype=float)
    es = np.empty(T, dtype=float)
    x = float(x0)
    st = PidState()
    for k in range(T):
        if abs(x) > 1e12:
            raise PidDivergenceError(
                f"plant state |x| = {abs(x):.3e} exceeded 1e12 at tick {k}"
            )
        e = setpoint - x
        out, st = pid_step(g, st, e, dt)
        xs[k] = x
        us[k] = out.value
        es[k] = e
        x = x + dt * (plant_gain * out.value + disturbance)
    return PidTrajectory(ticks=ticks, x=xs, u=us, e=es)


class PidDivergenceError(RuntimeError):
    """Closed loop blew past the divergence guard."""
