"""Discrete PID with integral anti-windup."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    integral_clamp: float = 0.0
    tolerance: float = 1.0
    max_steps: int = 500

    def __post_init__(self):
        if not self.kp > 0:
            raise ValueError("kp must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class PidState:
    prev_error: Optional[float] = None
    integral: float = 0.0


def pid_step(gains: PidGains, error: float, state: PidState = PidState(), dt: float = 0.1) -> tuple[float, PidState]:
    """One controller update; returns the command and the next state.

    The integral contribution ``ki * integral`` is clamped to
    ``+-integral_clamp``. With no previous error the derivative term is zero.
    """
    integral = state.integral + error * dt
    if gains.ki > 0:
        bound = gains.integral_clamp / gains.ki
        integral = min(max(integral, -bound), bound)
    derivative = 0.0 if state.prev_error is None else (error - state.prev_error) / dt
    command = gains.kp * error + gains.ki * integral + gains.kd * derivative
    return command, PidState(error, integral)
