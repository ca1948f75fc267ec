"""Planar unicycle kinematics under piecewise-constant controls.

State is (x, y, theta) with xdot = v cos(theta), ydot = v sin(theta),
thetadot = omega. With constant (v, omega) each segment integrates in closed
form, so sampled trajectories are exact. The state-transition Jacobian is
integrated numerically on purpose: it feeds an independent cross-check of
quantities that are elsewhere derived analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveInput, TimeOutOfRange
from .geom import Point2, wrap_angle

# below this |omega| the arc is treated as straight
_OMEGA_EPS = 1e-12


@dataclass(frozen=True)
class UnicycleState:
    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta)):
            raise NonPositiveInput("state components must be finite")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta], dtype=float)

    def point(self) -> Point2:
        return Point2(self.x, self.y)


@dataclass(frozen=True)
class ControlSegment:
    """Constant forward speed v and turn rate omega held for `duration`."""

    v: float
    omega: float
    duration: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.v, self.omega, self.duration)):
            raise NonPositiveInput("control segment values must be finite")
        if self.duration <= 0.0:
            raise NonPositiveInput(f"segment duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class UnicycleControls:
    segments: tuple[ControlSegment, ...]

    def __post_init__(self):
        if len(self.segments) == 0:
            raise NonPositiveInput("control sequence must not be empty")

    @property
    def total_duration(self) -> float:
        return float(sum(seg.duration for seg in self.segments))

    def boundaries(self) -> list[float]:
        """Segment start/end times, length = number of segments + 1."""
        out = [0.0]
        for seg in self.segments:
            out.append(out[-1] + seg.duration)
        return out

    def at(self, t: float) -> ControlSegment:
        """Active segment at time t; boundaries belong to the later segment."""
        bounds = self.boundaries()
        t = _check_time(t, bounds[-1])
        for i, seg in enumerate(self.segments):
            if t < bounds[i + 1] or i == len(self.segments) - 1:
                return seg
        return self.segments[-1]


def _check_time(t: float, total: float) -> float:
    slack = 1e-9 * max(1.0, total)
    if not math.isfinite(t) or t < -slack or t > total + slack:
        raise TimeOutOfRange(f"time {t} outside [0, {total}]")
    return min(max(t, 0.0), total)


def _advance(state: tuple[float, float, float], seg: ControlSegment, dt: float):
    """Exact flow of one constant-control piece over dt >= 0."""
    x, y, th = state
    if abs(seg.omega) > _OMEGA_EPS:
        th1 = th + seg.omega * dt
        r = seg.v / seg.omega
        return (x + r * (math.sin(th1) - math.sin(th)), y - r * (math.cos(th1) - math.cos(th)), th1)
    return (x + seg.v * dt * math.cos(th), y + seg.v * dt * math.sin(th), th)


def integrate(controls: UnicycleControls, t: float, initial: UnicycleState | None = None) -> UnicycleState:
    """State at time t starting from `initial` (default: origin, heading 0)."""
    if initial is None:
        initial = UnicycleState(0.0, 0.0, 0.0)
    bounds = controls.boundaries()
    t = _check_time(t, bounds[-1])
    state = (initial.x, initial.y, initial.theta)
    for i, seg in enumerate(controls.segments):
        if t <= bounds[i]:
            break
        dt = min(t, bounds[i + 1]) - bounds[i]
        state = _advance(state, seg, dt)
    return UnicycleState(*state)


def integrate_times(
    controls: UnicycleControls, times, initial: UnicycleState | None = None
) -> list[UnicycleState]:
    return [integrate(controls, float(t), initial) for t in times]


def controls_to_trajectory_v(controls: UnicycleControls, sample_times, initial: UnicycleState | None = None):
    """Sample the controlled motion into a vehicle-frame trajectory.

    With the default initial state the frame is anchored at the pose at t = 0,
    which is exactly the vehicle frame convention used by scenarios.
    """
    from .scenario import TrajectoryV

    states = integrate_times(controls, sample_times, initial)
    points = tuple(st.point() for st in states)
    headings = tuple(st.theta for st in states)
    return TrajectoryV(points, headings)


def _jacobian(seg: ControlSegment, theta: float) -> np.ndarray:
    """d(state rate)/d(state) at heading theta under segment controls."""
    return np.array(
        [
            [0.0, 0.0, -seg.v * math.sin(theta)],
            [0.0, 0.0, seg.v * math.cos(theta)],
            [0.0, 0.0, 0.0],
        ]
    )


def sensitivity(
    controls: UnicycleControls,
    t_from: float,
    t_to: float,
    initial: UnicycleState | None = None,
    max_step: float = 0.01,
) -> np.ndarray:
    """State-transition Jacobian d state(t_to) / d state(t_from), t_from <= t_to.

    Computed by fourth-order Runge-Kutta on M'(s) = -M A(s) running backward
    from t_to, where A is the linearized dynamics. Steps never straddle a
    control switch, so A stays smooth inside every step. Heading along the
    way comes from the exact flow.
    """
    if max_step <= 0.0:
        raise NonPositiveInput("max_step must be positive")
    if initial is None:
        initial = UnicycleState(0.0, 0.0, 0.0)
    bounds = controls.boundaries()
    t_from = _check_time(t_from, bounds[-1])
    t_to = _check_time(t_to, bounds[-1])
    if t_from > t_to:
        raise TimeOutOfRange(f"t_from {t_from} exceeds t_to {t_to}")

    # cut [t_from, t_to] at segment boundaries, walk pieces from the far end
    cuts = [t_from] + [b for b in bounds if t_from < b < t_to] + [t_to]
    # heading within a piece: theta(s) = theta(piece start) + omega (s - start),
    # the piece start state coming from the exact flow
    m = np.eye(3)
    for lo, hi in reversed(list(zip(cuts[:-1], cuts[1:]))):
        if hi - lo <= 0.0:
            continue
        seg = controls.at(lo)
        th0 = integrate(controls, lo, initial).theta
        n = max(1, math.ceil((hi - lo) / max_step))
        h = (hi - lo) / n
        theta_at = lambda s: th0 + seg.omega * (s - lo)

        s = hi
        for _ in range(n):
            k1 = -m @ _jacobian(seg, theta_at(s))
            k2 = -(m - 0.5 * h * k1) @ _jacobian(seg, theta_at(s - 0.5 * h))
            k3 = -(m - 0.5 * h * k2) @ _jacobian(seg, theta_at(s - 0.5 * h))
            k4 = -(m - h * k3) @ _jacobian(seg, theta_at(s - h))
            m = m - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            s -= h
    return m
