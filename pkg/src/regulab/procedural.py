"""Procedural motor acquisition under alternating conditions.

Two testbeds live here.

Reaching in a rotational force field: a point mass tracks straight
center-out reaches while a velocity-dependent curl field
F = gain * Rot(angle) * v pushes it sideways. The learner holds a linear
compensation matrix and adapts it with a normalized delta rule on the
residual force it feels each step. Adaptation runs on two timescales, a
fast process that decays between trials and a slow process that retains,
because a single-timescale compensator relearns a washed-out field no
faster than it learned it the first time and therefore cannot show
savings. The phase protocol (learn at one angle, unlearn at a conflicting
one, relearn at the first) yields the two standard metrics: interference,
the error jump at the first conflicting trial, and savings, the change in
trials-to-criterion when the original field returns (negative means
faster relearning).

Gradient following in a color field: a triangular arena carries pure cyan,
magenta, and yellow at its corners; any interior point samples the
barycentric mix with a derived black channel k = 1 - max(c, m, y). A
two-sensor vehicle measures the color distance to a target at two points
held perpendicular to its heading and steers by their difference
(cross-coupled, so the turn tips toward the closer side), with forward
speed proportional to the body's own distance so it parks exactly on the
target. The expanding-goal run visits nested target sets stage by stage,
steering at the nearest unvisited target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .rng import SplitMix64


# ---------------------------------------------------------------------------
# Rotational force fields and the two-timescale reach learner
# ---------------------------------------------------------------------------


def rotation_matrix(angle_deg: float) -> np.ndarray:
    a = math.radians(angle_deg % 360.0)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class CurlField:
    """Velocity-dependent field F = gain * Rot(angle) * v."""

    gain: float
    angle: float

    def __post_init__(self) -> None:
        if self.gain < 0:
            raise ValueError(f"gain must be >= 0, got {self.gain}")
        object.__setattr__(self, "angle", self.angle % 360.0)

    @property
    def matrix(self) -> np.ndarray:
        return self.gain * rotation_matrix(self.angle)


def field_force(f: CurlField, velocity: np.ndarray) -> np.ndarray:
    v = np.asarray(velocity, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"velocity must be finite, got {v}")
    return f.matrix @ v


@dataclass(frozen=True)
class ReachLearner:
    """Linear compensator comp = fast + slow, trained by a normalized delta
    rule. ``rate`` drives the fast process; the slow process learns at
    ``slow_rate`` and never decays, while the fast process multiplies by
    ``fast_retention`` after every trial. The defaults are the profile the
    phase-protocol experiments run at: slow enough that a 200-trial
    conflicting phase only partly erases the slow memory, which is what
    makes relearning measurably faster than naive learning."""

    rate: float = 0.005
    slow_rate: float = 7e-5
    fast_retention: float = 0.94
    fast: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))
    slow: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.rate}")
        if not (0.0 <= self.fast_retention <= 1.0):
            raise ValueError(f"fast retention must be in [0, 1], got {self.fast_retention}")

    @property
    def comp(self) -> np.ndarray:
        return self.fast + self.slow


@dataclass(frozen=True)
class TrialParams:
    """Per-trial simulation setup shared across a protocol.

    Reaches run at constant desired velocity from start to target over
    ``steps`` Euler steps of ``dt``; ``tracking_gain`` is the stiffness
    pulling the hand's velocity back to the desired profile. ``noise``
    scales a uniform disturbance on the felt residual force (0 keeps the
    dynamics fully deterministic).
    """

    steps: int = 60
    dt: float = 0.01
    tracking_gain: float = 12.0
    reach_length: float = 1.0
    directions: int = 8
    noise: float = 0.0


def run_trial(
    l: ReachLearner,
    f: CurlField,
    start: np.ndarray,
    target: np.ndarray,
    steps: int,
    dt: float,
    tracking_gain: float = 12.0,
    noise: float = 0.0,
    rng: SplitMix64 | None = None,
) -> tuple[ReachLearner, float]:
    """One reach. Returns the post-trial learner (fast process decayed) and
    the trial error: the mean deviation of the hand from the straight-path
    position schedule. Deviation is measured against the moving desired
    position, not just the path line, so collinear (0 or 180 degree) field
    perturbations register in the error exactly like orthogonal ones."""
    if steps < 1:
        raise ValueError(f"need at least 1 step, got {steps}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    start = np.asarray(start, dtype=float)
    target = np.asarray(target, dtype=float)
    span = target - start
    if float(np.linalg.norm(span)) == 0.0:
        raise ValueError("start and target coincide")
    v_des = span / (steps * dt)

    field_m = f.matrix
    fast = l.fast.copy()
    slow = l.slow.copy()
    pos = start.copy()
    pos_des = start.copy()
    vel = v_des.copy()
    dev_sum = 0.0
    for _ in range(steps):
        residual = field_m @ vel - (fast + slow) @ vel
        felt = residual
        if noise > 0.0 and rng is not None:
            felt = residual + noise * np.array(
                [2.0 * rng.next_float() - 1.0, 2.0 * rng.next_float() - 1.0]
            )
        denom = float(vel @ vel) + 1e-12
        update = np.outer(felt, vel) / denom
        fast += l.rate * update
        slow += l.slow_rate * update
        vel = vel + dt * (residual + tracking_gain * (v_des - vel))
        pos = pos + dt * vel
        pos_des = pos_des + dt * v_des
        if float(np.linalg.norm(pos)) > 1e6:
            raise ReachDivergenceError("reach diverged, |position| > 1e6")
        dev_sum += float(np.linalg.norm(pos - pos_des))
    fast *= l.fast_retention
    trial_error = dev_sum / steps
    return replace(l, fast=fast, slow=slow), trial_error


class ReachDivergenceError(RuntimeError):
    """Reach simulation left the workspace."""


@dataclass(frozen=True)
class LurSchedule:
    """Ordered (field angle, trial count) phases."""

    phases: tuple[tuple[float, int], ...]

    def __post_init__(self) -> None:
        if len(self.phases) == 0:
            raise ValueError("a schedule needs at least one phase")
        for angle, trials in self.phases:
            if trials < 1:
                raise ValueError(f"each phase needs >= 1 trial, got {trials}")


@dataclass(frozen=True)
class LurResult:
    phase_errors: tuple[tuple[float, ...], ...]
    interference: float
    savings: float


def run_lur(
    l: ReachLearner,
    sched: LurSchedule,
    trial_params: TrialParams,
    gain: float = 1.0,
    seed: int = 0,
) -> LurResult:
    """Run the phase schedule with learner state carried across phases.

    Reach directions cycle around the circle (center-out), which keeps the
    compensator excited in both dimensions. Interference is the first-trial
    error of phase 2 minus the last-trial error of phase 1. Savings is the
    trials phase 3 needs to re-reach phase 1's final error, minus the trials
    phase 1 needed to first reach it; a phase that never re-reaches it
    counts as its trial count plus one.
    """
    rng = SplitMix64(seed)
    origin = np.zeros(2)
    dirs = [
        trial_params.reach_length
        * np.array([math.cos(2 * math.pi * k / trial_params.directions),
                    math.sin(2 * math.pi * k / trial_params.directions)])
        for k in range(trial_params.directions)
    ]
    curves: list[tuple[float, ...]] = []
    trial_index = 0
    for angle, trials in sched.phases:
        fld = CurlField(gain=gain, angle=angle)
        errs: list[float] = []
        for _ in range(trials):
            target = dirs[trial_index % len(dirs)]
            l, err = run_trial(
                l,
                fld,
                origin,
                target,
                trial_params.steps,
                trial_params.dt,
                tracking_gain=trial_params.tracking_gain,
                noise=trial_params.noise,
                rng=rng,
            )
            errs.append(err)
            trial_index += 1
        curves.append(tuple(errs))

    interference = math.nan
    savings = math.nan
    if len(curves) >= 2:
        interference = curves[1][0] - curves[0][-1]
    if len(curves) >= 3:
        criterion = curves[0][-1]
        first_reach = next(
            (i + 1 for i, e in enumerate(curves[0]) if e <= criterion),
            len(curves[0]) + 1,
        )
        relearn_reach = next(
            (i + 1 for i, e in enumerate(curves[2]) if e <= criterion),
            len(curves[2]) + 1,
        )
        savings = float(relearn_reach - first_reach)
    return LurResult(
        phase_errors=tuple(curves), interference=interference, savings=savings
    )


# ---------------------------------------------------------------------------
# CMYK arena and the gradient-following vehicle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CmykPoint:
    c: float
    m: float
    y: float
    k: float

    def __post_init__(self) -> None:
        for name, v in (("c", self.c), ("m", self.m), ("y", self.y), ("k", self.k)):
            if not (-1e-12 <= v <= 1.0 + 1e-12):
                raise ValueError(f"channel {name} out of [0, 1]: {v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.c, self.m, self.y, self.k])


def cmyk_distance(a: CmykPoint, b: CmykPoint) -> float:
    return float(np.linalg.norm(a.as_array() - b.as_array()))


@dataclass(frozen=True)
class CmykField:
    """Triangle carrying pure C, M, Y at its vertices; colors elsewhere are
    the barycentric mix with k derived as 1 - max(c, m, y)."""

    vertices: np.ndarray  # shape (3, 2): C, M, Y positions

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        if v.shape != (3, 2):
            raise ValueError(f"need three 2-D vertices, got shape {v.shape}")
        area2 = (v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[2, 0] - v[0, 0]) * (
            v[1, 1] - v[0, 1]
        )
        if abs(area2) < 1e-12:
            raise ValueError("triangle vertices are collinear")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    def barycentric(self, pos: np.ndarray) -> np.ndarray:
        p = np.asarray(pos, dtype=float)
        a, b, c = self.vertices
        m = np.column_stack([b - a, c - a])
        uv = np.linalg.solve(m, p - a)
        return np.array([1.0 - uv[0] - uv[1], uv[0], uv[1]])

    def contains(self, pos: np.ndarray, tol: float = 1e-12) -> bool:
        bary = self.barycentric(pos)
        return bool(np.all(bary >= -tol))

    def clamp(self, pos: np.ndarray) -> np.ndarray:
        """Nearest point of the triangle (Euclidean), identity inside."""
        p = np.asarray(pos, dtype=float)
        if self.contains(p):
            return p
        best = None
        best_d = math.inf
        for i in range(3):
            a = self.vertices[i]
            b = self.vertices[(i + 1) % 3]
            ab = b - a
            t = float(np.clip((p - a) @ ab / (ab @ ab), 0.0, 1.0))
            q = a + t * ab
            d = float(np.linalg.norm(p - q))
            if d < best_d:
                best_d = d
                best = q
        return best


def sample_cmyk(field_: CmykField, pos: np.ndarray) -> CmykPoint:
    """Color at a position; positions outside the triangle are clamped to
    its nearest boundary point first."""
    p = field_.clamp(np.asarray(pos, dtype=float))
    c, m, y = np.clip(field_.barycentric(p), 0.0, 1.0)
    return CmykPoint(c=float(c), m=float(m), y=float(y), k=float(1.0 - max(c, m, y)))


@dataclass(frozen=True)
class Vehicle:
    """Two-sensor gradient follower. Sensors sit at sensor_offset on either
    side of the heading; the turn rate is turn_gain * (left - right) sensed
    distance with the left sensor mounted clockwise of the heading, so the
    vehicle turns toward the side that reads closer to the target. Forward
    speed is speed_gain times the color distance at the body, so the drive
    dies exactly on the target."""

    position: np.ndarray
    heading: float
    sensor_offset: float = 0.05
    speed_gain: float = 0.5
    turn_gain: float = 8.0
    target: CmykPoint = None
    goal_radius: float = 0.05

    def __post_init__(self) -> None:
        if self.sensor_offset <= 0:
            raise ValueError(f"sensor offset must be positive, got {self.sensor_offset}")
        if self.speed_gain <= 0 or self.turn_gain < 0:
            raise ValueError("gains must be positive (turn gain may be 0 for a straight roller)")
        p = np.asarray(self.position, dtype=float).copy()
        p.flags.writeable = False
        object.__setattr__(self, "position", p)
        if self.target is None:
            raise ValueError("vehicle needs a target color")


def vehicle_step(v: Vehicle, field_: CmykField, dt: float) -> Vehicle:
    """One Euler step of the sensor-drive loop."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    h = v.heading
    fwd = np.array([math.cos(h), math.sin(h)])
    # Left sensor mounted clockwise (heading - 90 degrees): the cross-coupled
    # wiring that makes the difference drive attract rather than repel.
    left_at = v.position + v.sensor_offset * np.array([math.sin(h), -math.cos(h)])
    right_at = v.position + v.sensor_offset * np.array([-math.sin(h), math.cos(h)])
    d_left = cmyk_distance(sample_cmyk(field_, left_at), v.target)
    d_right = cmyk_distance(sample_cmyk(field_, right_at), v.target)
    d_body = cmyk_distance(sample_cmyk(field_, v.position), v.target)
    speed = v.speed_gain * d_body
    new_heading = h + dt * v.turn_gain * (d_left - d_right)
    new_pos = field_.clamp(v.position + dt * speed * fwd)
    return replace(v, position=new_pos, heading=new_heading)


def vehicle_distance(v: Vehicle, field_: CmykField) -> float:
    """Color distance from the vehicle's current position to its target."""
    return cmyk_distance(sample_cmyk(field_, v.position), v.target)


@dataclass(frozen=True)
class StageReport:
    visited: int
    total: int

    @property
    def coverage(self) -> float:
        return self.visited / self.total


def run_expanding_goal(
    v: Vehicle,
    field_: CmykField,
    goals: list[tuple[CmykPoint, ...]],
    T: int,
    dt: float = 0.02,
) -> tuple[list[np.ndarray], list[StageReport]]:
    """Visit nested target sets stage by stage.

    Each stage gets T steps; within a stage the vehicle steers at the
    nearest not-yet-visited target (by color distance) and a target counts
    as visited once the vehicle comes within its goal radius. Stages must
    be nested (each set contains the previous one) and non-empty.
    """
    if not goals:
        raise ValueError("need at least one goal stage")
    for g in goals:
        if len(g) == 0:
            raise ValueError("goal stages must be non-empty")
    for earlier, later in zip(goals, goals[1:]):
        if not set(earlier).issubset(set(later)):
            raise ValueError("goal stages must be nested, each containing the last")

    path: list[np.ndarray] = [np.array(v.position)]
    reports: list[StageReport] = []
    for stage in goals:
        visited: set[CmykPoint] = set()
        for _ in range(T):
            here = sample_cmyk(field_, v.position)
            for tgt in stage:
                if tgt not in visited and cmyk_distance(here, tgt) <= v.goal_radius:
                    visited.add(tgt)
            remaining = [t for t in stage if t not in visited]
            if not remaining:
                break
            nearest = min(remaining, key=lambda t: cmyk_distance(here, t))
            v = replace(v, target=nearest)
            v = vehicle_step(v, field_, dt)
            path.append(np.array(v.position))
        here = sample_cmyk(field_, v.position)
        for tgt in stage:
            if tgt not in visited and cmyk_distance(here, tgt) <= v.goal_radius:
                visited.add(tgt)
        reports.append(StageReport(visited=len(visited), total=len(stage)))
    return path, reports


def equilateral_field(side: float = 1.0) -> CmykField:
    """C at the origin, M to the right, Y above: the standard test arena."""
    return CmykField(
        vertices=np.array(
            [[0.0, 0.0], [side, 0.0], [side / 2.0, side * math.sqrt(3.0) / 2.0]]
        )
    )
