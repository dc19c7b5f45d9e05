"""2D primitives shared by every other module: vectors, segments, poses, raycasting.

All quantities are meters and radians, double precision. Functions here are
pure and hold no state, so they are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, k: float):  # type: ignore[override]
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        """z-component of the 3D cross product (a.k.a. 2D determinant)."""
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def norm_sq(self) -> float:
        return self.x * self.x + self.y * self.y

    def normalized(self) -> "Vec2":
        n = math.hypot(self.x, self.y)
        if n == 0.0:
            raise ValueError("cannot normalize zero vector")
        return Vec2(self.x / n, self.y / n)

    def perp(self) -> "Vec2":
        """Counter-clockwise perpendicular."""
        return Vec2(-self.y, self.x)

    def rotated(self, angle: float) -> "Vec2":
        c, s = math.cos(angle), math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)

    def distance_to(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


def require_finite(v: Vec2, what: str) -> Vec2:
    """Reject NaN/inf before it enters any world state."""
    if not v.is_finite():
        raise ValueError(f"{what} has non-finite components: {v}")
    return v


@dataclass(frozen=True)
class Segment:
    a: Vec2
    b: Vec2

    def __post_init__(self) -> None:
        require_finite(self.a, "segment endpoint")
        require_finite(self.b, "segment endpoint")
        if self.a == self.b:
            raise ValueError(f"zero-length segment at {self.a}")

    @property
    def direction(self) -> Vec2:
        return (self.b - self.a).normalized()

    @property
    def length(self) -> float:
        return self.a.distance_to(self.b)


def normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    theta = math.fmod(theta, TWO_PI)
    if theta <= -math.pi:
        theta += TWO_PI
    elif theta > math.pi:
        theta -= TWO_PI
    return theta


@dataclass(frozen=True)
class Pose:
    position: Vec2
    heading: float

    def __post_init__(self) -> None:
        require_finite(self.position, "pose position")
        if not math.isfinite(self.heading):
            raise ValueError("pose heading is not finite")
        object.__setattr__(self, "heading", normalize_angle(self.heading))


def to_robot_frame(world_point: Vec2, robot: Pose) -> Vec2:
    """Express a world-frame point in the robot frame (x forward, y left)."""
    d = world_point - robot.position
    c, s = math.cos(robot.heading), math.sin(robot.heading)
    return Vec2(c * d.x + s * d.y, -s * d.x + c * d.y)


def from_robot_frame(robot_point: Vec2, robot: Pose) -> Vec2:
    c, s = math.cos(robot.heading), math.sin(robot.heading)
    return Vec2(
        robot.position.x + c * robot_point.x - s * robot_point.y,
        robot.position.y + s * robot_point.x + c * robot_point.y,
    )


def point_segment_distance(p: Vec2, s: Segment) -> float:
    """Euclidean distance from p to the closest point of segment s."""
    e = s.b - s.a
    w = p - s.a
    t = w.dot(e) / e.norm_sq()
    if t <= 0.0:
        return w.norm()
    if t >= 1.0:
        return p.distance_to(s.b)
    return (w - e * t).norm()


def _ray_segment_hit(px: float, py: float, dx: float, dy: float,
                     ax: float, ay: float, bx: float, by: float) -> float:
    """Parameter t >= 0 of the first ray/segment intersection, or inf."""
    ex, ey = bx - ax, by - ay
    denom = dx * ey - dy * ex
    wx, wy = ax - px, ay - py
    if denom == 0.0:
        # Parallel: only a colinear ray can hit, at the nearest endpoint ahead.
        if wx * dy - wy * dx != 0.0:
            return math.inf
        ta = wx * dx + wy * dy
        tb = (bx - px) * dx + (by - py) * dy
        lo, hi = min(ta, tb), max(ta, tb)
        if hi < 0.0:
            return math.inf
        return max(lo, 0.0)
    t = (wx * ey - wy * ex) / denom
    u = (wx * dy - wy * dx) / denom
    if t < 0.0 or u < 0.0 or u > 1.0:
        return math.inf
    return t


def _ray_circle_hit(px: float, py: float, dx: float, dy: float,
                    cx: float, cy: float, r: float) -> float:
    """Parameter t >= 0 of the first ray/circle intersection, or inf.

    A ray starting inside the circle reports 0 (already penetrating).
    """
    mx, my = cx - px, cy - py
    b = dx * mx + dy * my
    c = mx * mx + my * my - r * r
    if c <= 0.0:
        return 0.0
    disc = b * b - c
    if disc < 0.0:
        return math.inf
    t = b - math.sqrt(disc)
    if t < 0.0:
        return math.inf
    return t


def raycast(
    origin: Vec2,
    direction: Vec2,
    walls: list[Segment],
    circles: list[tuple[Vec2, float]],
    max_range: float,
) -> float:
    """Distance along a ray to the nearest wall or circle, capped at max_range.

    `direction` must be unit-norm and `max_range` positive.
    """
    if max_range <= 0.0:
        raise ValueError("max_range must be positive")
    if abs(direction.norm() - 1.0) > 1e-9:
        raise ValueError("raycast direction must be unit-norm")
    px, py = origin
    dx, dy = direction
    best = max_range
    for s in walls:
        t = _ray_segment_hit(px, py, dx, dy, s.a.x, s.a.y, s.b.x, s.b.y)
        if t < best:
            best = t
    for center, r in circles:
        t = _ray_circle_hit(px, py, dx, dy, center.x, center.y, r)
        if t < best:
            best = t
    return best


def raycast_fan(
    origin: Vec2,
    angles: np.ndarray,
    wall_array: np.ndarray,
    circle_array: np.ndarray,
    max_range: float,
) -> np.ndarray:
    """Vectorized multi-ray cast used by the lidar.

    `wall_array` is (W, 4) rows [ax, ay, bx, by]; `circle_array` is (C, 3)
    rows [cx, cy, r]. Returns one range per angle, each in [0, max_range].
    Matches `raycast` ray-by-ray (the scalar path is the reference).
    """
    n = angles.shape[0]
    dirs_x = np.cos(angles)
    dirs_y = np.sin(angles)
    best = np.full(n, max_range)

    if wall_array.shape[0] > 0:
        ax = wall_array[:, 0][None, :] - origin.x
        ay = wall_array[:, 1][None, :] - origin.y
        ex = (wall_array[:, 2] - wall_array[:, 0])[None, :]
        ey = (wall_array[:, 3] - wall_array[:, 1])[None, :]
        dx = dirs_x[:, None]
        dy = dirs_y[:, None]
        denom = dx * ey - dy * ex
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (ax * ey - ay * ex) / denom
            u = (ax * dy - ay * dx) / denom
        valid = (denom != 0.0) & (t >= 0.0) & (u >= 0.0) & (u <= 1.0)
        t = np.where(valid, t, np.inf)
        best = np.minimum(best, t.min(axis=1))
        # Colinear hits are vanishingly rare in the fan; resolve them exactly.
        degenerate = (denom == 0.0) & (ax * dy - ay * dx == 0.0)
        if degenerate.any():
            for i, j in zip(*np.nonzero(degenerate)):
                ta = ax[0, j] * dirs_x[i] + ay[0, j] * dirs_y[i]
                tb = ta + ex[0, j] * dirs_x[i] + ey[0, j] * dirs_y[i]
                lo, hi = min(ta, tb), max(ta, tb)
                if hi >= 0.0:
                    best[i] = min(best[i], max(lo, 0.0))

    if circle_array.shape[0] > 0:
        mx = circle_array[:, 0][None, :] - origin.x
        my = circle_array[:, 1][None, :] - origin.y
        b = dirs_x[:, None] * mx + dirs_y[:, None] * my
        c = (mx * mx + my * my - circle_array[:, 2][None, :] ** 2)
        disc = b * b - c
        with np.errstate(invalid="ignore"):
            root = np.sqrt(np.maximum(disc, 0.0))
        t = b - root
        t = np.where((disc >= 0.0) & (t >= 0.0), t, np.inf)
        t = np.where(c <= 0.0, 0.0, t)
        best = np.minimum(best, t.min(axis=1))

    return best
