"""Reciprocal collision-avoidance crowd engine.

Each pedestrian turns every nearby agent (and the robot, which pedestrians
treat as one more agent) into a half-plane constraint in velocity space,
derived from the truncated velocity obstacle, then picks the feasible
velocity closest to its preferred one with an incremental two-dimensional
linear program. Wall segments contribute constraints with full (rather than
shared) responsibility: walls do not yield.

The constraint geometry and the LP follow the reference formulation of
optimal reciprocal collision avoidance; constraints are built in stable
order (walls first, then neighbors by index) so stepping is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .geometry import Segment, Vec2
from .world import SpawnZone

EPSILON = 1e-10
PED_GOAL_TOLERANCE = 0.3


class HalfPlane(NamedTuple):
    """Velocity-space constraint: permitted velocities satisfy
    dot(normal, v - point) >= 0."""

    point: Vec2
    normal: Vec2


@dataclass
class OrcaAgent:
    position: Vec2
    velocity: Vec2
    goal: Vec2
    radius: float = 0.30
    pref_speed: float = 2.0
    max_speed: float = 2.0
    time_horizon: float = 2.0
    time_horizon_obst: float = 1.0
    neighbor_range: float = 5.0
    # re-tasking state; pair is None in the circle-crossing domain
    pair: tuple[SpawnZone, SpawnZone] | None = None
    goal_end: int = 1

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("agent radius must be positive")
        if not (0 < self.pref_speed <= self.max_speed):
            raise ValueError("need 0 < pref_speed <= max_speed")
        if self.time_horizon <= 0 or self.time_horizon_obst <= 0:
            raise ValueError("time horizons must be positive")


@dataclass
class CrowdState:
    agents: list[OrcaAgent]
    robot_proxy: OrcaAgent | None = None

    def validate_separation(self) -> None:
        for i, a in enumerate(self.agents):
            for b in self.agents[i + 1:]:
                gap = a.position.distance_to(b.position) - a.radius - b.radius
                if gap < 0:
                    raise ValueError(f"agents at {a.position} and {b.position} penetrate")


# ---------------------------------------------------------------------------
# Constraint construction
# ---------------------------------------------------------------------------
# Internally a constraint is an RVO-style directed line (px, py, dx, dy):
# permitted velocities lie to the LEFT of direction d through point p,
# i.e. cross(d, v - p) >= 0. HalfPlane normals are the left perpendicular.

def _line_to_halfplane(px: float, py: float, dx: float, dy: float) -> HalfPlane:
    return HalfPlane(Vec2(px, py), Vec2(-dy, dx))


def _halfplane_to_line(h: HalfPlane) -> tuple[float, float, float, float]:
    n = h.normal
    scale = math.hypot(n.x, n.y)
    return (h.point.x, h.point.y, n.y / scale, -n.x / scale)


def _agent_line(agent: OrcaAgent, other: OrcaAgent, inv_horizon: float,
                inv_dt: float) -> tuple[float, float, float, float]:
    """ORCA constraint against one neighbor, reciprocal responsibility 1/2."""
    rel_px = other.position.x - agent.position.x
    rel_py = other.position.y - agent.position.y
    rel_vx = agent.velocity.x - other.velocity.x
    rel_vy = agent.velocity.y - other.velocity.y
    dist_sq = rel_px * rel_px + rel_py * rel_py
    combined = agent.radius + other.radius
    combined_sq = combined * combined

    if dist_sq > combined_sq:
        # w: vector from truncation-disc center to relative velocity
        wx = rel_vx - inv_horizon * rel_px
        wy = rel_vy - inv_horizon * rel_py
        w_len_sq = wx * wx + wy * wy
        dot1 = wx * rel_px + wy * rel_py
        if dot1 < 0.0 and dot1 * dot1 > combined_sq * w_len_sq:
            # project on the truncation disc
            w_len = math.sqrt(w_len_sq)
            ux, uy = wx / w_len, wy / w_len
            dir_x, dir_y = uy, -ux
            u = combined * inv_horizon - w_len
            ux, uy = u * ux, u * uy
        else:
            # project on a cone leg
            leg = math.sqrt(dist_sq - combined_sq)
            if rel_px * wy - rel_py * wx > 0.0:
                dir_x = (rel_px * leg - rel_py * combined) / dist_sq
                dir_y = (rel_px * combined + rel_py * leg) / dist_sq
            else:
                dir_x = -(rel_px * leg + rel_py * combined) / dist_sq
                dir_y = -(-rel_px * combined + rel_py * leg) / dist_sq
            dot2 = rel_vx * dir_x + rel_vy * dir_y
            ux = dot2 * dir_x - rel_vx
            uy = dot2 * dir_y - rel_vy
    else:
        # already penetrating: resolve the overlap within one time step
        wx = rel_vx - inv_dt * rel_px
        wy = rel_vy - inv_dt * rel_py
        w_len = math.hypot(wx, wy)
        if w_len < EPSILON:
            # symmetric degenerate overlap: push along the line between centers
            if dist_sq > 0.0:
                d = math.sqrt(dist_sq)
                nx, ny = -rel_px / d, -rel_py / d
            else:
                nx, ny = 1.0, 0.0
            ux, uy = combined * inv_dt * nx, combined * inv_dt * ny
            dir_x, dir_y = ny, -nx
        else:
            nux, nuy = wx / w_len, wy / w_len
            dir_x, dir_y = nuy, -nux
            u = combined * inv_dt - w_len
            ux, uy = u * nux, u * nuy

    return (agent.velocity.x + 0.5 * ux, agent.velocity.y + 0.5 * uy, dir_x, dir_y)


def _wall_line(agent: OrcaAgent, wall: Segment,
               inv_horizon_obst: float) -> tuple[float, float, float, float] | None:
    """ORCA constraint for one wall segment, full responsibility.

    The segment is oriented so the agent lies to its right, matching the
    winding the velocity-obstacle leg formulas assume. Returns None when the
    wall cannot affect the agent within the horizon.
    """
    px, py = agent.position
    r = agent.radius
    ax, ay = wall.a.x - px, wall.a.y - py
    bx, by = wall.b.x - px, wall.b.y - py
    ex, ey = bx - ax, by - ay
    if ex * ay - ey * ax < 0.0:
        # agent on the left: flip orientation
        ax, ay, bx, by = bx, by, ax, ay
        ex, ey = -ex, -ey

    dist_sq1 = ax * ax + ay * ay
    dist_sq2 = bx * bx + by * by
    r_sq = r * r
    edge_len_sq = ex * ex + ey * ey
    s = -(ax * ex + ay * ey) / edge_len_sq
    lx, ly = -ax - s * ex, -ay - s * ey
    dist_sq_line = lx * lx + ly * ly

    vx, vy = agent.velocity

    if s < 0.0 and dist_sq1 <= r_sq:
        # touching the first endpoint: forbid velocities that deepen contact
        d = math.hypot(ax, ay)
        if d < EPSILON:
            return None
        return (0.0, 0.0, -ay / d, ax / d)
    if s > 1.0 and dist_sq2 <= r_sq:
        d = math.hypot(bx, by)
        if d < EPSILON:
            return None
        return (0.0, 0.0, -by / d, bx / d)
    if 0.0 <= s <= 1.0 and dist_sq_line <= r_sq:
        # touching the segment body: permitted side faces away from the wall
        e_len = math.sqrt(edge_len_sq)
        return (0.0, 0.0, -ex / e_len, -ey / e_len)

    # Tangent legs of the inflated segment, seen from the agent.
    if s < 0.0 and dist_sq_line <= r_sq:
        # endpoint a occludes the whole segment
        point_obstacle = True
        bx, by, dist_sq2 = ax, ay, dist_sq1
        leg1 = math.sqrt(dist_sq1 - r_sq)
        left_dx = (ax * leg1 - ay * r) / dist_sq1
        left_dy = (ax * r + ay * leg1) / dist_sq1
        right_dx = (ax * leg1 + ay * r) / dist_sq1
        right_dy = (-ax * r + ay * leg1) / dist_sq1
    elif s > 1.0 and dist_sq_line <= r_sq:
        point_obstacle = True
        ax, ay, dist_sq1 = bx, by, dist_sq2
        leg2 = math.sqrt(dist_sq2 - r_sq)
        left_dx = (bx * leg2 - by * r) / dist_sq2
        left_dy = (bx * r + by * leg2) / dist_sq2
        right_dx = (bx * leg2 + by * r) / dist_sq2
        right_dy = (-bx * r + by * leg2) / dist_sq2
    else:
        point_obstacle = False
        leg1 = math.sqrt(dist_sq1 - r_sq)
        left_dx = (ax * leg1 - ay * r) / dist_sq1
        left_dy = (ax * r + ay * leg1) / dist_sq1
        leg2 = math.sqrt(dist_sq2 - r_sq)
        right_dx = (bx * leg2 + by * r) / dist_sq2
        right_dy = (-bx * r + by * leg2) / dist_sq2

    left_cut_x, left_cut_y = inv_horizon_obst * ax, inv_horizon_obst * ay
    right_cut_x, right_cut_y = inv_horizon_obst * bx, inv_horizon_obst * by
    cut_x, cut_y = right_cut_x - left_cut_x, right_cut_y - left_cut_y

    if point_obstacle:
        t = 0.5
    else:
        t = ((vx - left_cut_x) * cut_x + (vy - left_cut_y) * cut_y) / (
            cut_x * cut_x + cut_y * cut_y)
    t_left = (vx - left_cut_x) * left_dx + (vy - left_cut_y) * left_dy
    t_right = (vx - right_cut_x) * right_dx + (vy - right_cut_y) * right_dy

    if (t < 0.0 and t_left < 0.0) or (point_obstacle and t_left < 0.0 and t_right < 0.0):
        # closest to the left truncation arc
        wx, wy = vx - left_cut_x, vy - left_cut_y
        w_len = math.hypot(wx, wy)
        if w_len < EPSILON:
            return None
        ux, uy = wx / w_len, wy / w_len
        return (left_cut_x + r * inv_horizon_obst * ux,
                left_cut_y + r * inv_horizon_obst * uy, uy, -ux)
    if t > 1.0 and t_right < 0.0:
        wx, wy = vx - right_cut_x, vy - right_cut_y
        w_len = math.hypot(wx, wy)
        if w_len < EPSILON:
            return None
        ux, uy = wx / w_len, wy / w_len
        return (right_cut_x + r * inv_horizon_obst * ux,
                right_cut_y + r * inv_horizon_obst * uy, uy, -ux)

    inf = math.inf
    if point_obstacle or t < 0.0 or t > 1.0:
        d_cut = inf
    else:
        cx, cy = left_cut_x + t * cut_x, left_cut_y + t * cut_y
        d_cut = (vx - cx) ** 2 + (vy - cy) ** 2
    if t_left < 0.0:
        d_left = inf
    else:
        cx, cy = left_cut_x + t_left * left_dx, left_cut_y + t_left * left_dy
        d_left = (vx - cx) ** 2 + (vy - cy) ** 2
    if t_right < 0.0:
        d_right = inf
    else:
        cx, cy = right_cut_x + t_right * right_dx, right_cut_y + t_right * right_dy
        d_right = (vx - cx) ** 2 + (vy - cy) ** 2

    if d_cut <= d_left and d_cut <= d_right:
        e_len = math.sqrt(edge_len_sq)
        dir_x, dir_y = -ex / e_len, -ey / e_len
        return (left_cut_x + r * inv_horizon_obst * -dir_y,
                left_cut_y + r * inv_horizon_obst * dir_x, dir_x, dir_y)
    if d_left <= d_right:
        return (left_cut_x + r * inv_horizon_obst * -left_dy,
                left_cut_y + r * inv_horizon_obst * left_dx, left_dx, left_dy)
    return (right_cut_x + r * inv_horizon_obst * right_dy,
            right_cut_y + r * inv_horizon_obst * -right_dx, -right_dx, -right_dy)


def _segment_distance(px: float, py: float, wall: Segment) -> float:
    ex, ey = wall.b.x - wall.a.x, wall.b.y - wall.a.y
    wx, wy = px - wall.a.x, py - wall.a.y
    t = (wx * ex + wy * ey) / (ex * ex + ey * ey)
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(wx - t * ex, wy - t * ey)


def orca_halfplanes(agent: OrcaAgent, neighbors: list[OrcaAgent],
                    walls: list[Segment], dt: float) -> list[HalfPlane]:
    """All velocity constraints for one agent: walls first, then neighbors
    within range, in stable order."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    lines, _ = _orca_lines(agent, neighbors, walls, dt)
    return [_line_to_halfplane(*ln) for ln in lines]


def _orca_lines(agent: OrcaAgent, neighbors: list[OrcaAgent],
                walls: list[Segment], dt: float):
    """Constraint lines for one agent plus the count of leading wall lines."""
    inv_horizon = 1.0 / agent.time_horizon
    inv_horizon_obst = 1.0 / agent.time_horizon_obst
    inv_dt = 1.0 / dt
    lines = []
    reach = agent.neighbor_range
    px, py = agent.position
    for wall in walls:
        if _segment_distance(px, py, wall) > reach:
            continue
        line = _wall_line(agent, wall, inv_horizon_obst)
        if line is not None:
            lines.append(line)
    num_obst = len(lines)
    for other in neighbors:
        if other is agent:
            continue
        if agent.position.distance_to(other.position) > reach:
            continue
        lines.append(_agent_line(agent, other, inv_horizon, inv_dt))
    return lines, num_obst


# ---------------------------------------------------------------------------
# Incremental linear programs on the velocity disc
# ---------------------------------------------------------------------------

def _lp1(lines, line_no, radius, opt_x, opt_y, direction_opt, res_x, res_y):
    """Optimize along the boundary of line `line_no` subject to earlier lines
    and the speed disc. Returns (ok, x, y)."""
    p_x, p_y, d_x, d_y = lines[line_no]
    dot_product = p_x * d_x + p_y * d_y
    discriminant = dot_product * dot_product + radius * radius - (p_x * p_x + p_y * p_y)
    if discriminant < 0.0:
        return False, res_x, res_y
    sqrt_disc = math.sqrt(discriminant)
    t_left = -dot_product - sqrt_disc
    t_right = -dot_product + sqrt_disc

    for i in range(line_no):
        q_x, q_y, e_x, e_y = lines[i]
        denominator = d_x * e_y - d_y * e_x
        numerator = e_x * (p_y - q_y) - e_y * (p_x - q_x)
        if abs(denominator) <= EPSILON:
            if numerator < 0.0:
                return False, res_x, res_y
            continue
        t = numerator / denominator
        if denominator >= 0.0:
            t_right = min(t_right, t)
        else:
            t_left = max(t_left, t)
        if t_left > t_right:
            return False, res_x, res_y

    if direction_opt:
        if opt_x * d_x + opt_y * d_y > 0.0:
            t = t_right
        else:
            t = t_left
    else:
        t = d_x * (opt_x - p_x) + d_y * (opt_y - p_y)
        if t < t_left:
            t = t_left
        elif t > t_right:
            t = t_right
    return True, p_x + t * d_x, p_y + t * d_y


def _lp2(lines, radius, opt_x, opt_y, direction_opt):
    """Project the preferred velocity onto the constraint intersection.

    Returns (fail_index, x, y); fail_index == len(lines) means success, and
    on failure (x, y) is the result of the last feasible prefix."""
    if direction_opt:
        res_x, res_y = opt_x * radius, opt_y * radius
    elif opt_x * opt_x + opt_y * opt_y > radius * radius:
        norm = math.hypot(opt_x, opt_y)
        res_x, res_y = opt_x / norm * radius, opt_y / norm * radius
    else:
        res_x, res_y = opt_x, opt_y

    for i, (p_x, p_y, d_x, d_y) in enumerate(lines):
        if d_x * (p_y - res_y) - d_y * (p_x - res_x) > 0.0:
            ok, new_x, new_y = _lp1(lines, i, radius, opt_x, opt_y, direction_opt,
                                    res_x, res_y)
            if not ok:
                return i, res_x, res_y
            res_x, res_y = new_x, new_y
    return len(lines), res_x, res_y


def solve_lp2(halfplanes: list[HalfPlane], pref_velocity: Vec2,
              max_speed: float) -> tuple[Vec2, bool]:
    """Velocity of minimum distance to the preference inside all half-planes
    and the speed disc; on infeasibility the flag is False and the returned
    velocity is the last feasible prefix's optimum."""
    if max_speed <= 0:
        raise ValueError("max_speed must be positive")
    lines = [_halfplane_to_line(h) for h in halfplanes]
    fail, x, y = _lp2(lines, max_speed, pref_velocity.x, pref_velocity.y, False)
    return Vec2(x, y), fail == len(lines)


def solve_lp3(halfplanes: list[HalfPlane], max_speed: float) -> Vec2:
    """Velocity minimizing the maximum signed violation across all
    half-planes, within the speed disc."""
    if max_speed <= 0:
        raise ValueError("max_speed must be positive")
    lines = [_halfplane_to_line(h) for h in halfplanes]
    x, y = _lp3_run(lines, 0, 0, max_speed, 0.0, 0.0)
    return Vec2(x, y)


def _lp3_run(lines, num_obst, begin, radius, res_x, res_y):
    distance = 0.0
    for i in range(begin, len(lines)):
        p_x, p_y, d_x, d_y = lines[i]
        if d_x * (p_y - res_y) - d_y * (p_x - res_x) > distance:
            proj = list(lines[:num_obst])
            for j in range(num_obst, i):
                q_x, q_y, e_x, e_y = lines[j]
                denominator = d_x * e_y - d_y * e_x
                if abs(denominator) <= EPSILON:
                    if d_x * e_x + d_y * e_y > 0.0:
                        continue
                    n_x, n_y = 0.5 * (p_x + q_x), 0.5 * (p_y + q_y)
                else:
                    t = (e_x * (p_y - q_y) - e_y * (p_x - q_x)) / denominator
                    n_x, n_y = p_x + t * d_x, p_y + t * d_y
                dir_x, dir_y = e_x - d_x, e_y - d_y
                norm = math.hypot(dir_x, dir_y)
                proj.append((n_x, n_y, dir_x / norm, dir_y / norm))
            fail, new_x, new_y = _lp2(proj, radius, -d_y, d_x, True)
            if fail == len(proj):
                res_x, res_y = new_x, new_y
            distance = d_x * (p_y - res_y) - d_y * (p_x - res_x)
    return res_x, res_y


# ---------------------------------------------------------------------------
# Crowd stepping
# ---------------------------------------------------------------------------

def _preferred_velocity(agent: OrcaAgent, dt: float) -> tuple[float, float]:
    gx = agent.goal.x - agent.position.x
    gy = agent.goal.y - agent.position.y
    dist = math.hypot(gx, gy)
    if dist < EPSILON:
        return 0.0, 0.0
    speed = min(agent.pref_speed, dist / dt)
    return gx / dist * speed, gy / dist * speed


def agent_velocity(agent: OrcaAgent, neighbors: list[OrcaAgent],
                   walls: list[Segment], dt: float,
                   pref: tuple[float, float] | None = None) -> Vec2:
    """One agent's collision-avoiding velocity for this step."""
    lines, num_obst = _orca_lines(agent, neighbors, walls, dt)
    if pref is None:
        pref = _preferred_velocity(agent, dt)
    fail, vx, vy = _lp2(lines, agent.max_speed, pref[0], pref[1], False)
    if fail < len(lines):
        vx, vy = _lp3_run(lines, num_obst, fail, agent.max_speed, vx, vy)
    return Vec2(vx, vy)


def step_crowd(state: CrowdState, walls: list[Segment], dt: float,
               rng: np.random.Generator | None = None,
               goal_tolerance: float = PED_GOAL_TOLERANCE) -> CrowdState:
    """Advance every pedestrian one step (two-phase: velocities from the
    immutable pre-state, then positions).

    With an rng, pedestrians arriving within `goal_tolerance` of their goal
    are re-tasked: zone-pair walkers get a fresh goal at the opposite end,
    circle crossers bounce back to the antipode. Without an rng they stop.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    bodies: list[OrcaAgent] = list(state.agents)
    if state.robot_proxy is not None:
        bodies.append(state.robot_proxy)

    new_velocities = [
        agent_velocity(agent, bodies, walls, dt) for agent in state.agents
    ]

    new_agents = []
    for agent, vel in zip(state.agents, new_velocities):
        pos = Vec2(agent.position.x + vel.x * dt, agent.position.y + vel.y * dt)
        moved = replace(agent, position=pos, velocity=vel)
        if rng is not None and pos.distance_to(agent.goal) <= goal_tolerance:
            moved = _retask(moved, rng)
        new_agents.append(moved)

    return CrowdState(agents=new_agents, robot_proxy=state.robot_proxy)


def _retask(agent: OrcaAgent, rng: np.random.Generator) -> OrcaAgent:
    if agent.pair is None:
        return replace(agent, goal=Vec2(-agent.goal.x, -agent.goal.y))
    end = 1 - agent.goal_end
    zone = agent.pair[end]
    r = zone.radius * math.sqrt(rng.uniform())
    theta = rng.uniform(0.0, 2.0 * math.pi)
    goal = Vec2(zone.center.x + r * math.cos(theta),
                zone.center.y + r * math.sin(theta))
    return replace(agent, goal=goal, goal_end=end)
