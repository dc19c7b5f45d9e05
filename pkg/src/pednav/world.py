"""Layouts (walls + spawn zones), occupancy grids, and episode start/goal sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import yaml

from .geometry import Pose, Segment, Vec2

# Clearance demanded around spawn points; matches the default robot radius.
ROBOT_CLEARANCE = 0.3
PEDESTRIAN_RADIUS = 0.3
MIN_START_GOAL_SEPARATION = 2.0
MAX_SAMPLING_RETRIES = 1000


class SchemaError(ValueError):
    """Layout document does not match the expected schema."""


class ValidationError(ValueError):
    """Layout violates a structural invariant (names the offending element)."""


class SamplingExhausted(RuntimeError):
    """Rejection sampling failed; zones are too crowded for the request."""


@dataclass(frozen=True)
class SpawnZone:
    center: Vec2
    radius: float

    def __post_init__(self) -> None:
        if not (self.radius > 0.0) or not math.isfinite(self.radius):
            raise ValidationError(f"spawn zone at {self.center} has radius {self.radius}")


@dataclass(frozen=True)
class Layout:
    """Static world of one scenario: a 20m x 20m box of walls plus spawn zones.

    Bounds are centered on the origin. `circle_radius`, when set, switches
    pedestrian sampling to the circle-crossing protocol (start on the circle,
    goal at the antipodal point) instead of zone-pair sampling.
    """

    name: str
    width: float
    height: float
    walls: tuple[Segment, ...]
    robot_zones: tuple[SpawnZone, ...]
    ped_zone_pairs: tuple[tuple[SpawnZone, SpawnZone], ...]
    default_pedestrians: int
    circle_radius: float | None = None

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(f"layout {self.name}: non-positive bounds")
        if self.default_pedestrians < 0:
            raise ValidationError(f"layout {self.name}: negative pedestrian count")
        xmin, ymin, xmax, ymax = self.bounds
        eps = 1e-9
        for w in self.walls:
            for p in (w.a, w.b):
                if not (xmin - eps <= p.x <= xmax + eps and ymin - eps <= p.y <= ymax + eps):
                    raise ValidationError(
                        f"layout {self.name}: wall endpoint {p} outside bounds")
        zones = list(self.robot_zones)
        for pair in self.ped_zone_pairs:
            zones.extend(pair)
        for z in zones:
            if not (xmin + z.radius <= z.center.x <= xmax - z.radius
                    and ymin + z.radius <= z.center.y <= ymax - z.radius):
                raise ValidationError(
                    f"layout {self.name}: zone at {z.center} exceeds bounds")
            clearance = self.wall_clearance(z.center)
            if clearance <= z.radius:
                raise ValidationError(
                    f"layout {self.name}: zone at {z.center} (r={z.radius}) "
                    f"intersects a wall (clearance {clearance:.3f})")
            if clearance < ROBOT_CLEARANCE:
                raise ValidationError(
                    f"layout {self.name}: zone at {z.center} lacks robot clearance")
        if len(self.robot_zones) < 2:
            raise ValidationError(f"layout {self.name}: needs >= 2 robot zones")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (-self.width / 2.0, -self.height / 2.0, self.width / 2.0, self.height / 2.0)

    @cached_property
    def wall_array(self) -> np.ndarray:
        """Walls as an (W, 4) float array [ax, ay, bx, by] for vectorized ops."""
        if not self.walls:
            return np.zeros((0, 4))
        return np.array([[w.a.x, w.a.y, w.b.x, w.b.y] for w in self.walls])

    def wall_clearance(self, p: Vec2) -> float:
        """Distance from a point to the nearest wall (inf when there are none)."""
        if not self.walls:
            return math.inf
        return float(np.min(_segment_distances(np.array([[p.x, p.y]]), self.wall_array)))


def _segment_distances(points: np.ndarray, segments: np.ndarray) -> np.ndarray:
    """Distances from each point (N,2) to each segment (W,4); returns (N,W)."""
    a = segments[None, :, 0:2]
    e = segments[None, :, 2:4] - a
    w = points[:, None, :] - a
    ee = np.einsum("nwk,nwk->nw", e, e)
    t = np.clip(np.einsum("nwk,nwk->nw", w, e) / ee, 0.0, 1.0)
    closest = a + t[:, :, None] * e
    d = points[:, None, :] - closest
    return np.sqrt(np.einsum("nwk,nwk->nw", d, d))


# ---------------------------------------------------------------------------
# Layout document schema
# ---------------------------------------------------------------------------

def _zone_to_doc(z: SpawnZone) -> dict:
    return {"cx": z.center.x, "cy": z.center.y, "r": z.radius}


def _zone_from_doc(doc: dict, where: str) -> SpawnZone:
    try:
        return SpawnZone(Vec2(float(doc["cx"]), float(doc["cy"])), float(doc["r"]))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed zone in {where}: {doc!r}") from exc


def layout_to_document(layout: Layout) -> dict:
    doc = {
        "name": layout.name,
        "bounds": {"w": layout.width, "h": layout.height},
        "walls": [
            {"ax": w.a.x, "ay": w.a.y, "bx": w.b.x, "by": w.b.y} for w in layout.walls
        ],
        "robot_zones": [_zone_to_doc(z) for z in layout.robot_zones],
        "ped_zone_pairs": [
            [_zone_to_doc(a), _zone_to_doc(b)] for a, b in layout.ped_zone_pairs
        ],
        "default_pedestrians": layout.default_pedestrians,
    }
    if layout.circle_radius is not None:
        doc["circle_radius"] = layout.circle_radius
    return doc


def layout_from_document(doc: dict) -> Layout:
    if not isinstance(doc, dict):
        raise SchemaError(f"layout document must be a mapping, got {type(doc).__name__}")
    required = {"name", "bounds", "walls", "robot_zones", "ped_zone_pairs",
                "default_pedestrians"}
    missing = required - doc.keys()
    if missing:
        raise SchemaError(f"layout document missing fields: {sorted(missing)}")
    bounds = doc["bounds"]
    if not isinstance(bounds, dict) or "w" not in bounds or "h" not in bounds:
        raise SchemaError("bounds must be a mapping with fields 'w' and 'h'")
    walls = []
    for i, w in enumerate(doc["walls"]):
        try:
            walls.append(Segment(Vec2(float(w["ax"]), float(w["ay"])),
                                 Vec2(float(w["bx"]), float(w["by"]))))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed wall #{i}: {w!r}") from exc
        except ValueError as exc:
            raise ValidationError(f"wall #{i}: {exc}") from exc
    zones = [_zone_from_doc(z, f"robot_zones[{i}]")
             for i, z in enumerate(doc["robot_zones"])]
    pairs = []
    for i, pair in enumerate(doc["ped_zone_pairs"]):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise SchemaError(f"ped_zone_pairs[{i}] must be a two-element list")
        pairs.append((_zone_from_doc(pair[0], f"ped_zone_pairs[{i}][0]"),
                      _zone_from_doc(pair[1], f"ped_zone_pairs[{i}][1]")))
    circle = doc.get("circle_radius")
    return Layout(
        name=str(doc["name"]),
        width=float(bounds["w"]),
        height=float(bounds["h"]),
        walls=tuple(walls),
        robot_zones=tuple(zones),
        ped_zone_pairs=tuple(pairs),
        default_pedestrians=int(doc["default_pedestrians"]),
        circle_radius=None if circle is None else float(circle),
    )


def load_layout(document: str | dict) -> Layout:
    """Parse a layout from a YAML/JSON document (text or already-parsed mapping)."""
    if isinstance(document, str):
        try:
            document = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            raise SchemaError(f"unparseable layout document: {exc}") from exc
    return layout_from_document(document)


def save_layout(layout: Layout) -> str:
    return yaml.safe_dump(layout_to_document(layout), sort_keys=False)


# ---------------------------------------------------------------------------
# Occupancy grid
# ---------------------------------------------------------------------------

@dataclass
class OccupancyGrid:
    """Binary rasterization of a layout, inflated for planning.

    `occupied[iy, ix]` is True when any wall passes within the inflation
    radius of that cell's center. Treat instances as read-only; they are
    cached and shared.
    """

    resolution: float
    origin: Vec2
    occupied: np.ndarray  # (ny, nx) bool

    @property
    def shape(self) -> tuple[int, int]:
        return self.occupied.shape

    def cell_of(self, p: Vec2) -> tuple[int, int]:
        ix = int(math.floor((p.x - self.origin.x) / self.resolution))
        iy = int(math.floor((p.y - self.origin.y) / self.resolution))
        return iy, ix

    def center_of(self, iy: int, ix: int) -> Vec2:
        return Vec2(self.origin.x + (ix + 0.5) * self.resolution,
                    self.origin.y + (iy + 0.5) * self.resolution)

    def in_bounds(self, iy: int, ix: int) -> bool:
        ny, nx = self.occupied.shape
        return 0 <= iy < ny and 0 <= ix < nx

    def is_free(self, p: Vec2) -> bool:
        iy, ix = self.cell_of(p)
        return self.in_bounds(iy, ix) and not self.occupied[iy, ix]


def _cell_centers(layout: Layout, resolution: float) -> tuple[np.ndarray, int, int, Vec2]:
    xmin, ymin, xmax, ymax = layout.bounds
    nx = int(round((xmax - xmin) / resolution))
    ny = int(round((ymax - ymin) / resolution))
    xs = xmin + (np.arange(nx) + 0.5) * resolution
    ys = ymin + (np.arange(ny) + 0.5) * resolution
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    return pts, ny, nx, Vec2(xmin, ymin)


def rasterize(layout: Layout, resolution: float, inflation_radius: float) -> OccupancyGrid:
    """Rasterize walls into a grid covering the layout bounds exactly."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if inflation_radius < 0:
        raise ValueError("inflation radius must be non-negative")
    pts, ny, nx, origin = _cell_centers(layout, resolution)
    if layout.walls:
        dists = _segment_distances(pts, layout.wall_array).min(axis=1)
        occupied = (dists <= inflation_radius).reshape(ny, nx)
    else:
        occupied = np.zeros((ny, nx), dtype=bool)
    return OccupancyGrid(resolution=resolution, origin=origin, occupied=occupied)


@lru_cache(maxsize=64)
def rasterize_cached(layout: Layout, resolution: float, inflation_radius: float) -> OccupancyGrid:
    return rasterize(layout, resolution, inflation_radius)


@lru_cache(maxsize=64)
def wall_distance_field(layout: Layout, resolution: float) -> np.ndarray:
    """Exact nearest-wall distance at every cell center, as an (ny, nx) array."""
    pts, ny, nx, _ = _cell_centers(layout, resolution)
    if not layout.walls:
        return np.full((ny, nx), np.inf)
    return _segment_distances(pts, layout.wall_array).min(axis=1).reshape(ny, nx)


# ---------------------------------------------------------------------------
# Episode sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PedTask:
    """One pedestrian's navigation task plus what re-tasking needs later."""

    start: Vec2
    goal: Vec2
    pair: tuple[SpawnZone, SpawnZone] | None  # None in the circle-crossing domain
    goal_end: int = 1  # index into `pair` of the zone the goal was drawn from


@dataclass(frozen=True)
class EpisodeSample:
    robot_start: Pose
    robot_goal: Vec2
    pedestrian_tasks: tuple[PedTask, ...]


def _point_in_zone(zone: SpawnZone, rng: np.random.Generator) -> Vec2:
    r = zone.radius * math.sqrt(rng.uniform())
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return Vec2(zone.center.x + r * math.cos(theta), zone.center.y + r * math.sin(theta))


def _clear_point(layout: Layout, zone: SpawnZone, clearance: float,
                 rng: np.random.Generator, taken: list[Vec2], min_sep: float) -> Vec2:
    for _ in range(MAX_SAMPLING_RETRIES):
        p = _point_in_zone(zone, rng)
        if layout.wall_clearance(p) < clearance:
            continue
        if any(p.distance_to(q) < min_sep for q in taken):
            continue
        return p
    raise SamplingExhausted(
        f"layout {layout.name}: could not place an agent in zone at {zone.center}")


def sample_episode(layout: Layout, pedestrians: int, rng_seed: int) -> EpisodeSample:
    """Draw robot start/goal and pedestrian tasks; deterministic per seed.

    Starts keep pairwise separation of 2x the pedestrian radius and wall
    clearance of one agent radius; robot start and goal come from distinct
    zones at least 2m apart.
    """
    if pedestrians < 0:
        raise ValueError("pedestrian count must be non-negative")
    rng = np.random.default_rng(rng_seed)
    min_sep = 2.0 * PEDESTRIAN_RADIUS

    start = goal = None
    for _ in range(MAX_SAMPLING_RETRIES):
        i, j = rng.choice(len(layout.robot_zones), size=2, replace=False)
        s = _point_in_zone(layout.robot_zones[i], rng)
        g = _point_in_zone(layout.robot_zones[j], rng)
        if layout.wall_clearance(s) < ROBOT_CLEARANCE:
            continue
        if layout.wall_clearance(g) < ROBOT_CLEARANCE:
            continue
        if s.distance_to(g) < MIN_START_GOAL_SEPARATION:
            continue
        start, goal = s, g
        break
    if start is None:
        raise SamplingExhausted(f"layout {layout.name}: no valid robot start/goal")

    if layout.circle_radius is not None:
        heading = math.atan2(goal.y - start.y, goal.x - start.x)
    else:
        heading = rng.uniform(-math.pi, math.pi)
    robot_start = Pose(start, heading)

    taken = [start]
    tasks: list[PedTask] = []
    if layout.circle_radius is not None:
        tasks = _sample_circle_tasks(layout, pedestrians, rng, taken)
    else:
        if pedestrians > 0 and not layout.ped_zone_pairs:
            raise SamplingExhausted(
                f"layout {layout.name}: has no pedestrian zone pairs")
        for _ in range(pedestrians):
            k = int(rng.integers(len(layout.ped_zone_pairs)))
            pair = layout.ped_zone_pairs[k]
            flip = bool(rng.integers(2))
            start_zone, goal_zone = (pair[1], pair[0]) if flip else (pair[0], pair[1])
            p = _clear_point(layout, start_zone, PEDESTRIAN_RADIUS, rng, taken, min_sep)
            q = _point_in_zone(goal_zone, rng)
            taken.append(p)
            tasks.append(PedTask(start=p, goal=q, pair=(start_zone, goal_zone), goal_end=1))

    return EpisodeSample(robot_start=robot_start, robot_goal=goal,
                         pedestrian_tasks=tuple(tasks))


def _sample_circle_tasks(layout: Layout, pedestrians: int,
                         rng: np.random.Generator, taken: list[Vec2]) -> list[PedTask]:
    """Circle-crossing tasks: start on the circle, goal at the antipode."""
    if pedestrians == 0:
        return []
    radius = layout.circle_radius
    assert radius is not None
    phase = rng.uniform(0.0, 2.0 * math.pi)
    tasks: list[PedTask] = []
    min_sep = 2.0 * PEDESTRIAN_RADIUS
    for k in range(pedestrians):
        base = phase + 2.0 * math.pi * k / pedestrians
        for _ in range(MAX_SAMPLING_RETRIES):
            theta = base + rng.uniform(-0.2, 0.2)
            p = Vec2(radius * math.cos(theta), radius * math.sin(theta))
            if any(p.distance_to(q) < min_sep for q in taken):
                continue
            taken.append(p)
            tasks.append(PedTask(start=p, goal=Vec2(-p.x, -p.y), pair=None))
            break
        else:
            raise SamplingExhausted(
                f"layout {layout.name}: circle too crowded for {pedestrians} pedestrians")
    return tasks
