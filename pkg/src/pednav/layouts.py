"""Parametric built-in layouts.

Every layout is a 20m x 20m box whose interior walls realize one canonical
indoor geometry (corridor, door exit, two-door room, obstacle field,
intersection, crosswalk) or a composition of several. Corridors are 2m wide,
doors 1m, obstacle blocks 1m x 1m. The exact coordinates are placeholders in
the sense that only the roles are fixed; everything can be recalibrated by
exporting a layout file, editing it, and loading it back.
"""

from __future__ import annotations

from functools import lru_cache

from .geometry import Segment, Vec2
from .world import Layout, SpawnZone

CORRIDOR_HALF = 1.0     # corridor width 2.0m
DOOR_HALF = 0.5         # door width 1.0m
BLOCK_HALF = 0.5        # obstacle blocks 1m x 1m
WORLD = 20.0
EDGE = WORLD / 2.0


def _seg(ax: float, ay: float, bx: float, by: float) -> Segment:
    return Segment(Vec2(ax, ay), Vec2(bx, by))


def _zone(cx: float, cy: float, r: float) -> SpawnZone:
    return SpawnZone(Vec2(cx, cy), r)


def _boundary() -> list[Segment]:
    e = EDGE
    return [
        _seg(-e, -e, e, -e),
        _seg(e, -e, e, e),
        _seg(e, e, -e, e),
        _seg(-e, e, -e, -e),
    ]


def _block(cx: float, cy: float, half: float = BLOCK_HALF) -> list[Segment]:
    return [
        _seg(cx - half, cy - half, cx + half, cy - half),
        _seg(cx + half, cy - half, cx + half, cy + half),
        _seg(cx + half, cy + half, cx - half, cy + half),
        _seg(cx - half, cy + half, cx - half, cy - half),
    ]


def _corridor_walls_x(y_half: float = CORRIDOR_HALF) -> list[Segment]:
    """Full-width horizontal corridor centered on the x axis."""
    return [_seg(-EDGE, y_half, EDGE, y_half), _seg(-EDGE, -y_half, EDGE, -y_half)]


def _crossing_corridor_walls() -> list[Segment]:
    """Two perpendicular 2m corridors crossing at the origin."""
    h = CORRIDOR_HALF
    e = EDGE
    return [
        # horizontal corridor, interrupted by the vertical one
        _seg(-e, h, -h, h), _seg(h, h, e, h),
        _seg(-e, -h, -h, -h), _seg(h, -h, e, -h),
        # vertical corridor, interrupted by the horizontal one
        _seg(-h, h, -h, e), _seg(-h, -h, -h, -e),
        _seg(h, h, h, e), _seg(h, -h, h, -e),
    ]


def _door_wall_x(x: float, y_lo: float, y_hi: float, door_y: float = 0.0) -> list[Segment]:
    """Vertical wall at `x` spanning [y_lo, y_hi] with a 1m door at door_y."""
    return [
        _seg(x, y_lo, x, door_y - DOOR_HALF),
        _seg(x, door_y + DOOR_HALF, x, y_hi),
    ]


def _walls_a() -> Layout:
    """Straight corridor end to end."""
    ends = [_zone(-8.5, 0.0, 0.8), _zone(8.5, 0.0, 0.8)]
    return Layout(
        name="WALLS-A", width=WORLD, height=WORLD,
        walls=tuple(_boundary() + _corridor_walls_x()),
        robot_zones=tuple(ends),
        ped_zone_pairs=((ends[0], ends[1]),),
        default_pedestrians=4,
    )


def _walls_b() -> Layout:
    """Single door exit: a full dividing wall with one 1m door."""
    left = _zone(-5.0, 0.0, 1.2)
    right = _zone(5.0, 0.0, 1.2)
    upper_left = _zone(-5.0, 3.0, 1.0)
    lower_right = _zone(5.0, -3.0, 1.0)
    return Layout(
        name="WALLS-B", width=WORLD, height=WORLD,
        walls=tuple(_boundary() + _door_wall_x(0.0, -EDGE, EDGE)),
        robot_zones=(left, right),
        ped_zone_pairs=((left, right), (upper_left, lower_right)),
        default_pedestrians=4,
    )


def _walls_c() -> Layout:
    """Central room with doors on its left and right walls."""
    r = 3.0
    walls = _boundary()
    walls += _door_wall_x(-r, -r, r)            # left wall with door
    walls += _door_wall_x(r, -r, r)             # right wall with door
    walls += [_seg(-r, r, r, r), _seg(-r, -r, r, -r)]  # top and bottom
    left = _zone(-6.5, 0.0, 1.0)
    right = _zone(6.5, 0.0, 1.0)
    inside = _zone(0.0, 0.0, 1.2)
    return Layout(
        name="WALLS-C", width=WORLD, height=WORLD,
        walls=tuple(walls),
        robot_zones=(left, right),
        ped_zone_pairs=((left, right), (inside, right)),
        default_pedestrians=4,
    )


def _walls_d() -> Layout:
    """Open space scattered with five 1m blocks."""
    walls = _boundary()
    for cx, cy in [(-3.0, -3.0), (3.0, -3.0), (0.0, 0.0), (-3.0, 3.0), (3.0, 3.0)]:
        walls += _block(cx, cy)
    sw = _zone(-7.5, -7.5, 1.2)
    ne = _zone(7.5, 7.5, 1.2)
    nw = _zone(-7.5, 7.5, 1.2)
    se = _zone(7.5, -7.5, 1.2)
    return Layout(
        name="WALLS-D", width=WORLD, height=WORLD,
        walls=tuple(walls),
        robot_zones=(sw, ne, nw, se),
        ped_zone_pairs=((sw, ne), (nw, se), (_zone(0.0, -7.5, 1.2), _zone(0.0, 7.5, 1.2))),
        default_pedestrians=4,
    )


def _walls_e() -> Layout:
    """Four-way intersection of two corridors; traffic may turn any way."""
    west = _zone(-8.5, 0.0, 0.8)
    east = _zone(8.5, 0.0, 0.8)
    north = _zone(0.0, 8.5, 0.8)
    south = _zone(0.0, -8.5, 0.8)
    return Layout(
        name="WALLS-E", width=WORLD, height=WORLD,
        walls=tuple(_boundary() + _crossing_corridor_walls()),
        robot_zones=(west, east, north, south),
        ped_zone_pairs=((west, east), (north, south), (west, north), (east, south)),
        default_pedestrians=4,
    )


def _walls_f() -> Layout:
    """Crosswalk: the robot's corridor is crossed by a perpendicular
    pedestrian passage."""
    west = _zone(-8.5, 0.0, 0.8)
    east = _zone(8.5, 0.0, 0.8)
    north = _zone(0.0, 8.5, 0.8)
    south = _zone(0.0, -8.5, 0.8)
    return Layout(
        name="WALLS-F", width=WORLD, height=WORLD,
        walls=tuple(_boundary() + _crossing_corridor_walls()),
        robot_zones=(west, east),
        ped_zone_pairs=((north, south),),
        default_pedestrians=4,
    )


def _walls_g() -> Layout:
    """Corridor with a doored partition halfway (corridor + door composition)."""
    walls = _boundary() + _corridor_walls_x()
    walls += _door_wall_x(0.0, -CORRIDOR_HALF, CORRIDOR_HALF)
    west = _zone(-8.5, 0.0, 0.8)
    east = _zone(8.5, 0.0, 0.8)
    return Layout(
        name="WALLS-G", width=WORLD, height=WORLD,
        walls=tuple(walls),
        robot_zones=(west, east),
        ped_zone_pairs=((west, east),),
        default_pedestrians=3,
    )


def _walls_h() -> Layout:
    """Densest composition: intersection + doored arm + a side room with blocks."""
    walls = _boundary() + _crossing_corridor_walls()
    # door across the west arm
    walls += _door_wall_x(-5.0, -CORRIDOR_HALF, CORRIDOR_HALF)
    # north-east room entered through a door in the corridor's upper wall
    walls = [w for w in walls
             if not (w.a.y == w.b.y == CORRIDOR_HALF and min(w.a.x, w.b.x) >= CORRIDOR_HALF)]
    walls += [_seg(CORRIDOR_HALF, CORRIDOR_HALF, 4.5, CORRIDOR_HALF),
              _seg(5.5, CORRIDOR_HALF, EDGE, CORRIDOR_HALF)]
    walls += _block(4.0, 4.5) + _block(7.0, 6.0) + _block(4.5, 8.0)
    west = _zone(-8.5, 0.0, 0.8)
    east = _zone(8.5, 0.0, 0.8)
    north = _zone(0.0, 8.5, 0.8)
    south = _zone(0.0, -8.5, 0.8)
    room = _zone(8.0, 8.5, 0.9)
    return Layout(
        name="WALLS-H", width=WORLD, height=WORLD,
        walls=tuple(walls),
        robot_zones=(west, east, north, room),
        ped_zone_pairs=((west, east), (north, south), (room, south)),
        default_pedestrians=6,
    )


def _walls_i() -> Layout:
    """Corridor + crosswalk + door composition along the robot's route."""
    h = CORRIDOR_HALF
    e = EDGE
    walls = _boundary()
    # horizontal corridor interrupted by the crossing passage
    walls += [_seg(-e, h, -h, h), _seg(h, h, e, h),
              _seg(-e, -h, -h, -h), _seg(h, -h, e, -h)]
    # vertical crossing passage
    walls += [_seg(-h, h, -h, e), _seg(-h, -h, -h, -e),
              _seg(h, h, h, e), _seg(h, -h, h, -e)]
    # doored partition further down the corridor
    walls += _door_wall_x(5.0, -h, h)
    west = _zone(-8.5, 0.0, 0.8)
    east = _zone(8.5, 0.0, 0.8)
    north = _zone(0.0, 8.5, 0.8)
    south = _zone(0.0, -8.5, 0.8)
    return Layout(
        name="WALLS-I", width=WORLD, height=WORLD,
        walls=tuple(walls),
        robot_zones=(west, east),
        ped_zone_pairs=((north, south), (west, east)),
        default_pedestrians=4,
    )


def _circle() -> Layout:
    """Open world for the circle-crossing domain (4m crossing circle)."""
    return Layout(
        name="CIRCLE", width=WORLD, height=WORLD,
        walls=tuple(_boundary()),
        robot_zones=(_zone(0.0, -4.0, 0.4), _zone(0.0, 4.0, 0.4)),
        ped_zone_pairs=(),
        default_pedestrians=5,
        circle_radius=4.0,
    )


@lru_cache(maxsize=1)
def builtin_layouts() -> tuple[Layout, ...]:
    """All built-in layouts, in canonical order."""
    return (
        _walls_a(), _walls_b(), _walls_c(), _walls_d(), _walls_e(),
        _walls_f(), _walls_g(), _walls_h(), _walls_i(), _circle(),
    )


def layout_by_name(name: str) -> Layout:
    for layout in builtin_layouts():
        if layout.name == name:
            return layout
    known = ", ".join(l.name for l in builtin_layouts())
    raise KeyError(f"unknown layout {name!r} (built-ins: {known})")
