"""Street geometry, user kinematics and the shadow an obstacle casts on the lane."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .perception import CameraModel

MPH_TO_MPS = 0.44704

OBSTACLE_LABELS = ("bus", "truck", "other")


def mph_to_mps(v: float) -> float:
    if v < 0:
        raise ValueError("speed must be non-negative")
    return v * MPH_TO_MPS


@dataclass(frozen=True)
class SbsSite:
    id: int
    pos: tuple  # (x, y, z) metres
    camera: CameraModel = field(default_factory=CameraModel)

    def __post_init__(self):
        if len(self.pos) != 3:
            raise ValueError("SBS position must be (x, y, z)")
        if self.pos[2] <= 0:
            raise ValueError(f"SBS {self.id}: antenna height must be positive")


@dataclass(frozen=True)
class Obstacle:
    class_label: str
    footprint: tuple  # (x_min, x_max, y_min, y_max)
    height_m: float

    def __post_init__(self):
        if self.class_label not in OBSTACLE_LABELS:
            raise ValueError(f"unknown obstacle class {self.class_label!r}")
        x0, x1, y0, y1 = self.footprint
        if not (x0 < x1 and y0 < y1):
            raise ValueError("obstacle footprint must have x_min < x_max and y_min < y_max")
        if self.height_m <= 0:
            raise ValueError("obstacle height must be positive")

    @property
    def center(self) -> tuple:
        x0, x1, y0, y1 = self.footprint
        return (0.5 * (x0 + x1), 0.5 * (y0 + y1))


@dataclass(frozen=True)
class Trajectory:
    y_lane: float = 9.0
    x_start: float = 0.0
    direction: int = 1
    speed_mps: float = 30 * MPH_TO_MPS

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if self.speed_mps <= 0:
            raise ValueError("speed must be positive")


@dataclass(frozen=True)
class ShadowInterval:
    sbs_id: int
    x_enter: float
    x_exit: float

    def __post_init__(self):
        if not self.x_enter < self.x_exit:
            raise ValueError("shadow interval must satisfy x_enter < x_exit")

    def contains(self, x):
        return (x >= self.x_enter) & (x <= self.x_exit)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.x_enter + self.x_exit)


@dataclass(frozen=True)
class Scene:
    sbs_list: tuple
    trajectory: Trajectory
    obstacle: Optional[Obstacle] = None
    street_length_m: float = 90.0
    street_width_m: float = 15.0
    # replaces the lane entry point of every non-empty geometric shadow
    blocked_region_start_x: Optional[float] = None

    def __post_init__(self):
        L, W = self.street_length_m, self.street_width_m
        if L <= 0 or W <= 0:
            raise ValueError("street dimensions must be positive")
        ids = [s.id for s in self.sbs_list]
        if len(set(ids)) != len(ids):
            raise ValueError("SBS ids must be unique")
        for s in self.sbs_list:
            if not (0 <= s.pos[0] <= L and 0 <= s.pos[1] <= W):
                raise ValueError(f"SBS {s.id} lies outside the street")
        if self.obstacle is not None:
            x0, x1, y0, y1 = self.obstacle.footprint
            if not (0 <= x0 and x1 <= L and 0 <= y0 and y1 <= W):
                raise ValueError("obstacle footprint lies outside the street")
        if not 0 <= self.trajectory.y_lane <= W:
            raise ValueError("lane lies outside the street")
        if not 0 <= self.trajectory.x_start <= L:
            raise ValueError("trajectory starts outside the street")

    def sbs(self, sbs_id: int) -> SbsSite:
        for s in self.sbs_list:
            if s.id == sbs_id:
                return s
        raise KeyError(f"no SBS with id {sbs_id}")

    @property
    def sbs_ids(self) -> list:
        return sorted(s.id for s in self.sbs_list)


class Position(NamedTuple):
    x: float
    y: float
    at_end: bool = False


def position_at(traj: Trajectory, t: float, street_length: Optional[float] = None) -> Position:
    """Constant-velocity position at time ``t``, clamped to [0, street_length] if given."""
    if t < 0:
        raise ValueError("time must be non-negative")
    x = traj.x_start + traj.direction * traj.speed_mps * t
    at_end = False
    if street_length is not None:
        if x >= street_length:
            x, at_end = float(street_length), True
        elif x <= 0:
            x, at_end = 0.0, True
    return Position(x, traj.y_lane, at_end)


def positions_at(traj: Trajectory, t: np.ndarray, street_length: Optional[float] = None) -> np.ndarray:
    x = traj.x_start + traj.direction * traj.speed_mps * np.asarray(t, dtype=float)
    if street_length is not None:
        x = np.clip(x, 0.0, street_length)
    return x


def exit_time(scene: Scene) -> float:
    """Time at which the user leaves the street."""
    tr = scene.trajectory
    remaining = scene.street_length_m - tr.x_start if tr.direction > 0 else tr.x_start
    return remaining / tr.speed_mps


def segment_hits_rect(p, q, rect) -> bool:
    """Liang-Barsky test: does the closed segment p->q touch the closed rectangle?"""
    x0, x1, y0, y1 = rect
    dx, dy = q[0] - p[0], q[1] - p[1]
    t_lo, t_hi = 0.0, 1.0
    for denom, num in ((-dx, p[0] - x0), (dx, x1 - p[0]), (-dy, p[1] - y0), (dy, y1 - p[1])):
        if abs(denom) < 1e-300:  # parallel to this slab (and avoids overflow on subnormals)
            if num < 0:
                return False
            continue
        t = num / denom
        if denom < 0:
            t_lo = max(t_lo, t)
        else:
            t_hi = min(t_hi, t)
        if t_lo > t_hi:
            return False
    return True


def _geometric_shadow(sbs_xy, rect, y_lane, x_lo, x_hi):
    sx, sy = sbs_xy
    x0, x1, y0, y1 = rect
    # the hit/miss status can only change where the segment grazes a corner
    # or where its lane endpoint crosses a rectangle edge
    cands = {x_lo, x_hi, sx, x0, x1}
    for cx in (x0, x1):
        for cy in (y0, y1):
            if cy != sy:
                cands.add(sx + (cx - sx) * (y_lane - sy) / (cy - sy))
    xs = sorted(c for c in cands if x_lo <= c <= x_hi)
    runs = []
    for a, b in zip(xs[:-1], xs[1:]):
        if b - a <= 0:
            continue
        if segment_hits_rect((sx, sy), (0.5 * (a + b), y_lane), rect):
            if runs and runs[-1][1] == a:
                runs[-1][1] = b
            else:
                runs.append([a, b])
    if not runs:
        return None
    return runs[0][0], runs[-1][1]


def shadow_interval(scene: Scene, sbs_id: int) -> Optional[ShadowInterval]:
    """Stretch of the user lane where the obstacle blocks ground-plane LoS to ``sbs_id``.

    Heights are ignored. Returns None when there is no obstacle or no overlap.
    """
    site = scene.sbs(sbs_id)
    if scene.obstacle is None:
        return None
    span = _geometric_shadow(site.pos[:2], scene.obstacle.footprint, scene.trajectory.y_lane,
                             0.0, scene.street_length_m)
    if span is None:
        return None
    x_enter, x_exit = span
    override = scene.blocked_region_start_x
    if override is not None:
        if scene.trajectory.direction > 0:
            x_enter = override
        else:
            x_exit = override
        if not x_enter < x_exit:
            return None
    return ShadowInterval(sbs_id, float(x_enter), float(x_exit))


def shadows(scene: Scene) -> dict:
    return {i: shadow_interval(scene, i) for i in scene.sbs_ids}


def entry_point(shadow: ShadowInterval, direction: int) -> float:
    return shadow.x_enter if direction > 0 else shadow.x_exit
