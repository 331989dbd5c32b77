"""Camera front end: detector emulation, pixel/metre conversion, speed tracking.

Cameras are modelled as flat top-down views of a street segment: image column
0 sits at ``segment_start_x`` and the full image width spans
``coverage_width_m`` metres. Rows map to the cross-street coordinate with the
same scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

DETECTION_CLASSES = ("car", "bus", "truck", "person")
OBSTACLE_CLASSES = ("bus", "truck")


class InvalidIntervalError(ValueError):
    pass


class AssociationError(ValueError):
    pass


@dataclass(frozen=True)
class CameraModel:
    image_width_px: int = 640
    image_height_px: int = 480
    fov_deg: float = 100.0
    coverage_width_m: float = 30.0
    segment_start_x: float = 0.0

    def __post_init__(self):
        if self.image_width_px <= 0 or self.image_height_px <= 0:
            raise ValueError("image dimensions must be positive")
        if self.coverage_width_m <= 0:
            raise ValueError("coverage_width_m must be positive")

    @property
    def px_per_m(self) -> float:
        return self.image_width_px / self.coverage_width_m

    @property
    def segment_end_x(self) -> float:
        return self.segment_start_x + self.coverage_width_m

    def covers(self, x: float) -> bool:
        return self.segment_start_x <= x <= self.segment_end_x


@dataclass(frozen=True)
class SceneObject:
    """Something a camera can see: centre position and footprint size in metres."""

    label: str
    x_m: float
    y_m: float
    size_x_m: float
    size_y_m: float


@dataclass(frozen=True)
class Detection:
    class_label: str
    bbox: tuple  # (x1, y1, x2, y2) pixels, upper-left / lower-right
    confidence: float = 1.0

    @property
    def center(self) -> tuple:
        x1, y1, x2, y2 = self.bbox
        return (0.5 * (x1 + x2), 0.5 * (y1 + y2))


@dataclass
class Frame:
    camera_id: int
    seq_no: int
    timestamp: float
    detections: list = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "camera_id": self.camera_id,
            "seq": self.seq_no,
            "t": round(self.timestamp, 9),
            "detections": [
                {"class": d.class_label, "bbox": list(d.bbox), "confidence": d.confidence}
                for d in self.detections
            ],
        }


@dataclass(frozen=True)
class Track:
    object_id: int
    class_label: str
    last_center_px: tuple
    last_pos_m: tuple
    speed_mps: float
    last_update: float
    heading: int = 0  # +1 / -1 along the street x axis, 0 while unknown


def project(camera: CameraModel, obj: SceneObject, noise_px: float = 0.0,
            rng: Optional[np.random.Generator] = None) -> Optional[Detection]:
    """Emulated detector output for ``obj`` seen by ``camera``.

    Returns None when the object centre lies outside the camera segment.
    Corners are perturbed by zero-mean Gaussian noise of ``noise_px`` (if any),
    rounded to integer pixels and clipped to the image.
    """
    if obj.label not in DETECTION_CLASSES:
        return None
    if not camera.covers(obj.x_m):
        return None
    s = camera.px_per_m
    cx = (obj.x_m - camera.segment_start_x) * s
    cy = obj.y_m * s
    half_w = 0.5 * obj.size_x_m * s
    half_h = 0.5 * obj.size_y_m * s
    corners = np.array([cx - half_w, cy - half_h, cx + half_w, cy + half_h])
    if noise_px > 0:
        if rng is None:
            raise ValueError("noise requires an rng")
        corners = corners + rng.normal(0.0, noise_px, size=4)
    # np.rint rounds half to even; floor(v + 0.5) keeps the rounding direction stable
    q = np.floor(corners + 0.5)
    q[[0, 2]] = np.clip(q[[0, 2]], 0, camera.image_width_px)
    q[[1, 3]] = np.clip(q[[1, 3]], 0, camera.image_height_px)
    x1, y1, x2, y2 = (int(v) for v in q)
    if x2 <= x1 or y2 <= y1:
        return None
    return Detection(obj.label, (x1, y1, x2, y2), 1.0)


def displacement_m(camera: CameraModel, delta_px: float) -> float:
    """Travelled distance for a pixel displacement: (W_m / W_p) * delta."""
    if delta_px < 0:
        raise ValueError("pixel displacement must be non-negative")
    return camera.coverage_width_m / camera.image_width_px * delta_px


def estimate_speed(distance_m: float, dt: float) -> float:
    if dt <= 0:
        raise InvalidIntervalError(f"time interval must be positive, got {dt}")
    return distance_m / dt


def pixel_to_world(camera: CameraModel, center_px: tuple) -> tuple:
    col, row = center_px
    x = camera.segment_start_x + displacement_m(camera, col)
    y = displacement_m(camera, row)
    return (x, y)


def start_track(object_id: int, detection: Detection, camera: CameraModel, timestamp: float) -> Track:
    center = detection.center
    return Track(object_id, detection.class_label, center, pixel_to_world(camera, center),
                 0.0, timestamp, 0)


def update_track(track: Track, detection: Detection, camera: CameraModel, timestamp: float) -> Track:
    """Advance ``track`` with a new detection.

    Speed comes from the metric displacement between the previous and the new
    box centre over the elapsed time; no smoothing.
    """
    if detection.class_label != track.class_label:
        raise AssociationError(
            f"cannot associate {detection.class_label!r} detection with {track.class_label!r} track")
    if timestamp <= track.last_update:
        raise InvalidIntervalError("detections must arrive in time order")
    center = detection.center
    pos = pixel_to_world(camera, center)
    dx = pos[0] - track.last_pos_m[0]
    speed = estimate_speed(abs(dx), timestamp - track.last_update)
    heading = track.heading if dx == 0 else (1 if dx > 0 else -1)
    return replace(track, last_center_px=center, last_pos_m=pos, speed_mps=speed,
                   last_update=timestamp, heading=heading)
