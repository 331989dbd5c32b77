import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phosim.perception import (AssociationError, CameraModel, Detection, Frame, InvalidIntervalError,
                               SceneObject, displacement_m, estimate_speed, pixel_to_world, project,
                               start_track, update_track)

CAM = CameraModel(segment_start_x=30.0)


def test_pixel_scale():
    assert CAM.px_per_m == pytest.approx(640 / 30)
    # roughly one metre per 21 pixels: 21 * 30/640
    assert displacement_m(CAM, 21) == pytest.approx(0.984375)
    assert 0.98 <= displacement_m(CAM, 21) <= 0.99
    assert displacement_m(CAM, 0) == 0.0
    with pytest.raises(ValueError):
        displacement_m(CAM, -1)


def test_speed_examples():
    assert estimate_speed(1.0, 0.5) == 2.0
    # 11 px between frames 1/26 s apart
    assert estimate_speed(displacement_m(CAM, 11), 1 / 26) == pytest.approx(13.40625)
    for dt in (0.0, -0.1):
        with pytest.raises(InvalidIntervalError):
            estimate_speed(1.0, dt)


def test_project_hand_example():
    # centre (46.39 - 30) * 21.333 = 349.65, half width 48 px -> corners 301.65 / 397.65
    d = project(CAM, SceneObject("car", 46.39, 9.0, 4.5, 1.8))
    assert d.bbox == (302, 173, 398, 211)
    assert d.center == (350.0, 192.0)
    assert pixel_to_world(CAM, d.center) == pytest.approx((46.40625, 9.0))


def test_project_rejects():
    assert project(CAM, SceneObject("car", 29.9, 9.0, 4.5, 1.8)) is None
    assert project(CAM, SceneObject("car", 60.1, 9.0, 4.5, 1.8)) is None
    assert project(CAM, SceneObject("tree", 45.0, 9.0, 1.0, 1.0)) is None
    with pytest.raises(ValueError):
        project(CAM, SceneObject("car", 45.0, 9.0, 4.5, 1.8), noise_px=1.0)


def test_project_clips_to_image():
    d = project(CAM, SceneObject("bus", 59.0, 6.0, 12.0, 2.5))
    assert d.bbox[2] == 640
    assert d.bbox[0] == int(np.floor((59.0 - 6.0 - 30.0) * CAM.px_per_m + 0.5))


def test_noise_is_seeded():
    obj = SceneObject("car", 45.0, 9.0, 4.5, 1.8)
    a = project(CAM, obj, 2.0, np.random.default_rng(5))
    b = project(CAM, obj, 2.0, np.random.default_rng(5))
    assert a == b
    assert a != project(CAM, obj)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(33.0, 57.0), y=st.floats(2.0, 13.0))
def test_round_trip_within_half_pixel(x, y):
    d = project(CAM, SceneObject("car", x, y, 4.5, 1.8))
    wx, wy = pixel_to_world(CAM, d.center)
    half_px = 0.5 / CAM.px_per_m
    assert abs(wx - x) <= half_px + 1e-12
    assert abs(wy - y) <= half_px + 1e-12


def _det(col, label="car"):
    return Detection(label, (col - 48, 170, col + 48, 210))


def test_track_updates():
    tr = start_track(7, _det(300), CAM, 0.0)
    assert tr.speed_mps == 0.0 and tr.heading == 0
    tr = update_track(tr, _det(311), CAM, 1 / 26)
    assert tr.speed_mps == pytest.approx(13.40625)
    assert tr.heading == 1
    tr = update_track(tr, _det(300), CAM, 2 / 26)
    assert tr.heading == -1
    tr = update_track(tr, _det(300), CAM, 3 / 26)
    assert tr.heading == -1 and tr.speed_mps == 0.0


def test_track_errors():
    tr = start_track(1, _det(300), CAM, 1.0)
    with pytest.raises(AssociationError):
        update_track(tr, _det(310, "bus"), CAM, 2.0)
    with pytest.raises(InvalidIntervalError):
        update_track(tr, _det(310), CAM, 1.0)


def test_frame_record():
    f = Frame(2, 5, 5 / 26, [_det(300)])
    rec = f.to_record()
    assert rec["camera_id"] == 2 and rec["seq"] == 5
    assert rec["detections"][0]["bbox"] == [252, 170, 348, 210]
