import math
import random

import pytest
from pygame.math import Vector3

from sarquad.exceptions import InvalidArgumentError
from sarquad.sim.dynamics import QuadState
from sarquad.sim.perception import BBox, CameraModel, DETECTOR_PRESETS, DefaultBoxSet, \
    Detection, DetectorPreset, DetectorProfile, GroundTarget, confirms_target, \
    default_boxes, detector_preset, ground_footprint, iou, nms, post_process, \
    project_target, simulate_detector, throughput

CAMERA = CameraModel()

# The rates listed for the measured detectors
TABLE_FPS = {
    DetectorPreset.SSD: 3.003,
    DetectorPreset.HAAR: 1.0,
    DetectorPreset.HOG: 0.053,
}

@pytest.fixture(scope = "module")
def boxes():
    return DefaultBoxSet(CAMERA)

def _profile(recall_full = 1.0, recall_partial = 0.0, **kwargs):
    return DetectorProfile("test", 0.5, recall_full, recall_partial, 0.8, 0.05, **kwargs)

@pytest.mark.parametrize("preset", list(DetectorPreset))
def test_table_consistency(preset):
    profile = DETECTOR_PRESETS[preset]
    assert TABLE_FPS[preset] * profile.seconds_per_image == pytest.approx(1.0, rel = 2e-3)

def test_throughput():
    assert throughput(detector_preset("ssd")) == pytest.approx(3.003, abs = 1e-3)
    assert throughput(detector_preset("hog")) == pytest.approx(0.05297, abs = 1e-5)
    assert throughput(detector_preset("HAAR")) == 1.0

def test_unknown_preset():
    with pytest.raises(InvalidArgumentError):
        detector_preset("yolo")

@pytest.mark.parametrize("altitude", [0.5, 3.0, 10.0])
def test_ground_footprint(altitude):
    width, height = ground_footprint(CAMERA, altitude)
    assert width == pytest.approx(2.0 * altitude * math.tan(math.radians(30.0)), abs = 1e-9)
    assert height == pytest.approx(2.0 * altitude * math.tan(math.radians(24.0)), abs = 1e-9)

def test_ground_footprint_examples():
    assert ground_footprint(CAMERA, 10.0) == pytest.approx((11.547, 8.905), abs = 1e-3)
    assert ground_footprint(CAMERA, 0.001)[0] == pytest.approx(0.0012, abs = 1e-4)
    with pytest.raises(InvalidArgumentError):
        ground_footprint(CAMERA, 0.0)

def test_project_nadir():
    state = QuadState.at_rest(0.0, 0.0, 10.0)
    bbox, visibility = project_target(state, CAMERA, GroundTarget(1, 0.0, 0.0))

    assert (bbox.x_min + bbox.x_max) / 2.0 == pytest.approx(320.0)
    assert (bbox.y_min + bbox.y_max) / 2.0 == pytest.approx(240.0)
    assert visibility == 1.0

def test_project_north_is_up():
    state = QuadState.at_rest(0.0, 0.0, 10.0)
    bbox, _ = project_target(state, CAMERA, GroundTarget(1, 2.0, 2.0))

    # North-east of the vehicle facing north: upper right of the frame
    assert bbox.x_min > 320.0
    assert bbox.y_max < 240.0

def test_project_heading():
    state = QuadState.at_rest(0.0, 0.0, 10.0, yaw = math.pi / 2)
    bbox, _ = project_target(state, CAMERA, GroundTarget(1, 2.0, 0.0))

    # Facing east, a target to the east is straight ahead
    assert (bbox.x_min + bbox.x_max) / 2.0 == pytest.approx(320.0)
    assert bbox.y_max < 240.0

def test_project_outside():
    state = QuadState.at_rest(0.0, 0.0, 3.0)
    assert project_target(state, CAMERA, GroundTarget(1, 50.0, 0.0)) is None

def test_project_half_outside():
    state = QuadState.at_rest(0.0, 0.0, 10.0)
    edge = 10.0 * math.tan(math.radians(30.0))
    bbox, visibility = project_target(state, CAMERA, GroundTarget(1, edge, 0.0))

    assert visibility == pytest.approx(0.5, abs = 1e-9)
    assert bbox.x_max == 640.0

def test_project_ignores_partial_cap():
    state = QuadState.at_rest(0.0, 0.0, 3.0)
    target = GroundTarget(1, 0.0, 0.0, visibility_cap = 0.6)
    bbox, visibility = project_target(state, CAMERA, target)

    # Fully inside the frame, so the geometric visibility is exactly 1
    assert 0.0 < bbox.x_min and bbox.x_max < 640.0
    assert 0.0 < bbox.y_min and bbox.y_max < 480.0
    assert visibility == 1.0
    assert target.sighted_visibility(visibility) == 0.6
    assert target.sighted_visibility(0.3) == 0.3

@pytest.mark.parametrize("x, y, z", [
    (0.0, 0.0, 3.0), (1.2, -0.8, 3.0), (1.6, 0.0, 3.0), (0.0, 1.5, 2.0), (-2.5, 2.0, 4.0),
])
def test_project_full_visibility_iff_inside(x, y, z):
    state = QuadState.at_rest(0.0, 0.0, z)
    projection = project_target(state, CAMERA, GroundTarget(1, x, y, visibility_cap = 0.6))
    if projection is None:
        return
    bbox, visibility = projection

    inside = (bbox.x_min > 0.0 and bbox.y_min > 0.0 and
        bbox.x_max < CAMERA.width_px and bbox.y_max < CAMERA.height_px)
    assert (visibility == 1.0) == inside
    assert 0.0 < visibility <= 1.0

def test_project_tilt_shift():
    level = QuadState.at_rest(0.0, 0.0, 3.0)
    small = QuadState(position = Vector3(0.0, 0.0, 3.0), attitude = Vector3(0.05, 0.0, 0.0))
    large = QuadState(position = Vector3(0.0, 0.0, 3.0), attitude = Vector3(0.2, 0.0, 0.0))
    target = GroundTarget(1, 0.0, 0.0)

    assert project_target(small, CAMERA, target) == project_target(level, CAMERA, target)
    assert project_target(large, CAMERA, target)[0].x_min > \
        project_target(level, CAMERA, target)[0].x_min

def test_project_on_ground():
    with pytest.raises(InvalidArgumentError):
        project_target(QuadState.at_rest(), CAMERA, GroundTarget(1, 0.0, 0.0))

def test_iou_examples():
    a = BBox(0.0, 0.0, 2.0, 2.0)
    assert iou(a, BBox(1.0, 0.0, 3.0, 2.0)) == pytest.approx(1.0 / 3.0)
    assert iou(a, a) == 1.0
    assert iou(a, BBox(5.0, 5.0, 6.0, 6.0)) == 0.0
    # Touching edges do not overlap
    assert iou(a, BBox(2.0, 0.0, 4.0, 2.0)) == 0.0

def _random_box(rng, extent = 100.0):
    x1, y1 = rng.uniform(0.0, extent), rng.uniform(0.0, extent)
    return BBox(x1, y1, x1 + rng.uniform(1.0, 40.0), y1 + rng.uniform(1.0, 40.0))

def test_iou_properties():
    rng = random.Random(17)
    for _ in range(500):
        a, b = _random_box(rng), _random_box(rng)
        value = iou(a, b)
        assert 0.0 <= value <= 1.0
        assert value == iou(b, a)
        assert iou(a, a) == pytest.approx(1.0)

def test_invalid_bbox():
    with pytest.raises(InvalidArgumentError):
        BBox(1.0, 0.0, 1.0, 2.0)

def test_default_boxes_single():
    assert [b.as_tuple() for b in default_boxes([1], [1.0], [1.0])] == \
        [(0.0, 0.0, 640.0, 480.0)]

def test_default_boxes_grid():
    result = default_boxes([2], [0.5], [1.0])
    assert [b.as_tuple() for b in result] == [
        (0.0, 0.0, 320.0, 240.0),
        (320.0, 0.0, 640.0, 240.0),
        (0.0, 240.0, 320.0, 480.0),
        (320.0, 240.0, 640.0, 480.0),
    ]

def test_default_boxes_count():
    assert len(default_boxes([4, 2], [0.2, 0.5], [1.0, 2.0])) == 40
    assert len(DefaultBoxSet(CAMERA)) == 11830

def test_default_boxes_errors():
    with pytest.raises(InvalidArgumentError):
        default_boxes([], [], [1.0])
    with pytest.raises(InvalidArgumentError):
        default_boxes([2], [0.5], [])
    with pytest.raises(InvalidArgumentError):
        default_boxes([4, 2], [0.5], [1.0])

def test_best_match_tie_goes_to_lowest_index():
    boxes = DefaultBoxSet(CAMERA, (1, 1), (0.5, 0.5), (1.0,))
    assert boxes.best_match(BBox(160.0, 120.0, 480.0, 360.0)) == 0

def test_default_boxes_fit_a_person(boxes):
    # A 0.6 m x 1.2 m person seen from the search altitude
    state = QuadState.at_rest(0.0, 0.0, 3.0)
    for x, y in ((0.0, 0.0), (0.7, -0.4), (-1.1, 0.6), (1.3, 0.2)):
        truth, _ = project_target(state, CAMERA, GroundTarget(1, x, y))
        assert iou(boxes.bbox(boxes.best_match(truth)), truth) >= 0.5

def _sighting(state = QuadState.at_rest(0.0, 0.0, 3.0), target = GroundTarget(1, 0.2, 0.3)):
    bbox, visibility = project_target(state, CAMERA, target)
    return bbox, visibility, target.id

def test_simulate_detector_certain_hit(boxes):
    truth = _sighting()
    detections = simulate_detector([truth], _profile(), boxes, 7, 1)

    assert len(detections) == 1
    detection = detections[0]
    assert detection.target_id == 1
    assert detection.bbox == boxes.bbox(boxes.best_match(truth[0]))
    assert 0.0 <= detection.confidence <= 1.0
    assert detection.visibility == truth[1]

def test_simulate_detector_zero_partial_recall(boxes):
    bbox, _, target_id = _sighting()
    for frame in range(200):
        assert simulate_detector([(bbox, 0.4, target_id)], _profile(recall_partial = 0.0),
            boxes, frame, 3) == []

def test_common_random_numbers(boxes):
    truth = _sighting()
    a = _profile(0.5, 0.5)
    b = DetectorProfile("other", 18.0, 0.5, 0.5, 0.6, 0.2)

    pattern_a = [bool(simulate_detector([truth], a, boxes, f, 5)) for f in range(100)]
    pattern_b = [bool(simulate_detector([truth], b, boxes, f, 5)) for f in range(100)]
    assert pattern_a == pattern_b
    assert any(pattern_a) and not all(pattern_a)

def test_higher_recall_never_loses_hits(boxes):
    truth = _sighting()
    low, high = _profile(0.3), _profile(0.7)
    for frame in range(100):
        if simulate_detector([truth], low, boxes, frame, 8):
            assert simulate_detector([truth], high, boxes, frame, 8)

def test_false_positives(boxes):
    profile = _profile(false_positive_rate = 2.0)
    counts = [len(simulate_detector([], profile, boxes, frame, 2)) for frame in range(100)]

    assert sum(counts) > 100
    assert counts == [len(simulate_detector([], profile, boxes, frame, 2))
        for frame in range(100)]

def _det(box, confidence):
    return Detection(BBox(*box), confidence)

def test_nms_example():
    a = _det((0, 0, 10, 10), 0.9)
    b = _det((1, 1, 11, 11), 0.8)
    c = _det((20, 20, 30, 30), 0.7)

    assert iou(a.bbox, b.bbox) == pytest.approx(81.0 / 119.0)
    assert nms([b, c, a], 0.5) == [a, c]

def test_nms_single_and_empty():
    a = _det((0, 0, 1, 1), 0.3)
    assert nms([a], 0.5) == [a]
    assert nms([], 0.5) == []

def test_nms_tie_keeps_lower_index():
    first = Detection(BBox(0.0, 0.0, 5.0, 5.0), 0.6, target_id = 1)
    second = Detection(BBox(0.0, 0.0, 5.0, 5.0), 0.6, target_id = 2)
    assert nms([first, second], 0.5) == [first]

def _greedy_nms(detections, threshold):
    remaining = list(range(len(detections)))
    kept = []
    while remaining:
        best = max(remaining, key = lambda i: (detections[i].confidence, -i))
        kept.append(best)
        remaining = [i for i in remaining if i != best and
            iou(detections[best].bbox, detections[i].bbox) <= threshold]
    return [detections[i] for i in kept]

def test_nms_matches_greedy_reference():
    rng = random.Random(2024)
    for _ in range(1000):
        detections = [Detection(_random_box(rng, 60.0), round(rng.random(), 1))
            for _ in range(rng.randint(1, 20))]
        threshold = rng.choice((0.3, 0.45, 0.5, 0.7))
        assert nms(detections, threshold) == _greedy_nms(detections, threshold)

def test_post_process_floor():
    low = _det((0, 0, 10, 10), 0.49)
    high = _det((50, 50, 60, 60), 0.5)
    assert post_process([low, high]) == [high]

def test_confirms_target():
    truth = BBox(0.0, 0.0, 10.0, 10.0)
    hit = Detection(BBox(0.0, 0.0, 10.0, 9.0), 0.8, target_id = 4)

    assert confirms_target(hit, 4, truth)
    assert not confirms_target(hit, 5, truth)
    assert not confirms_target(Detection(BBox(0.0, 0.0, 10.0, 3.0), 0.8, 4), 4, truth)
    assert not confirms_target(Detection(truth, 0.3, 4), 4, truth)
