"""
The downward camera and the detection post-processing

The detector network itself is not simulated. A `DetectorProfile` decides
from the visibility of each target whether it is found, and the hit is then
snapped to the best multi-scale default box, scored, merged with false
positives, floored and suppressed like the output of a single-shot detector.
"""

from dataclasses import dataclass
from functools import lru_cache
import math
from typing import List, Optional

import numpy as np

from ..exceptions import InvalidArgumentError, require
from ..rng import CounterStream, Purpose, Subsystem
from ..utils.enum import StringEnum, auto
from .dynamics import QuadState

# Roll and pitch below this are ignored by the projection
TILT_IGNORE_LIMIT = 0.1

CONFIDENCE_FLOOR = 0.5
NMS_IOU_THRESHOLD = 0.45
MATCH_IOU_THRESHOLD = 0.5

PARTIAL_VISIBILITY_CAP = 0.6

DEFAULT_GRID_SIZES = (40, 24, 12, 6, 3, 1)
DEFAULT_SCALES = (0.06, 0.15, 0.3, 0.5, 0.7, 0.9)
DEFAULT_ASPECT_RATIOS = (1.0, 2.0, 0.5, 3.0, 1.0 / 3.0)

@dataclass(frozen = True)
class CameraModel:
    """
    The nadir-pointing camera

    @var hfov, vfov The full fields of view in rad
    """
    width_px: int = 640
    height_px: int = 480
    frame_rate_hz: float = 30.0
    hfov: float = math.radians(60.0)
    vfov: float = math.radians(48.0)

    def __post_init__(self):
        require(self.width_px > 0 and self.height_px > 0, "width_px",
            "pixel dimensions must be strictly positive")
        require(self.frame_rate_hz > 0, "frame_rate_hz", "must be strictly positive")
        require(0 < self.hfov < math.pi, "hfov", "must be in (0, pi)")
        require(0 < self.vfov < math.pi, "vfov", "must be in (0, pi)")

    @property
    def fx(self) -> float:
        return (self.width_px / 2.0) / math.tan(self.hfov / 2.0)

    @property
    def fy(self) -> float:
        return (self.height_px / 2.0) / math.tan(self.vfov / 2.0)

@dataclass(frozen = True)
class BBox:
    """
    An axis-aligned box in continuous pixel coordinates
    """
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        require(self.x_min < self.x_max and self.y_min < self.y_max, "bbox",
            "must have x_min < x_max and y_min < y_max, got {}".format(self.as_tuple()))

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_tuple(self):
        return (self.x_min, self.y_min, self.x_max, self.y_max)

@dataclass(frozen = True)
class Detection:
    """
    @var target_id The id of the target that produced the detection, or None
         for a false positive
    @var visibility The visibility of the producing sighting (0 for a false positive)
    """
    bbox: BBox
    confidence: float
    target_id: Optional[int] = None
    visibility: float = 0.0

@dataclass(frozen = True)
class DetectorProfile:
    """
    The stochastic stand-in of a detection method

    The recall and confidence values are invented; only `seconds_per_image`
    comes from measured timings.

    @var visibility_threshold Sightings at or above it use `recall_full`
    @var false_positive_rate The mean count of false positives per processed frame
    @var false_positive_confidence The mean confidence of a false positive
    """
    name: str
    seconds_per_image: float
    recall_full: float
    recall_partial: float
    confidence_mean: float
    confidence_std: float
    visibility_threshold: float = 0.8
    false_positive_rate: float = 0.0
    false_positive_confidence: float = 0.45

    def __post_init__(self):
        require(self.seconds_per_image > 0, "seconds_per_image", "must be strictly positive")
        for name in ("recall_full", "recall_partial", "confidence_mean",
                "false_positive_confidence"):
            require(0 <= getattr(self, name) <= 1, name, "must be in [0, 1]")
        require(self.confidence_std >= 0, "confidence_std", "must not be negative")
        require(0 < self.visibility_threshold < 1, "visibility_threshold", "must be in (0, 1)")
        require(self.false_positive_rate >= 0, "false_positive_rate", "must not be negative")

class DetectorPreset(StringEnum):
    SSD = auto()
    HAAR = auto()
    HOG = auto()

DETECTOR_PRESETS = {
    DetectorPreset.SSD: DetectorProfile("ssd", 0.333, 0.95, 0.6, 0.85, 0.08,
        false_positive_rate = 0.05),
    DetectorPreset.HAAR: DetectorProfile("haar", 1.0, 0.8, 0.0, 0.72, 0.12,
        false_positive_rate = 0.2),
    DetectorPreset.HOG: DetectorProfile("hog", 18.879, 0.85, 0.0, 0.7, 0.12,
        false_positive_rate = 0.2),
}

def detector_preset(name: str) -> DetectorProfile:
    """
    Get the shipped profile of the specified name

    @exception InvalidArgumentError If there is no such preset
    """
    try:
        return DETECTOR_PRESETS[DetectorPreset.parse(name)]
    except ValueError as e:
        raise InvalidArgumentError("detector", str(e))

@dataclass(frozen = True)
class GroundTarget:
    """
    A person on the ground modeled as a world-axis-aligned rectangle

    @var x, y The center of the rectangle in m (east, north)
    @var width The extent along east in m
    @var length The extent along north in m
    @var visibility_cap The upper bound of the visibility the mission records
         for a sighting. A partially visible person gets `PARTIAL_VISIBILITY_CAP`.
    """
    id: int
    x: float
    y: float
    width: float = 0.6
    length: float = 1.2
    visibility_cap: float = 1.0

    def __post_init__(self):
        require(self.width > 0 and self.length > 0, "footprint",
            "dimensions must be strictly positive")
        require(0 < self.visibility_cap <= 1, "visibility_cap", "must be in (0, 1]")

    @property
    def is_partial(self) -> bool:
        return self.visibility_cap < 1.0

    def sighted_visibility(self, visibility: float) -> float:
        """
        Limit the geometric visibility of a sighting by the cap of the person
        """
        return min(visibility, self.visibility_cap)

def ground_footprint(camera: CameraModel, altitude: float):
    """
    The ground area seen by the level camera

    @return A tuple (width, height) in m. The width is across the body.
    """
    if not altitude > 0:
        raise InvalidArgumentError("altitude", "must be strictly positive, got {}".format(altitude))

    return (2.0 * altitude * math.tan(camera.hfov / 2.0),
        2.0 * altitude * math.tan(camera.vfov / 2.0))

def project_target(state: QuadState, camera: CameraModel, target: GroundTarget):
    """
    Project the target rectangle into the image

    The projection assumes level flight with the heading applied. Roll and
    pitch at or beyond `TILT_IGNORE_LIMIT` shift the view axis. The
    visibility is purely geometric: 1 exactly when the whole rectangle is in
    the frame.

    @return A tuple (clipped `BBox`, visibility), or None if the target is out
            of the frame
    """
    height = state.position.z
    if not height > 0:
        raise InvalidArgumentError("state", "the camera must be above the ground")

    c_psi, s_psi = math.cos(state.yaw), math.sin(state.yaw)
    shift_forward = shift_right = 0.0
    if abs(state.roll) >= TILT_IGNORE_LIMIT or abs(state.pitch) >= TILT_IGNORE_LIMIT:
        shift_right = height * math.tan(state.roll)
        shift_forward = -height * math.tan(state.pitch)

    fx, fy = camera.fx, camera.fy
    cx, cy = camera.width_px / 2.0, camera.height_px / 2.0
    us, vs = [], []
    for sx in (-0.5, 0.5):
        for sy in (-0.5, 0.5):
            dx = target.x + sx * target.width - state.position.x
            dy = target.y + sy * target.length - state.position.y
            forward = c_psi * dy + s_psi * dx + shift_forward
            right = -s_psi * dy + c_psi * dx + shift_right
            us.append(cx + fx * right / height)
            vs.append(cy - fy * forward / height)

    x_min, x_max, y_min, y_max = min(us), max(us), min(vs), max(vs)
    full_area = (x_max - x_min) * (y_max - y_min)

    clip_x_min, clip_x_max = max(x_min, 0.0), min(x_max, float(camera.width_px))
    clip_y_min, clip_y_max = max(y_min, 0.0), min(y_max, float(camera.height_px))
    if clip_x_min >= clip_x_max or clip_y_min >= clip_y_max:
        return None

    clipped = BBox(clip_x_min, clip_y_min, clip_x_max, clip_y_max)
    visibility = min(clipped.area / full_area, 1.0)
    return clipped, visibility

def iou(a: BBox, b: BBox) -> float:
    """
    Intersection over union of two boxes
    """
    w = max(0.0, min(a.x_max, b.x_max) - max(a.x_min, b.x_min))
    h = max(0.0, min(a.y_max, b.y_max) - max(a.y_min, b.y_min))
    inter = w * h
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0

def _iou_one_to_many(box, boxes: np.ndarray) -> np.ndarray:
    """
    Vectorized `iou` of one box (x1, y1, x2, y2) against an (N, 4) array
    """
    x1, y1, x2, y2 = box
    w = np.maximum(0.0, np.minimum(x2, boxes[:, 2]) - np.maximum(x1, boxes[:, 0]))
    h = np.maximum(0.0, np.minimum(y2, boxes[:, 3]) - np.maximum(y1, boxes[:, 1]))
    inter = w * h
    areas = (boxes[:, 2] - boxes[:, 0]) * (boxes[:, 3] - boxes[:, 1])
    union = (x2 - x1) * (y2 - y1) + areas - inter
    return np.divide(inter, union, out = np.zeros_like(inter), where = union > 0)

def _default_box_array(camera: CameraModel, grid_sizes, scales, aspect_ratios):
    require(len(grid_sizes) > 0, "grid_sizes", "must not be empty")
    require(len(scales) > 0, "scales", "must not be empty")
    require(len(aspect_ratios) > 0, "aspect_ratios", "must not be empty")
    require(len(scales) == len(grid_sizes), "scales", "must give one scale per grid")
    require(all(0 < s <= 1 for s in scales), "scales", "must be in (0, 1]")
    require(list(scales) == sorted(scales), "scales", "must be ascending")
    require(all(n > 0 for n in grid_sizes), "grid_sizes", "must be strictly positive")
    require(all(a > 0 for a in aspect_ratios), "aspect_ratios", "must be strictly positive")

    width, height = float(camera.width_px), float(camera.height_px)
    rows = []
    for n, scale in zip(grid_sizes, scales):
        for j in range(n):
            center_y = (j + 0.5) / n * height
            for i in range(n):
                center_x = (i + 0.5) / n * width
                for ar in aspect_ratios:
                    half_w = scale * width * math.sqrt(ar) / 2.0
                    half_h = scale * height / math.sqrt(ar) / 2.0
                    rows.append((
                        max(0.0, center_x - half_w), max(0.0, center_y - half_h),
                        min(width, center_x + half_w), min(height, center_y + half_h)))

    return np.array(rows, dtype = np.float64)

def default_boxes(grid_sizes, scales, aspect_ratios,
        camera: CameraModel = CameraModel()) -> List[BBox]:
    """
    Generate the multi-scale default boxes

    Grid k uses scales[k]. The boxes are ordered by grid, then cell row, then
    cell column, then aspect ratio, and clipped to the frame.
    """
    array = _default_box_array(camera, grid_sizes, scales, aspect_ratios)
    return [BBox(*(float(v) for v in row)) for row in array]

class DefaultBoxSet:
    """
    The default boxes of a camera held as an (N, 4) array
    """

    def __init__(self, camera: CameraModel = CameraModel(),
            grid_sizes = DEFAULT_GRID_SIZES, scales = DEFAULT_SCALES,
            aspect_ratios = DEFAULT_ASPECT_RATIOS):
        self.array = _default_box_array(camera, grid_sizes, scales, aspect_ratios)
        self.array.setflags(write = False)

    def __len__(self):
        return len(self.array)

    def bbox(self, index: int) -> BBox:
        return BBox(*(float(v) for v in self.array[index]))

    def best_match(self, truth: BBox) -> int:
        """
        The index of the box with the highest IoU to `truth`. Ties go to the
        lowest index.
        """
        return int(np.argmax(_iou_one_to_many(truth.as_tuple(), self.array)))

@lru_cache(maxsize = 64)
def _stream(seed: int, subsystem: Subsystem) -> CounterStream:
    return CounterStream(seed, subsystem)

def _clamp_unit(value: float) -> float:
    return min(1.0, max(0.0, float(value)))

def simulate_detector(ground_truth, profile: DetectorProfile, boxes: DefaultBoxSet,
        frame_index: int, mission_seed: int) -> List[Detection]:
    """
    Produce the raw detections of one processed frame

    The hit and confidence draws of a sighting are keyed by (seed, frame,
    target id), so every profile looking at the same frame faces the same
    numbers. False positives are keyed by (seed, frame).

    @param ground_truth A list of (`BBox`, visibility, target id)
    @return The detections of the targets followed by the false positives
    """
    detections = []
    hits = _stream(mission_seed, Subsystem.DETECTOR)
    for truth, visibility, target_id in ground_truth:
        recall = (profile.recall_full if visibility >= profile.visibility_threshold
            else profile.recall_partial)
        draw = hits.generator(frame_index, target_id, Purpose.HIT).random()
        if not draw < recall:
            continue

        z = hits.generator(frame_index, target_id, Purpose.CONFIDENCE).standard_normal()
        confidence = _clamp_unit(profile.confidence_mean + profile.confidence_std * z)
        box = boxes.bbox(boxes.best_match(truth))
        detections.append(Detection(box, confidence, target_id, visibility))

    generator = _stream(mission_seed, Subsystem.FALSE_POSITIVE).generator(frame_index)
    count = int(generator.poisson(profile.false_positive_rate))
    if count:
        indices = generator.integers(0, len(boxes), count)
        noise = generator.standard_normal(count)
        for index, z in zip(indices, noise):
            confidence = _clamp_unit(
                profile.false_positive_confidence + profile.confidence_std * z)
            detections.append(Detection(boxes.bbox(int(index)), confidence))

    return detections

def nms(detections: List[Detection], iou_threshold: float) -> List[Detection]:
    """
    Greedy non-maximum suppression

    The highest confidence goes first, ties to the lower input index. A
    detection is discarded when its IoU with a kept one exceeds the threshold.

    @return The kept detections in selection order
    """
    if not detections:
        return []

    dets = np.array([d.bbox.as_tuple() for d in detections], dtype = np.float64)
    scores = np.array([d.confidence for d in detections], dtype = np.float64)
    x1, y1, x2, y2 = dets[:, 0], dets[:, 1], dets[:, 2], dets[:, 3]
    areas = (x2 - x1) * (y2 - y1)
    order = np.lexsort((np.arange(len(detections)), -scores))

    keep = []
    while order.size > 0:
        i = order[0]
        keep.append(int(i))
        rest = order[1:]
        xx1 = np.maximum(x1[i], x1[rest])
        yy1 = np.maximum(y1[i], y1[rest])
        xx2 = np.minimum(x2[i], x2[rest])
        yy2 = np.minimum(y2[i], y2[rest])

        w = np.maximum(0.0, xx2 - xx1)
        h = np.maximum(0.0, yy2 - yy1)
        inter = w * h
        overlap = inter / (areas[i] + areas[rest] - inter)

        order = rest[overlap <= iou_threshold]

    return [detections[i] for i in keep]

def post_process(detections: List[Detection],
        confidence_floor: float = CONFIDENCE_FLOOR,
        iou_threshold: float = NMS_IOU_THRESHOLD) -> List[Detection]:
    """
    Drop the detections under the confidence floor and suppress the rest
    """
    return nms([d for d in detections if d.confidence >= confidence_floor], iou_threshold)

def confirms_target(detection: Detection, target_id: int, truth: BBox) -> bool:
    """
    Check whether a surviving detection counts as finding the target
    """
    return (detection.target_id == target_id and
        detection.confidence >= CONFIDENCE_FLOOR and
        iou(detection.bbox, truth) >= MATCH_IOU_THRESHOLD)

def throughput(profile: DetectorProfile) -> float:
    """
    The frames per second the detector processes
    """
    return 1.0 / profile.seconds_per_image
