"""Feature extraction for typed gesture samples.

Each gesture is modelled through the forces the finger exerts on the pad:
the normal force, estimated per reading as pressure times contact area,
and (for swipes) the planar force, estimated through the finger speed
between adjacent readings. Both are kept as fixed-length time series on a
regular grid; the remaining features are scalars (coordinates, angle,
duration, length).

Taps carry 4 features (x, y, Fz series, dt); swipes carry 9 (x0, y0, x1,
y1, theta, Fz series, Fxy series, dt, l).
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from glanceauth import backend
from glanceauth.errors import FeatureError
from glanceauth.gestures import SWIPE_TYPES, GestureType

AREA_MAJOR = "major"
AREA_MAJOR_TIMES_MINOR = "major-times-minor"

TAP_UNITARY = ("x", "y", "dt")
TAP_SERIES = ("Fz",)
SWIPE_UNITARY = ("x0", "y0", "x1", "y1", "theta", "dt", "l")
SWIPE_SERIES = ("Fz", "Fxy")

# presentation order of the full feature list per gesture type
TAP_FEATURE_ORDER = ("x", "y", "Fz", "dt")
SWIPE_FEATURE_ORDER = ("x0", "y0", "x1", "y1", "theta", "Fz", "Fxy", "dt", "l")


@dataclass(frozen=True)
class ResampleConfig:
    """Resampling grid: interval t_int, cutoff t_off, both in seconds.

    t_off must be a positive integer multiple of t_int; the series length
    is m = t_off / t_int (30 with the defaults).
    """

    t_int: float = 0.01
    t_off: float = 0.3

    def __post_init__(self):
        if not self.t_int > 0:
            raise ValueError("t_int must be positive")
        ratio = self.t_off / self.t_int
        if ratio < 0.5 or abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("t_off must be a positive integer multiple of t_int")

    @property
    def m(self):
        return int(round(self.t_off / self.t_int))


@dataclass(frozen=True)
class ExtractConfig:
    resample: ResampleConfig = field(default_factory=ResampleConfig)
    area_mode: str = AREA_MAJOR

    def __post_init__(self):
        if self.area_mode not in (AREA_MAJOR, AREA_MAJOR_TIMES_MINOR):
            raise ValueError(f"unknown area mode {self.area_mode!r}")


@dataclass
class FeatureSet:
    """Extracted features of one sample: named scalars plus named series.

    day is an optional collection-day label used by the behavioural
    evolution protocol; None otherwise.
    """

    gesture_type: GestureType
    unitary: dict
    series: dict
    day: int = None


def unitary_names(gesture_type):
    return TAP_UNITARY if gesture_type == GestureType.TAP else SWIPE_UNITARY


def series_names(gesture_type):
    return TAP_SERIES if gesture_type == GestureType.TAP else SWIPE_SERIES


def feature_order(gesture_type):
    return (
        TAP_FEATURE_ORDER
        if gesture_type == GestureType.TAP
        else SWIPE_FEATURE_ORDER
    )


def feature_count(gesture_type):
    return len(feature_order(gesture_type))


def feature_ids(combination):
    """Qualified feature names, e.g. ("T.x", ..., "F.x0", ...), in canonical order."""
    ids = []
    for gt in combination:
        ids.extend(f"{gt.value}.{name}" for name in feature_order(gt))
    return tuple(ids)


def force_magnitude(pressure, area):
    """Normal-force estimate: pressure times contact area.

    The unit is arbitrary but consistent across readings and users.
    """
    return pressure * area


def _contact_area(reading, cfg):
    if cfg.area_mode == AREA_MAJOR_TIMES_MINOR:
        return reading.touch_major * reading.touch_minor
    return reading.touch_major


def resample_series(points, cfg):
    """Resample (t, v) points onto the grid k*t_int for k = 0 .. m-1.

    Times are rebased so the first point sits at t = 0. Grid values are
    linear interpolations of the bracketing points; grid points past the
    last input time are 0; anything beyond t_off is discarded.
    """
    if len(points) == 0:
        raise FeatureError("cannot resample an empty series")
    times = np.asarray([p[0] for p in points], dtype=np.float64)
    values = np.asarray([p[1] for p in points], dtype=np.float64)
    if np.any(np.diff(times) <= 0):
        raise FeatureError("series timestamps must be strictly increasing")
    times = times - times[0]
    return backend.resample_grid(
        np.ascontiguousarray(times), np.ascontiguousarray(values), cfg.m, cfg.t_int
    )


def _force_points(readings, cfg):
    return [
        (r.timestamp, force_magnitude(r.pressure, _contact_area(r, cfg)))
        for r in readings
    ]


def _speed_points(readings):
    # speed between adjacent readings, stamped at the later reading; the
    # first instant has no speed and is defined as 0
    points = [(readings[0].timestamp, 0.0)]
    for a, b in zip(readings, readings[1:]):
        dt = b.timestamp - a.timestamp
        if dt <= 0:
            raise FeatureError("zero time difference between adjacent readings")
        points.append((b.timestamp, math.hypot(b.x - a.x, b.y - a.y) / dt))
    return points


def extract_tap(gesture_sample, cfg=ExtractConfig()):
    """Features of a tap: touch point, duration, and the normal-force series."""
    if gesture_sample.gesture_type != GestureType.TAP:
        raise FeatureError("extract_tap requires a tap sample")
    readings = gesture_sample.sample.readings
    first, last = readings[0], readings[-1]
    unitary = {
        "x": float(first.x),
        "y": float(first.y),
        "dt": last.timestamp - first.timestamp,
    }
    series = {"Fz": resample_series(_force_points(readings, cfg), cfg.resample)}
    return FeatureSet(GestureType.TAP, unitary, series)


def extract_swipe(gesture_sample, cfg=ExtractConfig()):
    """Features of a swipe: end points, angle, length, duration, force series.

    theta is the signed angle between the start-to-end segment and the
    y axis, atan2(dx, dy), so mirrored swipes get opposite signs.
    """
    if gesture_sample.gesture_type not in SWIPE_TYPES:
        raise FeatureError("extract_swipe requires a swipe sample")
    readings = gesture_sample.sample.readings
    if len(readings) < 2:
        raise FeatureError("a swipe needs at least two readings")
    first, last = readings[0], readings[-1]
    dx = last.x - first.x
    dy = last.y - first.y
    unitary = {
        "x0": float(first.x),
        "y0": float(first.y),
        "x1": float(last.x),
        "y1": float(last.y),
        "theta": math.atan2(dx, dy),
        "dt": last.timestamp - first.timestamp,
        "l": math.hypot(dx, dy),
    }
    series = {
        "Fz": resample_series(_force_points(readings, cfg), cfg.resample),
        "Fxy": resample_series(_speed_points(readings), cfg.resample),
    }
    return FeatureSet(gesture_sample.gesture_type, unitary, series)


def extract_features(gesture_sample, cfg=ExtractConfig()):
    if gesture_sample.gesture_type == GestureType.TAP:
        return extract_tap(gesture_sample, cfg)
    return extract_swipe(gesture_sample, cfg)


def write_feature_csv(fh, rows, m):
    """Dump (user_id, FeatureSet) pairs as CSV, one sample per row.

    Columns: user_id, gesture_type, the unitary features (blank where a
    type lacks one), then m Fz columns and m Fxy columns (blank for taps).
    """
    names = list(dict.fromkeys(TAP_UNITARY + SWIPE_UNITARY))
    header = (
        ["user_id", "gesture_type"]
        + names
        + [f"fz_{k:02d}" for k in range(m)]
        + [f"fxy_{k:02d}" for k in range(m)]
    )
    writer = csv.writer(fh)
    writer.writerow(header)
    for user_id, fs in rows:
        row = [user_id, fs.gesture_type.value]
        row.extend(repr(fs.unitary[n]) if n in fs.unitary else "" for n in names)
        row.extend(repr(float(v)) for v in fs.series["Fz"])
        if "Fxy" in fs.series:
            row.extend(repr(float(v)) for v in fs.series["Fxy"])
        else:
            row.extend("" for _ in range(m))
        writer.writerow(row)
