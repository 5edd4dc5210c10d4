"""Gesture-type assignment from reading trajectories.

A sample whose total path length stays under a small threshold is a tap;
otherwise the net displacement decides between a downward swipe (dominant
negative y motion) and a forward or backward swipe (sign of the x
displacement). Dominant upward motion and zero-displacement loops have no
type in this gesture set and classify to None.
"""

import enum
import math
from dataclasses import dataclass

from glanceauth.events import RawSample


class GestureType(str, enum.Enum):
    TAP = "T"
    FORWARD = "F"
    BACKWARD = "B"
    DOWNWARD = "D"


# canonical ordering used for combinations, model files, and reports
GESTURE_ORDER = (
    GestureType.TAP,
    GestureType.FORWARD,
    GestureType.BACKWARD,
    GestureType.DOWNWARD,
)

SWIPE_TYPES = frozenset(
    (GestureType.FORWARD, GestureType.BACKWARD, GestureType.DOWNWARD)
)


@dataclass(frozen=True)
class TypingConfig:
    """Thresholds for gesture typing.

    tap_path_max is in touchpad units along the 1366-unit axis; down_ratio
    is the |dy|/|dx| dominance ratio for downward swipes; invert_x flips
    the forward/backward convention.
    """

    tap_path_max: float = 30.0
    down_ratio: float = 1.0
    invert_x: bool = False


@dataclass(frozen=True)
class GestureSample:
    sample: RawSample
    gesture_type: GestureType


def path_length(readings):
    """Sum of the segment lengths along the reading trajectory."""
    return sum(
        math.hypot(b.x - a.x, b.y - a.y)
        for a, b in zip(readings, readings[1:])
    )


def classify_gesture(sample, cfg=TypingConfig()):
    """Assign a gesture type, or None when the motion fits no type.

    Deterministic and dependent only on the coordinate sequence.
    """
    readings = sample.readings
    if not readings:
        raise ValueError("sample has no readings")
    if path_length(readings) < cfg.tap_path_max:
        return GestureSample(sample, GestureType.TAP)
    dx = readings[-1].x - readings[0].x
    dy = readings[-1].y - readings[0].y
    if cfg.invert_x:
        dx = -dx
    if abs(dy) > cfg.down_ratio * abs(dx):
        if dy < 0:
            return GestureSample(sample, GestureType.DOWNWARD)
        return None  # dominant upward motion is not a gesture type
    if dx > 0:
        return GestureSample(sample, GestureType.FORWARD)
    if dx < 0:
        return GestureSample(sample, GestureType.BACKWARD)
    return None


def parse_combination(text):
    """Turn a combination label like "TF" into an ordered gesture tuple.

    Letters may come in any order; the result follows the canonical
    T, F, B, D order. Raises ValueError on unknown or repeated letters.
    """
    if isinstance(text, (tuple, list)):
        letters = {gt.value if isinstance(gt, GestureType) else str(gt) for gt in text}
    else:
        letters = set(text)
    valid = {gt.value for gt in GESTURE_ORDER}
    unknown = letters - valid
    if unknown:
        raise ValueError(f"unknown gesture letters: {sorted(unknown)}")
    if not letters:
        raise ValueError("empty gesture combination")
    if not isinstance(text, (tuple, list)) and len(text) != len(letters):
        raise ValueError(f"repeated gesture letters in {text!r}")
    return tuple(gt for gt in GESTURE_ORDER if gt.value in letters)


def combination_label(combination):
    """Inverse of parse_combination: ("T", "F") -> "TF"."""
    return "".join(gt.value for gt in parse_combination(combination))
