"""Decoder for textual touchpad event logs.

Each line of a log carries one kernel input event:

    <timestamp> <type> <code> <value>

with the timestamp in decimal seconds and the remaining three fields in
bare hexadecimal, e.g. ``0.024 0003 0035 00000351``. Lines starting with
``#`` and blank lines are ignored. Legacy captures that predate the
timestamp column (three fields per line) are accepted with
``legacy=True``, which synthesises timestamps at the device's typical
reading interval of 0.012 s.

Events group into *readings* (one row of sensor values, closed by the
SYN_MT_REPORT / SYN_REPORT pair) and readings into gesture *samples*: a
sample is closed by a SYN_REPORT with no absolute-axis data since the
previous one (an empty frame, i.e. finger lifted) or by end of stream.
"""

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from glanceauth.errors import ParseError

EV_SYN = 0x0000
EV_ABS = 0x0003

SYN_REPORT = 0x0000
SYN_MT_REPORT = 0x0002

ABS_MT_TOUCH_MAJOR = 0x0030
ABS_MT_TOUCH_MINOR = 0x0031
ABS_MT_ORIENTATION = 0x0034
ABS_MT_POSITION_X = 0x0035
ABS_MT_POSITION_Y = 0x0036
ABS_MT_TOOL_TYPE = 0x0037
ABS_MT_TRACKING_ID = 0x0039
ABS_MT_PRESSURE = 0x003A

MT_TOOL_FINGER = 0

# touchpad coordinate ranges; anything outside marks the sample as bad
X_MAX = 1366
Y_MAX = 187

# mean inter-reading gap used when synthesising timestamps for legacy logs
SYNTH_READING_INTERVAL = 0.012

_ABS_CODES = frozenset(
    (
        ABS_MT_TOUCH_MAJOR,
        ABS_MT_TOUCH_MINOR,
        ABS_MT_ORIENTATION,
        ABS_MT_POSITION_X,
        ABS_MT_POSITION_Y,
        ABS_MT_TOOL_TYPE,
        ABS_MT_TRACKING_ID,
        ABS_MT_PRESSURE,
    )
)
_SYN_CODES = frozenset((SYN_REPORT, SYN_MT_REPORT))

# a sample's first reading must carry these; later readings inherit
_REQUIRED_FIRST = (
    ABS_MT_POSITION_X,
    ABS_MT_POSITION_Y,
    ABS_MT_PRESSURE,
    ABS_MT_TOUCH_MAJOR,
)
_FIRST_DEFAULTS = {
    ABS_MT_TOUCH_MINOR: 0,
    ABS_MT_ORIENTATION: 0,
    ABS_MT_TRACKING_ID: 0,
    ABS_MT_TOOL_TYPE: MT_TOOL_FINGER,
}


@dataclass(frozen=True)
class RawEvent:
    """One decoded event: type and code are 16-bit, value 32-bit unsigned."""

    timestamp: float
    ev_type: int
    ev_code: int
    ev_value: int


@dataclass(frozen=True)
class Reading:
    """Sensor values at one instant within a gesture."""

    timestamp: float
    x: int
    y: int
    pressure: int
    touch_major: int
    touch_minor: int
    tracking_id: int
    orientation: int


@dataclass
class RawSample:
    """All readings of one complete single-finger gesture."""

    readings: list
    user_id: str = ""


_HEX_DIGITS = frozenset("0123456789abcdefABCDEF")


def _hex_field(text, name, lineno):
    # bare hex digits only: no sign, no 0x prefix
    if not text or any(c not in _HEX_DIGITS for c in text):
        raise ParseError(f"not a hexadecimal number: {text!r}", lineno, name)
    return int(text, 16)


def _decode(timestamp, type_text, code_text, value_text, lineno):
    ev_type = _hex_field(type_text, "type", lineno)
    ev_code = _hex_field(code_text, "code", lineno)
    ev_value = _hex_field(value_text, "value", lineno)
    if ev_type == EV_SYN:
        if ev_code not in _SYN_CODES:
            raise ParseError(f"unknown SYN code {ev_code:#06x}", lineno, "code")
    elif ev_type == EV_ABS:
        if ev_code not in _ABS_CODES:
            raise ParseError(f"unknown ABS code {ev_code:#06x}", lineno, "code")
    else:
        raise ParseError(f"unknown event type {ev_type:#06x}", lineno, "type")
    if not 0 <= ev_value <= 0xFFFFFFFF:
        raise ParseError(f"value out of 32-bit range: {value_text!r}", lineno, "value")
    return RawEvent(timestamp, ev_type, ev_code, ev_value)


def parse_event_line(line, lineno=None):
    """Decode one timestamped log line into a RawEvent.

    Raises ParseError (naming the line and field) on a wrong field count,
    a non-numeric field, a negative timestamp, or an unknown type or code.
    """
    fields = line.split()
    if len(fields) != 4:
        raise ParseError(f"expected 4 fields, got {len(fields)}", lineno, "line")
    try:
        timestamp = float(fields[0])
    except ValueError:
        raise ParseError(f"bad timestamp {fields[0]!r}", lineno, "timestamp") from None
    if not timestamp >= 0.0:
        raise ParseError(f"negative timestamp {fields[0]!r}", lineno, "timestamp")
    return _decode(timestamp, fields[1], fields[2], fields[3], lineno)


def format_event_line(event):
    """Inverse of parse_event_line: ``parse(format(e)) == e``."""
    return f"{event.timestamp!r} {event.ev_type:04x} {event.ev_code:04x} {event.ev_value:08x}"


def iter_log_events(lines, legacy=False, start_line=1):
    """Yield RawEvents from an iterable of text lines.

    Comment (``#``) and blank lines are skipped. With legacy=True, lines
    carry no timestamp column and each completed reading is stamped
    SYNTH_READING_INTERVAL apart. Stream timestamps must be non-decreasing.
    """
    previous = 0.0
    readings_seen = 0
    for lineno, raw in enumerate(lines, start_line):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        if legacy:
            fields = text.split()
            if len(fields) != 3:
                raise ParseError(
                    f"expected 3 fields in legacy mode, got {len(fields)}", lineno, "line"
                )
            event = _decode(
                readings_seen * SYNTH_READING_INTERVAL,
                fields[0],
                fields[1],
                fields[2],
                lineno,
            )
            if event.ev_type == EV_SYN and event.ev_code == SYN_REPORT:
                readings_seen += 1
        else:
            event = parse_event_line(text, lineno)
        if event.timestamp < previous:
            raise ParseError(
                f"timestamp {event.timestamp!r} decreases within the stream",
                lineno,
                "timestamp",
            )
        previous = event.timestamp
        yield event


class SampleAssembler:
    """Streaming state machine turning an event sequence into gesture samples.

    Feeding a stream in chunks produces the same samples as feeding it
    whole; call finish() once at end of stream to flush the open sample.
    Invalid samples (incomplete first reading, out-of-range coordinates,
    tracking-id change, non-increasing reading timestamps) are dropped and
    tallied in discard_counts by reason.
    """

    def __init__(self, user_id=""):
        self.user_id = user_id
        self.discard_counts = Counter()
        self._pending = {}
        self._carry = {}
        self._readings = []
        self._open = False
        self._bad = None

    def feed(self, events):
        """Consume events, returning any samples completed by them."""
        done = []
        for event in events:
            if event.ev_type == EV_ABS:
                self._pending[event.ev_code] = event.ev_value
                self._open = True
            elif event.ev_type == EV_SYN and event.ev_code == SYN_REPORT:
                if self._pending:
                    self._close_reading(event.timestamp)
                else:
                    sample = self._close_sample()
                    if sample is not None:
                        done.append(sample)
            # SYN_MT_REPORT carries no state for single-finger streams
        return done

    def finish(self):
        """Flush the open sample at end of stream, if any.

        A trailing reading that never saw its closing SYN pair is dropped;
        the sample's completed readings still form a sample.
        """
        self._pending = {}
        sample = self._close_sample()
        return [sample] if sample is not None else []

    def _close_reading(self, timestamp):
        merged = dict(self._carry)
        merged.update(self._pending)
        self._pending = {}
        if not self._readings and self._bad is None:
            if any(code not in merged for code in _REQUIRED_FIRST):
                self._bad = "incomplete-first-reading"
            else:
                for code, default in _FIRST_DEFAULTS.items():
                    merged.setdefault(code, default)
        self._carry = merged
        if self._bad is not None:
            return
        reading = Reading(
            timestamp=timestamp,
            x=merged[ABS_MT_POSITION_X],
            y=merged[ABS_MT_POSITION_Y],
            pressure=merged[ABS_MT_PRESSURE],
            touch_major=merged[ABS_MT_TOUCH_MAJOR],
            touch_minor=merged[ABS_MT_TOUCH_MINOR],
            tracking_id=merged[ABS_MT_TRACKING_ID],
            orientation=merged[ABS_MT_ORIENTATION],
        )
        if not (0 <= reading.x <= X_MAX and 0 <= reading.y <= Y_MAX):
            self._bad = "out-of-range"
        elif self._readings and reading.tracking_id != self._readings[0].tracking_id:
            self._bad = "multi-finger"
        elif self._readings and reading.timestamp <= self._readings[-1].timestamp:
            self._bad = "non-increasing-timestamps"
        else:
            self._readings.append(reading)

    def _close_sample(self):
        if not self._open:
            return None
        sample = None
        if self._bad is not None:
            self.discard_counts[self._bad] += 1
        elif self._readings:
            sample = RawSample(readings=self._readings, user_id=self.user_id)
        self._pending = {}
        self._carry = {}
        self._readings = []
        self._open = False
        self._bad = None
        return sample


def assemble_samples(events, user_id=""):
    """Group a whole event stream into samples; returns (samples, discard_counts)."""
    assembler = SampleAssembler(user_id)
    samples = assembler.feed(events)
    samples.extend(assembler.finish())
    return samples, assembler.discard_counts


def read_event_log(path, user_id=None, legacy=False):
    """Parse one log file into samples.

    The user id defaults to the file name stem. Returns
    (samples, discard_counts).
    """
    path = Path(path)
    if user_id is None:
        user_id = path.stem
    # utf-8-sig: device pulls occasionally carry a BOM
    with open(path, encoding="utf-8-sig") as fh:
        return assemble_samples(iter_log_events(fh, legacy=legacy), user_id)
