"""Shared fixtures: the reference event packet and sample builders."""

import numpy as np
import pytest

from glanceauth.events import RawSample, Reading

# Reference single-reading packet as emitted by the device: eight
# absolute-axis events (tracking id, tool type, pressure, touch major and
# minor, orientation, x, y) closed by the SYN pair. Legacy layout, no
# timestamp column.
REFERENCE_PACKET = (
    b"0003 0039 00000000\n"
    b"0003 0037 00000000\n"
    b"0003 003a 00000047\n"
    b"0003 0030 00000003\n"
    b"0003 0031 00000002\n"
    b"0003 0034 00000000\n"
    b"0003 0035 00000351\n"
    b"0003 0036 00000066\n"
    b"0000 0002 00000000\n"
    b"0000 0000 00000000\n"
)

EMPTY_SYN_FRAME = b"0000 0002 00000000\n0000 0000 00000000\n"


def make_sample(points, pressures=None, majors=None, minors=None, dt=0.012, user="u"):
    """RawSample from (x, y) points with optional per-reading sensor values."""
    readings = []
    for i, (x, y) in enumerate(points):
        readings.append(
            Reading(
                timestamp=i * dt,
                x=int(x),
                y=int(y),
                pressure=int(pressures[i]) if pressures is not None else 70,
                touch_major=int(majors[i]) if majors is not None else 3,
                touch_minor=int(minors[i]) if minors is not None else 2,
                tracking_id=0,
                orientation=0,
            )
        )
    return RawSample(readings=readings, user_id=user)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def event_log_text(
    user_seed,
    taps=60,
    swipes=60,
    down_swipes=0,
    x_base=0x220,
    y_base=95,
    p_base=0x40,
    step=60,
    cadence=0.012,
):
    """A jittered, timestamped event log: no feature is constant.

    Taps hold one spot for a few readings; forward swipes run `step` x
    units per reading; downward swipes descend the y axis. The bases and
    cadence set where a user's features sit, so two calls with different
    values give distinguishable users.
    """
    rng = np.random.default_rng(user_seed)
    lines = []
    t = 0.0

    def reading(x, y, pressure, major):
        nonlocal t
        lines.append(f"{t:.4f} 0003 0039 00000000")
        lines.append(f"{t:.4f} 0003 003a {pressure:08x}")
        lines.append(f"{t:.4f} 0003 0030 {major:08x}")
        lines.append(f"{t:.4f} 0003 0031 00000002")
        lines.append(f"{t:.4f} 0003 0035 {x:08x}")
        lines.append(f"{t:.4f} 0003 0036 {y:08x}")
        lines.append(f"{t:.4f} 0000 0002 00000000")
        lines.append(f"{t:.4f} 0000 0000 00000000")
        t += cadence + rng.integers(0, 3) * 0.001

    def close_sample():
        nonlocal t
        lines.append(f"{t:.4f} 0000 0002 00000000")
        lines.append(f"{t:.4f} 0000 0000 00000000")
        t += 0.05

    for _ in range(taps):
        x = x_base + int(rng.integers(0, 12))
        y = y_base + int(rng.integers(0, 8))
        for _ in range(2 + int(rng.integers(0, 2))):
            reading(x, y, p_base + int(rng.integers(0, 12)), 3 + int(rng.integers(0, 2)))
        close_sample()
    for _ in range(swipes):
        x = x_base + int(rng.integers(0, 12))
        y = y_base + int(rng.integers(0, 8))
        for k in range(8):
            reading(
                x + step * k + int(rng.integers(0, 6)),
                y + int(rng.integers(0, 4)),
                p_base + int(rng.integers(0, 12)),
                3 + int(rng.integers(0, 2)),
            )
        close_sample()
    for _ in range(down_swipes):
        x = x_base + int(rng.integers(0, 12))
        for k in range(6):
            reading(
                x + int(rng.integers(0, 4)),
                150 - 22 * k + int(rng.integers(0, 3)),
                p_base + int(rng.integers(0, 12)),
                3 + int(rng.integers(0, 2)),
            )
        close_sample()
    return "\n".join(lines) + "\n"
