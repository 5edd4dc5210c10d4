import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_sample
from glanceauth.errors import FeatureError
from glanceauth.events import X_MAX
from glanceauth.features import (
    AREA_MAJOR_TIMES_MINOR,
    ExtractConfig,
    ResampleConfig,
    extract_features,
    extract_swipe,
    extract_tap,
    feature_count,
    feature_ids,
    force_magnitude,
    resample_series,
    write_feature_csv,
)
from glanceauth.gestures import GESTURE_ORDER, GestureSample, GestureType


def tap(points, **kw):
    return GestureSample(make_sample(points, **kw), GestureType.TAP)


def swipe(points, gt=GestureType.FORWARD, **kw):
    return GestureSample(make_sample(points, **kw), gt)


class TestForceMagnitude:
    def test_reference_packet_values(self):
        assert force_magnitude(71, 3) == 213

    def test_zero_pressure(self):
        assert force_magnitude(0, 5) == 0

    def test_fractional(self):
        assert force_magnitude(2.5, 4) == 10


class TestResampleConfig:
    def test_default_grid_length(self):
        assert ResampleConfig().m == 30

    def test_rejects_non_multiple_cutoff(self):
        with pytest.raises(ValueError):
            ResampleConfig(t_int=0.01, t_off=0.025)
        with pytest.raises(ValueError):
            ResampleConfig(t_int=-0.01)


class TestResampleSeries:
    def test_midpoint_interpolation(self):
        out = resample_series([(0, 0), (0.02, 2)], ResampleConfig())
        assert out[1] == 1.0

    def test_single_point_zero_fill(self):
        out = resample_series([(0, 5)], ResampleConfig())
        assert out[0] == 5
        assert np.all(out[1:] == 0)
        assert out.shape == (30,)

    def test_hand_interpolated_value(self):
        # between (0.005, 3) and (0.015, 5): 3 + 200 * 0.005 = 4
        out = resample_series([(0, 1), (0.005, 3), (0.015, 5)], ResampleConfig())
        assert out[1] == 4.0

    def test_empty_rejected(self):
        with pytest.raises(FeatureError):
            resample_series([], ResampleConfig())

    def test_non_increasing_rejected(self):
        with pytest.raises(FeatureError):
            resample_series([(0, 1), (0, 2)], ResampleConfig())

    def test_grid_aligned_idempotence(self, rng):
        cfg = ResampleConfig()
        values = rng.standard_normal(9)
        points = [(k * cfg.t_int, v) for k, v in enumerate(values)]
        out = resample_series(points, cfg)
        assert np.array_equal(out[:9], values)
        assert np.all(out[9:] == 0)

    def test_rebased_to_first_point(self):
        shifted = resample_series([(5.0, 0), (5.02, 2)], ResampleConfig())
        assert shifted[1] == pytest.approx(1.0)


class TestExtractTap:
    def test_reference_packet_through_force_model(self):
        fs = extract_tap(tap([(849, 102)], pressures=[71], majors=[3]))
        assert fs.unitary == {"x": 849.0, "y": 102.0, "dt": 0.0}
        assert fs.series["Fz"][0] == 213
        assert np.all(fs.series["Fz"][1:] == 0)

    def test_equal_force_two_readings(self):
        fs = extract_tap(
            tap([(10, 10), (10, 10)], pressures=[5, 5], majors=[2, 2], dt=0.01)
        )
        assert fs.unitary["dt"] == 0.01
        assert fs.series["Fz"][0] == 10 and fs.series["Fz"][1] == 10
        assert np.all(fs.series["Fz"][2:] == 0)

    def test_duration_past_cutoff_never_zero_filled(self):
        points = [(10, 10)] * 5
        fs = extract_tap(tap(points, pressures=[7] * 5, majors=[2] * 5, dt=0.1))
        assert fs.unitary["dt"] == pytest.approx(0.4)
        assert np.all(fs.series["Fz"] == 14)

    def test_wrong_type_rejected(self):
        with pytest.raises(FeatureError):
            extract_tap(swipe([(0, 0), (100, 0)]))


class TestExtractSwipe:
    def test_angle_along_y_axis_is_zero(self):
        fs = extract_swipe(swipe([(0, 0), (0, 5)]))
        assert fs.unitary["theta"] == 0.0

    def test_345_length(self):
        fs = extract_swipe(swipe([(0, 0), (3, 4)]))
        assert fs.unitary["l"] == 5.0

    def test_speed_series(self):
        fs = extract_swipe(swipe([(0, 0), (3, 4)], dt=0.01))
        assert fs.series["Fxy"][0] == 0.0
        assert fs.series["Fxy"][1] == pytest.approx(500.0)

    def test_endpoints(self):
        fs = extract_swipe(swipe([(100, 50), (400, 90)]))
        assert (fs.unitary["x0"], fs.unitary["y0"]) == (100.0, 50.0)
        assert (fs.unitary["x1"], fs.unitary["y1"]) == (400.0, 90.0)

    def test_equal_timestamps_rejected(self):
        gs = swipe([(0, 0), (100, 0)], dt=0.0)
        with pytest.raises(FeatureError):
            extract_swipe(gs)

    def test_needs_two_readings(self):
        with pytest.raises(FeatureError):
            extract_swipe(GestureSample(make_sample([(0, 0)]), GestureType.FORWARD))

    def test_area_mode_major_times_minor(self):
        cfg = ExtractConfig(area_mode=AREA_MAJOR_TIMES_MINOR)
        fs = extract_tap(tap([(10, 10)], pressures=[7], majors=[3], minors=[2]), cfg)
        assert fs.series["Fz"][0] == 42


class TestFeatureCatalogue:
    def test_counts_match_the_feature_list(self):
        assert feature_count(GestureType.TAP) == 4
        for gt in (GestureType.FORWARD, GestureType.BACKWARD, GestureType.DOWNWARD):
            assert feature_count(gt) == 9
        assert len(feature_ids(GESTURE_ORDER)) == 31

    def test_ids_ordering(self):
        ids = feature_ids((GestureType.TAP, GestureType.FORWARD))
        assert ids[:4] == ("T.x", "T.y", "T.Fz", "T.dt")
        assert ids[4:] == (
            "F.x0", "F.y0", "F.x1", "F.y1", "F.theta", "F.Fz", "F.Fxy", "F.dt", "F.l",
        )


@given(shift=st.floats(min_value=0, max_value=1e4, allow_nan=False))
@settings(max_examples=50)
def test_translation_in_time_changes_no_feature(shift):
    base = swipe([(100, 50), (200, 60), (400, 90)])
    moved = GestureSample(
        make_sample([(100, 50), (200, 60), (400, 90)]), GestureType.FORWARD
    )
    for reading in moved.sample.readings:
        object.__setattr__(reading, "timestamp", reading.timestamp + shift)
    a = extract_swipe(base)
    b = extract_swipe(moved)
    assert a.unitary == pytest.approx(b.unitary, rel=1e-9, abs=1e-9)
    for name in ("Fz", "Fxy"):
        np.testing.assert_allclose(a.series[name], b.series[name], rtol=1e-6, atol=1e-6)


@given(
    x0=st.integers(min_value=0, max_value=X_MAX),
    x1=st.integers(min_value=0, max_value=X_MAX),
    y0=st.integers(min_value=0, max_value=187),
    y1=st.integers(min_value=0, max_value=187),
)
@settings(max_examples=100)
def test_x_mirror_negates_theta_and_keeps_l_dt(x0, x1, y0, y1):
    direct = extract_swipe(swipe([(x0, y0), (x1, y1)]))
    mirrored = extract_swipe(swipe([(X_MAX - x0, y0), (X_MAX - x1, y1)]))
    # negation holds modulo 2*pi (theta = pi maps to itself at the branch cut)
    wrapped = math.remainder(
        mirrored.unitary["theta"] + direct.unitary["theta"], 2 * math.pi
    )
    assert wrapped == pytest.approx(0.0, abs=1e-12)
    assert mirrored.unitary["l"] == direct.unitary["l"]
    assert mirrored.unitary["dt"] == direct.unitary["dt"]


@given(
    n=st.integers(min_value=2, max_value=6),
    seed=st.integers(min_value=0, max_value=2**31),
)
@settings(max_examples=60)
def test_force_series_are_nonnegative(n, seed):
    rng = np.random.default_rng(seed)
    points = [(int(x), int(y)) for x, y in zip(
        rng.integers(0, X_MAX, n), rng.integers(0, 187, n)
    )]
    pressures = rng.integers(0, 90, n)
    majors = rng.integers(0, 6, n)
    fs = extract_swipe(swipe(points, pressures=pressures, majors=majors))
    assert np.all(fs.series["Fz"] >= 0)
    assert np.all(fs.series["Fxy"] >= 0)
    assert fs.unitary["dt"] >= 0
    assert fs.unitary["l"] >= 0
    assert -math.pi < fs.unitary["theta"] <= math.pi


def test_extract_features_dispatch():
    assert extract_features(tap([(10, 10)])).gesture_type == GestureType.TAP
    assert (
        extract_features(swipe([(0, 0), (100, 5)])).gesture_type == GestureType.FORWARD
    )


def test_feature_csv_layout(tmp_path):
    rows = [
        ("alice", extract_tap(tap([(849, 102)], pressures=[71], majors=[3]))),
        ("bob", extract_swipe(swipe([(0, 0), (300, 40)]))),
    ]
    out = tmp_path / "features.csv"
    with open(out, "w", newline="") as fh:
        write_feature_csv(fh, rows, 30)
    header, tap_row, swipe_row = out.read_text().strip().split("\n")
    columns = header.split(",")
    assert columns[:2] == ["user_id", "gesture_type"]
    assert len(columns) == 2 + 9 + 60  # dt is shared between taps and swipes
    assert tap_row.split(",")[1] == "T"
    assert tap_row.split(",")[-1] == ""  # taps have no planar-force series
    assert swipe_row.split(",")[2] == ""  # swipes have no tap-point x
