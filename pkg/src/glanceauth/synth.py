"""Synthetic gesture-feature datasets with analytically known statistics.

Each synthetic user draws scalar features from per-user Gaussians and
series features from a smooth amplitude-scaled bump plus correlated
noise, so the first two moments of everything are known in closed form
and expected classifier behaviour can be predicted (and asserted)
analytically. All generator parameters, including the realised per-user
profiles, are recorded on the returned dataset.

Two profile layouts:

* spread (clusters=0): per-user means sit at base + separation * sigma * z
  with z drawn once per (user, feature); separation 1.0 gives cohorts
  whose members are tellable apart at moderate block sizes.
* clusters=k: users share k deterministic profiles spaced exactly
  separation * sigma apart, useful for worst/best-case experiments.

separation=0 makes all users identically distributed in either layout.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from glanceauth.features import FeatureSet, ResampleConfig, series_names, unitary_names
from glanceauth.gestures import GESTURE_ORDER

# per-feature (base, sigma) on touchpad-like scales; the classifier only
# cares about separation measured in sigmas
UNITARY_BASELINES = {
    "T": {"x": (683.0, 120.0), "y": (94.0, 24.0), "dt": (0.50, 0.05)},
    "F": {
        "x0": (320.0, 90.0),
        "y0": (92.0, 24.0),
        "x1": (980.0, 100.0),
        "y1": (96.0, 24.0),
        "theta": (1.42, 0.12),
        "dt": (0.60, 0.06),
        "l": (660.0, 120.0),
    },
    "B": {
        "x0": (1010.0, 100.0),
        "y0": (95.0, 24.0),
        "x1": (350.0, 90.0),
        "y1": (90.0, 24.0),
        "theta": (-1.42, 0.12),
        "dt": (0.62, 0.06),
        "l": (650.0, 115.0),
    },
    "D": {
        "x0": (680.0, 110.0),
        "y0": (150.0, 18.0),
        "x1": (655.0, 110.0),
        "y1": (42.0, 16.0),
        "theta": (2.9, 0.12),
        "dt": (0.55, 0.05),
        "l": (112.0, 26.0),
    },
}

# series amplitude (base, sigma); the bump integrates them over the grid
SERIES_AMPLITUDES = {"Fz": (220.0, 45.0), "Fxy": (2600.0, 520.0)}

# fraction of the grid covered by the synthetic gesture; later entries stay 0
ACTIVE_FRACTION = 2.0 / 3.0

# white-noise scale relative to the amplitude component of the sum variance
WHITE_NOISE_FRACTION = 0.1

_BIMODAL_SHIFT = 0.8  # mixture offset in sigmas; total variance stays sigma^2


@dataclass(frozen=True)
class SynthConfig:
    users: int = 10
    samples_per_type: int = 70
    seed: int = 0
    separation: float = 1.0
    clusters: int = 0
    bimodal: bool = False
    days: tuple = None
    samples_per_day: int = 34
    drift: float = 0.0

    def __post_init__(self):
        if self.users < 1:
            raise ValueError("need at least one user")
        if self.clusters < 0:
            raise ValueError("clusters must be >= 0")
        if self.days is not None and len(self.days) == 0:
            raise ValueError("days must be a non-empty sequence or None")


def _bump(m):
    active = max(1, int(round(m * ACTIVE_FRACTION)))
    shape = np.zeros(m, dtype=np.float64)
    j = np.arange(active)
    shape[:active] = np.sin(math.pi * (j + 0.5) / active) ** 2
    return shape, active


def _profile_offset(rng, cfg, user_index):
    """One standard-normal coordinate per profile entry, or the cluster index."""
    if cfg.clusters > 0:
        return float(user_index % cfg.clusters)
    return float(rng.standard_normal())


def synth_generate(cfg, resample=None):
    """Build a Dataset of synthetic users; byte-identical for a fixed config."""
    from glanceauth.evaluate import Dataset  # deferred to avoid an import cycle

    resample = resample or ResampleConfig()
    m = resample.m
    shape, active = _bump(m)
    shape_sum = float(shape.sum())
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xD5)))

    days = tuple(int(d) for d in cfg.days) if cfg.days is not None else (None,)
    per_day = cfg.samples_per_day if cfg.days is not None else cfg.samples_per_type

    profiles = {}
    users = {}
    for u in range(cfg.users):
        uid = f"u{u:03d}"
        profile = {"unitary": {}, "series_amp": {}, "drift": {}}
        for gt in GESTURE_ORDER:
            letter = gt.value
            profile["unitary"][letter] = {}
            profile["drift"][letter] = {}
            for name in unitary_names(gt):
                base, sigma = UNITARY_BASELINES[letter][name]
                offset = _profile_offset(rng, cfg, u)
                profile["unitary"][letter][name] = base + cfg.separation * sigma * offset
                profile["drift"][letter][name] = (
                    float(rng.standard_normal()) if cfg.days is not None else 0.0
                )
            profile["series_amp"][letter] = {}
            for name in series_names(gt):
                base, sigma = SERIES_AMPLITUDES[name]
                offset = _profile_offset(rng, cfg, u)
                profile["series_amp"][letter][name] = {
                    "amp": base + cfg.separation * sigma * offset,
                    "drift": float(rng.standard_normal()) if cfg.days is not None else 0.0,
                }
        profiles[uid] = profile

        by_type = {}
        for gt in GESTURE_ORDER:
            letter = gt.value
            feature_sets = []
            for day_index, day in enumerate(days):
                for _ in range(per_day):
                    unitary = {}
                    for name in unitary_names(gt):
                        _, sigma = UNITARY_BASELINES[letter][name]
                        mean = profile["unitary"][letter][name]
                        mean += cfg.drift * sigma * day_index * profile["drift"][letter][name]
                        if cfg.bimodal:
                            component = 1.0 if rng.random() < 0.5 else -1.0
                            value = (
                                mean
                                + component * _BIMODAL_SHIFT * sigma
                                + rng.standard_normal()
                                * sigma
                                * math.sqrt(1.0 - _BIMODAL_SHIFT**2)
                            )
                        else:
                            value = mean + rng.standard_normal() * sigma
                        unitary[name] = float(value)
                    series = {}
                    for name in series_names(gt):
                        _, amp_sigma = SERIES_AMPLITUDES[name]
                        entry = profile["series_amp"][letter][name]
                        amp = entry["amp"]
                        amp += cfg.drift * amp_sigma * day_index * entry["drift"]
                        sample_amp = amp + rng.standard_normal() * amp_sigma
                        white_sigma = (
                            WHITE_NOISE_FRACTION
                            * amp_sigma
                            * shape_sum
                            / math.sqrt(active)
                        )
                        values = sample_amp * shape
                        values[:active] += rng.standard_normal(active) * white_sigma
                        series[name] = values
                    feature_sets.append(
                        FeatureSet(gesture_type=gt, unitary=unitary, series=series, day=day)
                    )
            by_type[gt] = feature_sets
        users[uid] = by_type

    params = {"config": _config_doc(cfg), "profiles": profiles, "shape_sum": shape_sum}
    return Dataset(users=users, resample=resample, synth_params=params)


def _config_doc(cfg):
    doc = asdict(cfg)
    if doc["days"] is not None:
        doc["days"] = list(doc["days"])
    return doc


def series_sum_sigma(name, shape_sum=None, m=30):
    """Closed-form standard deviation of a synthetic series' per-sample sum."""
    if shape_sum is None:
        shape_sum = float(_bump(m)[0].sum())
    _, amp_sigma = SERIES_AMPLITUDES[name]
    return amp_sigma * shape_sum * math.sqrt(1.0 + WHITE_NOISE_FRACTION**2)
