"""One-class gesture-block classifier built on a concentration bound.

For each feature, the mean of an n-sample test block is compared against
the trained mean: the block passes when the deviation stays strictly
below tau = sigma / sqrt(n * rho), where sigma comes from the training
statistics and rho bounds the probability that an in-distribution block
is rejected. The bound is distribution-free, so no shape assumption is
made about the features (several are visibly multimodal).

Scalar features use their training variance. Series features are reduced
to the per-sample sum over the m grid instants; the variance of that sum
is the grand sum of the training covariance matrix, which accounts for
the strong dependence between instants.

Per-feature verdicts are combined by a vote: the block is accepted when
at least ceil(epsilon * m_features) features pass, with epsilon = 2/3 by
default.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from glanceauth import backend
from glanceauth.errors import ConfigError, ModelError, TrainingError
from glanceauth.features import (
    ResampleConfig,
    feature_ids,
    feature_order,
    series_names,
    unitary_names,
)
from glanceauth.gestures import GestureType, combination_label, parse_combination

MODEL_VERSION = "1"

# relative tolerance for "effectively zero" negative variances produced by
# rounding in the covariance grand sum
_VAR_TOL = 1e-9


class ConstantFeatureWarning(UserWarning):
    """A training feature has zero variance; its threshold is 0 and the
    feature will reject almost everything."""


@dataclass(frozen=True)
class UnitaryStat:
    """Training mean and unbiased variance of a scalar feature."""

    mean: float
    var: float
    count: int

    def __post_init__(self):
        if not self.var >= 0:
            raise ModelError(f"negative variance {self.var!r}")
        if self.count < 2:
            raise ModelError("a sample variance needs at least 2 points")


@dataclass
class SeriesStat:
    """Per-instant training means and full unbiased covariance of a series."""

    means: np.ndarray
    cov: np.ndarray
    count: int

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=np.float64)
        self.cov = np.asarray(self.cov, dtype=np.float64)
        m = self.means.shape[0]
        if self.cov.shape != (m, m):
            raise ModelError(f"covariance shape {self.cov.shape} does not match m={m}")
        if self.count < 2:
            raise ModelError("a sample covariance needs at least 2 points")
        if not np.array_equal(self.cov, self.cov.T):
            raise ModelError("covariance matrix is not symmetric")
        if np.any(np.diag(self.cov) < 0):
            raise ModelError("negative variance on the covariance diagonal")

    @property
    def sum_var(self):
        """Variance of the per-sample sum: the grand sum of the covariance."""
        total = float(self.cov.sum())
        if total < 0:
            scale = max(1.0, float(np.abs(self.cov).sum()))
            if total < -_VAR_TOL * scale:
                raise ModelError(f"summed series variance is negative: {total!r}")
            total = 0.0
        return total

    @property
    def sum_mean(self):
        return float(self.means.sum())


@dataclass
class GestureModel:
    unitary: dict
    series: dict


@dataclass
class UserModel:
    """Per-user training statistics, one GestureModel per trained type."""

    user_id: str
    resample: ResampleConfig
    gestures: dict
    version: str = MODEL_VERSION


@dataclass(frozen=True)
class DecisionConfig:
    """Block-decision parameters: bound rho, vote threshold epsilon, block size n.

    rho is a probability bound and may exceed 1.
    """

    rho: float
    n: int
    epsilon: float = 2.0 / 3.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigError("rho must be positive")
        if not 0 < self.epsilon <= 1:
            raise ConfigError("epsilon must be in (0, 1]")
        if self.n < 1:
            raise ConfigError("block size n must be at least 1")


@dataclass
class BlockDecision:
    accept: bool
    votes: int
    boundary: int
    feature_ids: tuple
    bits: np.ndarray


def fit_unitary(values):
    """Mean and unbiased variance of a scalar feature's training values."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] < 2:
        raise TrainingError("fitting a scalar feature needs at least 2 values")
    mean = float(values.mean())
    centered = values - mean
    var = float(centered @ centered) / (values.shape[0] - 1)
    return UnitaryStat(mean=mean, var=var, count=values.shape[0])


def fit_series(rows):
    """Per-instant means and unbiased covariance of stacked series samples."""
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise TrainingError("fitting a series feature needs at least 2 samples")
    means, cov = backend.moments(rows)
    return SeriesStat(means=means, cov=cov, count=rows.shape[0])


def chebyshev_threshold(stat_var, n, rho):
    """Deviation threshold tau = sigma / sqrt(n * rho)."""
    if not stat_var >= 0:
        raise ModelError(f"negative variance {stat_var!r}")
    return math.sqrt(stat_var) / math.sqrt(n * rho)


def f_unitary(stat, test, rho):
    """Per-feature decision on a scalar block: 1 to accept, 0 to reject.

    Accepts when |mean(test) - mean| < tau, strictly; equality rejects.
    """
    test = np.asarray(test, dtype=np.float64)
    if test.size == 0:
        raise ConfigError("empty test block")
    deviation = abs(float(test.mean()) - stat.mean)
    return 1 if deviation < chebyshev_threshold(stat.var, test.size, rho) else 0


def f_series(stat, test, rho):
    """Per-feature decision on a series block of shape (n, m).

    Each test vector reduces to its sum over the m instants; the block is
    accepted when the mean of these sums deviates from the trained sum
    mean by strictly less than tau derived from the covariance grand sum.
    """
    test = np.asarray(test, dtype=np.float64)
    if test.ndim != 2 or test.shape[0] == 0:
        raise ConfigError("series test block must be a non-empty (n, m) array")
    if test.shape[1] != stat.means.shape[0]:
        raise ConfigError(
            f"series length {test.shape[1]} does not match model m={stat.means.shape[0]}"
        )
    sums = test.sum(axis=1)
    deviation = abs(float(sums.mean()) - stat.sum_mean)
    return 1 if deviation < chebyshev_threshold(stat.sum_var, test.shape[0], rho) else 0


def decision_boundary(m_features, epsilon=2.0 / 3.0):
    """Minimum number of per-feature accepts for an overall accept."""
    if m_features < 1:
        raise ConfigError("need at least one feature")
    return math.ceil(epsilon * m_features)


def g_vote(bits, epsilon=2.0 / 3.0):
    """Overall vote: 1 iff at least ceil(epsilon * m) feature bits are set."""
    bits = np.asarray(bits)
    return 1 if int(bits.sum()) >= decision_boundary(bits.size, epsilon) else 0


def train_user_model(features_by_type, resample=None, user_id=""):
    """Fit a UserModel from per-type lists of FeatureSets.

    Every included type needs at least 2 samples. Emits
    ConstantFeatureWarning when a training feature has zero variance.
    """
    resample = resample or ResampleConfig()
    gestures = {}
    for gt, feature_sets in features_by_type.items():
        gt = GestureType(gt)
        if len(feature_sets) < 2:
            raise TrainingError(
                f"gesture type {gt.value} has {len(feature_sets)} training samples; need >= 2"
            )
        unitary = {}
        for name in unitary_names(gt):
            try:
                values = [fs.unitary[name] for fs in feature_sets]
            except KeyError:
                raise TrainingError(f"sample lacks unitary feature {gt.value}.{name}") from None
            unitary[name] = fit_unitary(values)
            if unitary[name].var == 0:
                warnings.warn(
                    f"training feature {gt.value}.{name} is constant",
                    ConstantFeatureWarning,
                    stacklevel=2,
                )
        series = {}
        for name in series_names(gt):
            try:
                rows = np.asarray([fs.series[name] for fs in feature_sets], dtype=np.float64)
            except KeyError:
                raise TrainingError(f"sample lacks series feature {gt.value}.{name}") from None
            if rows.shape[1] != resample.m:
                raise TrainingError(
                    f"series {gt.value}.{name} has length {rows.shape[1]}, expected {resample.m}"
                )
            series[name] = fit_series(rows)
            if series[name].sum_var == 0:
                warnings.warn(
                    f"training feature {gt.value}.{name} is constant",
                    ConstantFeatureWarning,
                    stacklevel=2,
                )
        gestures[gt] = GestureModel(unitary=unitary, series=series)
    if not gestures:
        raise TrainingError("no gesture types to train on")
    return UserModel(user_id=user_id, resample=resample, gestures=gestures)


def block_feature_stats(model, block, combination):
    """Deviations and sigmas for every feature of a block, in canonical order.

    Returns (feature_ids, deviations, sigmas) where deviations[i] is the
    absolute gap between the block mean and the trained mean and sigmas[i]
    the trained standard deviation, with series features reduced to their
    per-sample sums. The per-feature decision at any rho is then
    deviation < sigma / sqrt(n * rho).
    """
    combination = parse_combination(combination)
    ids = feature_ids(combination)
    deviations = np.empty(len(ids), dtype=np.float64)
    sigmas = np.empty(len(ids), dtype=np.float64)
    n = None
    pos = 0
    for gt in combination:
        gesture_model = model.gestures.get(gt)
        if gesture_model is None:
            raise ModelError(f"model has no statistics for gesture type {gt.value}")
        feature_sets = block.get(gt)
        if not feature_sets:
            raise ConfigError(f"block has no samples for gesture type {gt.value}")
        if n is None:
            n = len(feature_sets)
        elif len(feature_sets) != n:
            raise ConfigError(
                f"block sizes differ across gesture types ({len(feature_sets)} vs {n})"
            )
        for name in feature_order(gt):
            if name in gesture_model.unitary:
                stat = gesture_model.unitary[name]
                values = np.asarray(
                    [fs.unitary[name] for fs in feature_sets], dtype=np.float64
                )
                deviations[pos] = abs(float(values.mean()) - stat.mean)
                sigmas[pos] = math.sqrt(stat.var)
            else:
                stat = gesture_model.series[name]
                rows = np.asarray(
                    [fs.series[name] for fs in feature_sets], dtype=np.float64
                )
                if rows.shape[1] != stat.means.shape[0]:
                    raise ConfigError(
                        f"series {gt.value}.{name} has length {rows.shape[1]}, "
                        f"expected {stat.means.shape[0]}"
                    )
                deviations[pos] = abs(float(rows.sum(axis=1).mean()) - stat.sum_mean)
                sigmas[pos] = math.sqrt(stat.sum_var)
            pos += 1
    return ids, deviations, sigmas


def classify_block(model, block, combination, cfg):
    """Full block decision: per-feature bits plus the overall vote.

    The block maps each gesture type of the combination to exactly cfg.n
    FeatureSets.
    """
    combination = parse_combination(combination)
    for gt in combination:
        feature_sets = block.get(gt)
        if feature_sets is None or len(feature_sets) != cfg.n:
            got = 0 if feature_sets is None else len(feature_sets)
            raise ConfigError(
                f"gesture type {gt.value} has {got} samples in the block, expected n={cfg.n}"
            )
    ids, deviations, sigmas = block_feature_stats(model, block, combination)
    bits = backend.sweep_bits(
        deviations, sigmas, float(cfg.n), np.asarray([cfg.rho], dtype=np.float64)
    )[0]
    votes = int(bits.sum())
    boundary = decision_boundary(len(ids), cfg.epsilon)
    return BlockDecision(
        accept=votes >= boundary,
        votes=votes,
        boundary=boundary,
        feature_ids=ids,
        bits=bits,
    )


# Bundled rho calibration: intervals (in hundredths) bracketing the
# equal-error operating point per (combination, block size), measured on
# two reference cohorts, U1 (10 users) and U2 (20 users). lookup_rho
# returns the interval midpoint.
RHO_CALIBRATION = {
    ("T", 1): {"U1": (45, 50), "U2": (50, 55)},
    ("T", 3): {"U1": (30, 35), "U2": (30, 35)},
    ("T", 5): {"U1": (20, 25), "U2": (25, 30)},
    ("T", 7): {"U1": (15, 20), "U2": (20, 25)},
    ("T", 10): {"U1": (15, 20), "U2": (15, 20)},
    ("T", 15): {"U1": (10, 15)},
    ("T", 25): {"U1": (10, 15)},
    ("F", 1): {"U1": (75, 80), "U2": (80, 85)},
    ("F", 3): {"U1": (50, 55), "U2": (50, 55)},
    ("F", 5): {"U1": (35, 40), "U2": (40, 45)},
    ("F", 7): {"U1": (35, 40), "U2": (35, 40)},
    ("F", 10): {"U1": (30, 35), "U2": (30, 35)},
    ("F", 15): {"U1": (25, 30)},
    ("F", 25): {"U1": (15, 20)},
    ("B", 1): {"U1": (70, 75), "U2": (80, 85)},
    ("B", 3): {"U1": (40, 45), "U2": (45, 50)},
    ("B", 5): {"U1": (30, 35), "U2": (35, 40)},
    ("B", 7): {"U1": (25, 30), "U2": (30, 35)},
    ("B", 10): {"U1": (20, 25), "U2": (25, 30)},
    ("D", 1): {"U1": (50, 55), "U2": (45, 50)},
    ("D", 3): {"U1": (30, 35), "U2": (30, 35)},
    ("D", 5): {"U1": (20, 25), "U2": (20, 25)},
    ("D", 7): {"U1": (15, 20), "U2": (15, 20)},
    ("D", 10): {"U1": (15, 20), "U2": (15, 20)},
    ("TF", 1): {"U1": (80, 85), "U2": (80, 85)},
    ("TF", 3): {"U1": (50, 55), "U2": (50, 55)},
    ("TF", 5): {"U1": (40, 45), "U2": (45, 50)},
    ("TF", 7): {"U1": (35, 40), "U2": (35, 40)},
    ("TF", 10): {"U1": (25, 30), "U2": (30, 35)},
    ("TF", 15): {"U1": (20, 25)},
    ("TF", 25): {"U1": (15, 20)},
    ("TFB", 1): {"U1": (80, 85), "U2": (85, 90)},
    ("TFB", 3): {"U1": (50, 55), "U2": (55, 60)},
    ("TFB", 5): {"U1": (40, 45), "U2": (45, 50)},
    ("TFB", 7): {"U1": (35, 40), "U2": (35, 40)},
    ("TFB", 10): {"U1": (30, 35), "U2": (35, 40)},
    ("TFBD", 1): {"U1": (75, 80), "U2": (80, 85)},
    ("TFBD", 3): {"U1": (50, 55), "U2": (50, 55)},
    ("TFBD", 5): {"U1": (40, 45), "U2": (40, 45)},
    ("TFBD", 7): {"U1": (30, 35), "U2": (35, 40)},
    ("TFBD", 10): {"U1": (25, 30), "U2": (30, 35)},
}


def lookup_rho(combination, n, cohort="U1"):
    """Calibrated rho for a (combination, block size) pair: the interval midpoint.

    Raises ConfigError when the pair has no calibration, in which case the
    caller must supply rho explicitly.
    """
    label = combination_label(combination)
    try:
        lo, hi = RHO_CALIBRATION[(label, n)][cohort]
    except KeyError:
        raise ConfigError(
            f"no calibrated rho for combination {label} at n={n} "
            f"(cohort {cohort}); pass rho explicitly"
        ) from None
    return (lo + hi) / 200.0
