"""Randomized evaluation protocol: acceptance trials, ROC sweeps, EER/AER,
per-feature frequencies, and the behavioural-evolution scenarios.

Every trial draws a fresh target user, a fresh random training set, and a
fresh test block, then retrains and classifies. Trials are independent
and deterministically seeded (one RNG stream per trial index), so results
are identical across thread counts and reruns.

A ROC sweep shares its random draws across the whole rho grid: each trial
is trained once and its per-feature deviations are thresholded at every
rho, which makes per-trial acceptance exactly monotone as rho decreases.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from glanceauth import backend
from glanceauth.chebyshev import (
    block_feature_stats,
    decision_boundary,
    lookup_rho,
    train_user_model,
)
from glanceauth.errors import ConfigError
from glanceauth.features import ResampleConfig, feature_ids
from glanceauth.gestures import GestureType, combination_label, parse_combination

logger = logging.getLogger("glanceauth.evaluate")

# rho grid for ROC sweeps: 1.00 down to 0.10 in steps of 0.05
RHO_SWEEP = tuple(round(k * 0.05, 2) for k in range(20, 1, -1))

DEFAULT_TRAINING_SIZES = {
    GestureType.TAP: 50,
    GestureType.FORWARD: 50,
    GestureType.BACKWARD: 25,
    GestureType.DOWNWARD: 10,
}

SCENARIOS = ("same_day", "first_day", "adaptive")

_STREAM_TPR = 1
_STREAM_FPR = 2
_STREAM_EVO_TPR = 3
_STREAM_EVO_FPR = 4


@dataclass
class Dataset:
    """Per-user, per-gesture-type feature sets, plus the resample grid used."""

    users: dict
    resample: ResampleConfig = field(default_factory=ResampleConfig)
    synth_params: dict = None

    def user_ids(self):
        return sorted(self.users)

    def restrict_users(self, k):
        """Keep the first k users in sorted-id order."""
        ids = self.user_ids()
        if not 1 <= k <= len(ids):
            raise ConfigError(f"cannot restrict {len(ids)} users to {k}")
        keep = set(ids[:k])
        return Dataset(
            users={u: t for u, t in self.users.items() if u in keep},
            resample=self.resample,
            synth_params=self.synth_params,
        )

    def day_labels(self):
        """Sorted day labels; raises when any sample is unlabelled."""
        days = set()
        for by_type in self.users.values():
            for feature_sets in by_type.values():
                for fs in feature_sets:
                    if fs.day is None:
                        raise ConfigError("dataset has samples without a day label")
                    days.add(int(fs.day))
        if not days:
            raise ConfigError("dataset is empty")
        return sorted(days)


def _normalized_training_sizes(sizes):
    out = dict(DEFAULT_TRAINING_SIZES)
    if sizes:
        for key, value in sizes.items():
            out[GestureType(key)] = int(value)
    return out


@dataclass
class TrialConfig:
    """Parameters of a randomized trial run.

    rho=None (or the string "lookup") resolves to the bundled calibration
    for (combination, n).
    """

    n: int
    combination: tuple
    seed: int
    trials: int = 500
    training_sizes: dict = None
    rho: float = None
    epsilon: float = 2.0 / 3.0
    threads: int = None

    def __post_init__(self):
        self.combination = parse_combination(self.combination)
        self.training_sizes = _normalized_training_sizes(self.training_sizes)
        if self.rho == "lookup":
            self.rho = None
        if self.trials < 1:
            raise ConfigError("need at least one trial")
        if self.n < 1:
            raise ConfigError("block size n must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        for gt in self.combination:
            if self.training_sizes[gt] < 2:
                raise ConfigError(
                    f"training size for {gt.value} must be >= 2, got {self.training_sizes[gt]}"
                )

    def resolved_rho(self):
        if self.rho is not None:
            return float(self.rho)
        return lookup_rho(self.combination, self.n)


@dataclass
class TrialOutcome:
    """Acceptance rate and per-feature acceptance counts of one trial run."""

    rate: float
    accepted: int
    trials: int
    feature_counts: dict


@dataclass
class RocPoint:
    rho: float
    fpr: float
    tpr: float


@dataclass(frozen=True)
class EerResult:
    value: float
    extrapolated: bool


@dataclass
class TrialReport:
    """Evaluation output: rates, ROC points, EER/AER, feature frequencies."""

    kind: str
    combination: str
    n: int
    trials: int
    seed: int
    epsilon: float
    rho: float
    training_sizes: dict
    tpr: float
    fpr: float
    aer: float
    eer: float
    eer_extrapolated: bool
    roc: list
    feature_frequencies: dict

    def to_doc(self):
        return {
            "kind": self.kind,
            "combination": self.combination,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "rho": self.rho,
            "training_sizes": {gt.value: s for gt, s in self.training_sizes.items()},
            "tpr": self.tpr,
            "fpr": self.fpr,
            "aer": self.aer,
            "eer": self.eer,
            "eer_extrapolated": self.eer_extrapolated,
            "roc": [{"rho": p.rho, "fpr": p.fpr, "tpr": p.tpr} for p in self.roc],
            "feature_frequencies": self.feature_frequencies,
        }


def _rng(seed, *path):
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(path)))


def _map_trials(fn, trials, threads):
    workers = threads if threads is not None else (os.cpu_count() or 1)
    if workers <= 1:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


def validate_capacity(dataset, cfg):
    """Every user needs training_size + n samples per included gesture type."""
    offenders = []
    for uid in dataset.user_ids():
        for gt in cfg.combination:
            have = len(dataset.users[uid].get(gt, ()))
            need = cfg.training_sizes[gt] + cfg.n
            if have < need:
                offenders.append(
                    f"user {uid}: {have} {gt.value} samples, needs >= {need}"
                )
    if offenders:
        raise ConfigError(
            "insufficient samples for n-block evaluation: " + "; ".join(offenders)
        )


def _draw_training(rng, dataset, user, cfg):
    """Random training subset per gesture type; returns (training, held_out_indices)."""
    training = {}
    held = {}
    for gt in cfg.combination:
        samples = dataset.users[user][gt]
        size = cfg.training_sizes[gt]
        perm = rng.permutation(len(samples))
        training[gt] = [samples[int(i)] for i in perm[:size]]
        held[gt] = perm[size:]
    return training, held


def _block_from_indices(rng, dataset, user, index_pools, n):
    block = {}
    for gt, pool in index_pools.items():
        chosen = rng.choice(pool, size=n, replace=False)
        samples = dataset.users[user][gt]
        block[gt] = [samples[int(i)] for i in chosen]
    return block


def _block_from_all(rng, dataset, user, combination, n):
    block = {}
    for gt in combination:
        samples = dataset.users[user][gt]
        chosen = rng.choice(len(samples), size=n, replace=False)
        block[gt] = [samples[int(i)] for i in chosen]
    return block


def _decide(model, block, cfg, rhos):
    """Per-rho accept bit and per-feature bits for one trained trial."""
    ids, devs, sigmas = block_feature_stats(model, block, cfg.combination)
    bits = backend.sweep_bits(devs, sigmas, float(cfg.n), rhos)
    boundary = decision_boundary(len(ids), cfg.epsilon)
    accepts = (bits.sum(axis=1, dtype=np.int64) >= boundary).astype(np.uint8)
    return accepts, bits


def _grid_trials(dataset, cfg, rhos, kind):
    user_ids = dataset.user_ids()
    if kind == "fpr" and len(user_ids) < 2:
        raise ConfigError("impostor trials need at least 2 users")
    validate_capacity(dataset, cfg)
    rhos = np.ascontiguousarray(rhos, dtype=np.float64)
    stream = _STREAM_TPR if kind == "tpr" else _STREAM_FPR

    def one_trial(trial):
        rng = _rng(cfg.seed, stream, trial)
        target = user_ids[int(rng.integers(len(user_ids)))]
        training, held = _draw_training(rng, dataset, target, cfg)
        model = train_user_model(training, dataset.resample, user_id=target)
        if kind == "tpr":
            block = _block_from_indices(rng, dataset, target, held, cfg.n)
        else:
            others = [u for u in user_ids if u != target]
            attacker = others[int(rng.integers(len(others)))]
            block = _block_from_all(rng, dataset, attacker, cfg.combination, cfg.n)
        return _decide(model, block, cfg, rhos)

    results = _map_trials(one_trial, cfg.trials, cfg.threads)
    accept_counts = np.zeros(len(rhos), dtype=np.int64)
    feature_counts = np.zeros((len(rhos), len(feature_ids(cfg.combination))), dtype=np.int64)
    for accepts, bits in results:
        accept_counts += accepts
        feature_counts += bits
    return accept_counts, feature_counts


def _outcome(accept_counts, feature_counts, cfg):
    ids = feature_ids(cfg.combination)
    return TrialOutcome(
        rate=int(accept_counts[0]) / cfg.trials,
        accepted=int(accept_counts[0]),
        trials=cfg.trials,
        feature_counts={fid: int(c) for fid, c in zip(ids, feature_counts[0])},
    )


def run_tpr_trials(dataset, cfg):
    """Legitimate-user acceptance rate at the configured rho."""
    rho = cfg.resolved_rho()
    accept_counts, feature_counts = _grid_trials(dataset, cfg, [rho], "tpr")
    return _outcome(accept_counts, feature_counts, cfg)


def run_fpr_trials(dataset, cfg):
    """Impostor acceptance rate at the configured rho."""
    rho = cfg.resolved_rho()
    accept_counts, feature_counts = _grid_trials(dataset, cfg, [rho], "fpr")
    return _outcome(accept_counts, feature_counts, cfg)


def compute_aer(tpr, fpr):
    """Average error rate, (1 - tpr + fpr) / 2."""
    return 0.5 * (1.0 - tpr + fpr)


def compute_eer(points):
    """Equal error rate of an ROC polyline.

    Points are (fpr, tpr) pairs. The polyline, sorted by fpr, is
    intersected with tpr = 1 - fpr by linear interpolation between the
    bracketing points. When no bracket exists the result is flagged
    extrapolated and equals the average error rate at the point closest
    to the crossing.
    """
    pts = sorted((float(f), float(t)) for f, t in points)
    if not pts:
        raise ConfigError("compute_eer needs at least one ROC point")
    gaps = [1.0 - t - f for f, t in pts]
    for i in range(len(pts) - 1):
        d0, d1 = gaps[i], gaps[i + 1]
        if d0 == 0.0:
            return EerResult(pts[i][0], False)
        if d1 == 0.0:
            return EerResult(pts[i + 1][0], False)
        if (d0 > 0.0) != (d1 > 0.0):
            s = d0 / (d0 - d1)
            return EerResult(pts[i][0] + s * (pts[i + 1][0] - pts[i][0]), False)
    best = min(range(len(pts)), key=lambda i: abs(gaps[i]))
    f, t = pts[best]
    return EerResult(compute_aer(t, f), True)


def run_report(dataset, cfg):
    """Full report at a single rho: rates, AER, feature frequencies."""
    rho = cfg.resolved_rho()
    tpr_counts, tpr_features = _grid_trials(dataset, cfg, [rho], "tpr")
    fpr_counts, fpr_features = _grid_trials(dataset, cfg, [rho], "fpr")
    tpr = int(tpr_counts[0]) / cfg.trials
    fpr = int(fpr_counts[0]) / cfg.trials
    eer = compute_eer([(fpr, tpr)])
    ids = feature_ids(cfg.combination)
    return TrialReport(
        kind="evaluate",
        combination=combination_label(cfg.combination),
        n=cfg.n,
        trials=cfg.trials,
        seed=cfg.seed,
        epsilon=cfg.epsilon,
        rho=rho,
        training_sizes=cfg.training_sizes,
        tpr=tpr,
        fpr=fpr,
        aer=compute_aer(tpr, fpr),
        eer=eer.value,
        eer_extrapolated=eer.extrapolated,
        roc=[RocPoint(rho=rho, fpr=fpr, tpr=tpr)],
        feature_frequencies={
            fid: {"tp": int(tp), "fp": int(fp)}
            for fid, tp, fp in zip(ids, tpr_features[0], fpr_features[0])
        },
    )


def roc_sweep(dataset, cfg, rhos=RHO_SWEEP):
    """Sweep the rho grid and interpolate the EER.

    Each trial is trained once and evaluated at every rho (a shared random
    source), so per-trial acceptance is exactly monotone along the grid.
    The reported rates and feature frequencies are taken at the grid point
    closest to the EER crossing.
    """
    rhos = [float(r) for r in rhos]
    if len(rhos) < 2:
        raise ConfigError("a sweep needs at least 2 rho values")
    tpr_counts, tpr_features = _grid_trials(dataset, cfg, rhos, "tpr")
    fpr_counts, fpr_features = _grid_trials(dataset, cfg, rhos, "fpr")
    tprs = tpr_counts / cfg.trials
    fprs = fpr_counts / cfg.trials
    roc = [
        RocPoint(rho=r, fpr=float(f), tpr=float(t))
        for r, f, t in zip(rhos, fprs, tprs)
    ]
    eer = compute_eer([(p.fpr, p.tpr) for p in roc])
    nearest = min(range(len(rhos)), key=lambda i: abs(1.0 - tprs[i] - fprs[i]))
    ids = feature_ids(cfg.combination)
    return TrialReport(
        kind="sweep",
        combination=combination_label(cfg.combination),
        n=cfg.n,
        trials=cfg.trials,
        seed=cfg.seed,
        epsilon=cfg.epsilon,
        rho=rhos[nearest],
        training_sizes=cfg.training_sizes,
        tpr=float(tprs[nearest]),
        fpr=float(fprs[nearest]),
        aer=compute_aer(float(tprs[nearest]), float(fprs[nearest])),
        eer=eer.value,
        eer_extrapolated=eer.extrapolated,
        roc=roc,
        feature_frequencies={
            fid: {"tp": int(tp), "fp": int(fp)}
            for fid, tp, fp in zip(ids, tpr_features[nearest], fpr_features[nearest])
        },
    )


@dataclass
class EvolutionConfig:
    """Behavioural-evolution run: scenario plus the usual trial parameters."""

    scenario: str
    n: int
    combination: tuple
    seed: int
    trials: int = 500
    training_size: int = 20
    replace_per_day: int = 4
    rho: float = None
    epsilon: float = 2.0 / 3.0
    threads: int = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}, expected one of {SCENARIOS}"
            )
        self.combination = parse_combination(self.combination)
        if self.rho == "lookup":
            self.rho = None
        if self.trials < 1 or self.n < 1:
            raise ConfigError("trials and n must be at least 1")
        if self.training_size < 2:
            raise ConfigError("training size must be >= 2")
        if self.replace_per_day < 1:
            raise ConfigError("replace_per_day must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")

    def resolved_rho(self):
        if self.rho is not None:
            return float(self.rho)
        return lookup_rho(self.combination, self.n)


@dataclass
class DayResult:
    day: int
    trials: int
    tpr: float
    fpr: float
    aer: float
    provenance: dict


@dataclass
class EvolutionReport:
    scenario: str
    combination: str
    n: int
    trials: int
    seed: int
    rho: float
    epsilon: float
    training_size: int
    replace_per_day: int
    days: list

    def to_doc(self):
        return {
            "kind": "evolve",
            "scenario": self.scenario,
            "combination": self.combination,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "rho": self.rho,
            "epsilon": self.epsilon,
            "training_size": self.training_size,
            "replace_per_day": self.replace_per_day,
            "days": [
                {
                    "day": d.day,
                    "trials": d.trials,
                    "tpr": d.tpr,
                    "fpr": d.fpr,
                    "aer": d.aer,
                    "provenance": {str(k): v for k, v in sorted(d.provenance.items())},
                }
                for d in self.days
            ],
        }


def training_provenance(days, day_index, scenario, training_size, replace_per_day):
    """Training-set composition {source_day: count} when testing days[day_index].

    The adaptive schedule swaps replace_per_day of the original first-day
    samples for fresh samples of each newly observed day, cumulatively:
    with size 20 and replacement 4 the third day trains on 12 first-day,
    4 second-day, and 4 third-day samples.
    """
    if scenario == "same_day":
        return {days[day_index]: training_size}
    if scenario == "first_day":
        return {days[0]: training_size}
    base = training_size - replace_per_day * day_index
    if base < 0:
        raise ConfigError(
            f"adaptive schedule exhausts the training set on day index {day_index}: "
            f"{training_size} - {replace_per_day} * {day_index} < 0"
        )
    composition = {} if base == 0 else {days[0]: base}
    for j in range(1, day_index + 1):
        composition[days[j]] = replace_per_day
    return composition


def _day_index_pools(dataset, combination):
    """pools[user][gesture_type][day] -> array of sample indices."""
    pools = {}
    for uid, by_type in dataset.users.items():
        pools[uid] = {}
        for gt in combination:
            per_day = {}
            for i, fs in enumerate(by_type.get(gt, ())):
                per_day.setdefault(int(fs.day), []).append(i)
            pools[uid][gt] = {d: np.asarray(ix) for d, ix in per_day.items()}
    return pools


def run_evolution(dataset, cfg):
    """Per-day error rates under one permanence scenario.

    Each trial picks a random target (and, for impostor trials, a random
    attacker), draws the scenario's training composition at random,
    retrains, and classifies a block of the test day's held-out samples.
    """
    days = dataset.day_labels()
    user_ids = dataset.user_ids()
    if len(user_ids) < 2:
        raise ConfigError("evolution trials need at least 2 users")
    rho = cfg.resolved_rho()
    rhos = np.asarray([rho], dtype=np.float64)
    pools = _day_index_pools(dataset, cfg.combination)

    for uid in user_ids:
        for gt in cfg.combination:
            for day in days:
                have = len(pools[uid][gt].get(day, ()))
                need = cfg.training_size + cfg.n
                if have < need:
                    raise ConfigError(
                        f"user {uid}: {have} {gt.value} samples on day {day}, "
                        f"needs >= {need}"
                    )

    blanket = TrialConfig(  # reused for its combination/epsilon in _decide
        n=cfg.n,
        combination=cfg.combination,
        seed=cfg.seed,
        trials=cfg.trials,
        epsilon=cfg.epsilon,
    )

    day_results = []
    for day_index, day in enumerate(days):
        composition = training_provenance(
            days, day_index, cfg.scenario, cfg.training_size, cfg.replace_per_day
        )
        logger.info(
            "scenario %s, day %s: training composition %s",
            cfg.scenario,
            day,
            dict(sorted(composition.items())),
        )
        source_days = [d for d in days if d in composition]

        def one_trial(trial, kind):
            stream = _STREAM_EVO_TPR if kind == "tpr" else _STREAM_EVO_FPR
            rng = _rng(cfg.seed, stream, day_index, trial)
            target = user_ids[int(rng.integers(len(user_ids)))]
            attacker = None
            if kind == "fpr":
                others = [u for u in user_ids if u != target]
                attacker = others[int(rng.integers(len(others)))]
            training = {}
            held_current = {}
            for gt in cfg.combination:
                chosen_sets = []
                used_current = None
                for source_day in source_days:
                    pool = pools[target][gt][source_day]
                    chosen = rng.choice(pool, size=composition[source_day], replace=False)
                    chosen_sets.extend(int(i) for i in chosen)
                    if source_day == day:
                        used_current = set(int(i) for i in chosen)
                samples = dataset.users[target][gt]
                training[gt] = [samples[i] for i in chosen_sets]
                current_pool = pools[target][gt][day]
                if used_current:
                    held_current[gt] = np.asarray(
                        [i for i in current_pool if int(i) not in used_current]
                    )
                else:
                    held_current[gt] = current_pool
            model = train_user_model(training, dataset.resample, user_id=target)
            if kind == "tpr":
                block = {}
                for gt in cfg.combination:
                    chosen = rng.choice(held_current[gt], size=cfg.n, replace=False)
                    samples = dataset.users[target][gt]
                    block[gt] = [samples[int(i)] for i in chosen]
            else:
                block = {}
                for gt in cfg.combination:
                    pool = pools[attacker][gt][day]
                    chosen = rng.choice(pool, size=cfg.n, replace=False)
                    samples = dataset.users[attacker][gt]
                    block[gt] = [samples[int(i)] for i in chosen]
            accepts, _ = _decide(model, block, blanket, rhos)
            return int(accepts[0])

        tpr_hits = sum(_map_trials(lambda t: one_trial(t, "tpr"), cfg.trials, cfg.threads))
        fpr_hits = sum(_map_trials(lambda t: one_trial(t, "fpr"), cfg.trials, cfg.threads))
        tpr = tpr_hits / cfg.trials
        fpr = fpr_hits / cfg.trials
        day_results.append(
            DayResult(
                day=day,
                trials=cfg.trials,
                tpr=tpr,
                fpr=fpr,
                aer=compute_aer(tpr, fpr),
                provenance=composition,
            )
        )

    return EvolutionReport(
        scenario=cfg.scenario,
        combination=combination_label(cfg.combination),
        n=cfg.n,
        trials=cfg.trials,
        seed=cfg.seed,
        rho=rho,
        epsilon=cfg.epsilon,
        training_size=cfg.training_size,
        replace_per_day=cfg.replace_per_day,
        days=day_results,
    )
