"""Versioned JSON persistence for models, datasets, and parsed samples.

Every file carries a format version and a sha256 checksum over the
canonical serialization of its content. Writes are atomic (temp file then
rename); loads reject version mismatches outright (no migration) and
validate checksums and structural invariants before returning anything.
"""

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from glanceauth.chebyshev import (
    MODEL_VERSION,
    GestureModel,
    SeriesStat,
    UnitaryStat,
    UserModel,
)
from glanceauth.errors import IntegrityError, StoreError, VersionError
from glanceauth.events import RawSample, Reading
from glanceauth.features import (
    FeatureSet,
    ResampleConfig,
    series_names,
    unitary_names,
)
from glanceauth.gestures import GestureSample, GestureType

FORMAT_VERSION = "1"

# relative eigenvalue tolerance when validating covariance matrices on load
_PSD_TOL = 1e-9


def _canonical(doc):
    try:
        return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
    except ValueError as exc:
        raise StoreError(f"document contains non-finite numbers: {exc}") from None


def _checksum(doc):
    return hashlib.sha256(_canonical(doc).encode("utf-8")).hexdigest()


def _atomic_write(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_document(path, kind, body):
    """Wrap body with version, kind, and checksum, and write it atomically."""
    doc = {"version": FORMAT_VERSION, "kind": kind}
    doc.update(body)
    doc["checksum"] = _checksum(doc)
    _atomic_write(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")


def read_document(path, kind):
    """Load and verify a wrapped document; returns the full dict."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise StoreError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise IntegrityError(f"{path} does not hold a JSON object")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise VersionError(
            f"{path} has format version {version!r}, this build reads {FORMAT_VERSION!r}"
        )
    if doc.get("kind") != kind:
        raise IntegrityError(f"{path} holds a {doc.get('kind')!r} document, expected {kind!r}")
    stored = doc.get("checksum")
    stripped = {k: v for k, v in doc.items() if k != "checksum"}
    if stored != _checksum(stripped):
        raise IntegrityError(f"{path} failed its checksum; the file was modified or truncated")
    return doc


def _resample_to_doc(cfg):
    return {"t_int": cfg.t_int, "t_off": cfg.t_off}


def _resample_from_doc(doc):
    try:
        return ResampleConfig(t_int=float(doc["t_int"]), t_off=float(doc["t_off"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise IntegrityError(f"bad resample section: {exc}") from None


def save_model(model, path):
    """Serialize a UserModel. Raises StoreError on non-finite statistics."""
    gestures = {}
    for gt, gm in model.gestures.items():
        gestures[gt.value] = {
            "unitary": {
                name: {"mean": stat.mean, "var": stat.var, "count": stat.count}
                for name, stat in gm.unitary.items()
            },
            "series": {
                name: {
                    "means": stat.means.tolist(),
                    "cov": stat.cov.tolist(),
                    "count": stat.count,
                }
                for name, stat in gm.series.items()
            },
        }
    body = {
        "model_version": model.version,
        "user_id": model.user_id,
        "resample": _resample_to_doc(model.resample),
        "gestures": gestures,
    }
    write_document(path, "model", body)


def load_model(path):
    """Load and validate a UserModel.

    Checks covariance symmetry, positive semi-definiteness (to a relative
    eigenvalue tolerance), and feature-name completeness per gesture type.
    """
    doc = read_document(path, "model")
    if doc.get("model_version") != MODEL_VERSION:
        raise VersionError(
            f"{path} holds model version {doc.get('model_version')!r}, "
            f"this build reads {MODEL_VERSION!r}"
        )
    resample = _resample_from_doc(doc.get("resample", {}))
    gestures = {}
    for letter, section in doc.get("gestures", {}).items():
        try:
            gt = GestureType(letter)
        except ValueError:
            raise IntegrityError(f"unknown gesture type {letter!r} in {path}") from None
        unitary = {}
        for name, stat in section.get("unitary", {}).items():
            unitary[name] = UnitaryStat(
                mean=float(stat["mean"]), var=float(stat["var"]), count=int(stat["count"])
            )
        series = {}
        for name, stat in section.get("series", {}).items():
            means = np.asarray(stat["means"], dtype=np.float64)
            cov = np.asarray(stat["cov"], dtype=np.float64)
            if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
                raise IntegrityError(f"series {letter}.{name}: covariance is not square")
            if not np.array_equal(cov, cov.T):
                raise IntegrityError(f"series {letter}.{name}: covariance is not symmetric")
            eigs = np.linalg.eigvalsh(cov)
            scale = max(1.0, float(np.max(np.abs(eigs))) if eigs.size else 1.0)
            if eigs.size and float(eigs.min()) < -_PSD_TOL * scale:
                raise IntegrityError(
                    f"series {letter}.{name}: covariance is not positive semi-definite"
                )
            if means.shape[0] != resample.m:
                raise IntegrityError(
                    f"series {letter}.{name}: length {means.shape[0]} does not match "
                    f"the resample grid ({resample.m})"
                )
            series[name] = SeriesStat(means=means, cov=cov, count=int(stat["count"]))
        expected_unitary = set(unitary_names(gt))
        expected_series = set(series_names(gt))
        if set(unitary) != expected_unitary or set(series) != expected_series:
            raise IntegrityError(
                f"gesture type {letter} has features "
                f"{sorted(unitary) + sorted(series)}, expected "
                f"{sorted(expected_unitary) + sorted(expected_series)}"
            )
        gestures[gt] = GestureModel(unitary=unitary, series=series)
    if not gestures:
        raise IntegrityError(f"{path} holds no gesture statistics")
    return UserModel(
        user_id=str(doc.get("user_id", "")),
        resample=resample,
        gestures=gestures,
        version=MODEL_VERSION,
    )


def _feature_set_to_doc(fs):
    doc = {
        "unitary": {k: float(v) for k, v in fs.unitary.items()},
        "series": {k: [float(x) for x in v] for k, v in fs.series.items()},
    }
    if fs.day is not None:
        doc["day"] = int(fs.day)
    return doc


def _feature_set_from_doc(gt, doc):
    return FeatureSet(
        gesture_type=gt,
        unitary={k: float(v) for k, v in doc.get("unitary", {}).items()},
        series={
            k: np.asarray(v, dtype=np.float64) for k, v in doc.get("series", {}).items()
        },
        day=doc.get("day"),
    )


def save_dataset(dataset, path):
    """Serialize an evaluation Dataset (see glanceauth.evaluate)."""
    users = {}
    for uid, by_type in dataset.users.items():
        users[uid] = {
            gt.value: [_feature_set_to_doc(fs) for fs in feature_sets]
            for gt, feature_sets in by_type.items()
        }
    body = {
        "resample": _resample_to_doc(dataset.resample),
        "synth": dataset.synth_params,
        "users": users,
    }
    write_document(path, "dataset", body)


def load_dataset(path):
    from glanceauth.evaluate import Dataset  # deferred to avoid an import cycle

    doc = read_document(path, "dataset")
    resample = _resample_from_doc(doc.get("resample", {}))
    users = {}
    for uid, by_type in doc.get("users", {}).items():
        out = {}
        for letter, sets in by_type.items():
            try:
                gt = GestureType(letter)
            except ValueError:
                raise IntegrityError(f"unknown gesture type {letter!r} in {path}") from None
            out[gt] = [_feature_set_from_doc(gt, d) for d in sets]
        users[uid] = out
    return Dataset(users=users, resample=resample, synth_params=doc.get("synth"))


def save_samples(samples_by_user, path):
    """Serialize typed gesture samples, keyed by user id."""
    users = {}
    for uid, gesture_samples in samples_by_user.items():
        users[uid] = [
            {
                "gesture_type": gs.gesture_type.value,
                "readings": [
                    [
                        r.timestamp,
                        r.x,
                        r.y,
                        r.pressure,
                        r.touch_major,
                        r.touch_minor,
                        r.tracking_id,
                        r.orientation,
                    ]
                    for r in gs.sample.readings
                ],
            }
            for gs in gesture_samples
        ]
    write_document(path, "samples", {"users": users})


def load_samples(path):
    doc = read_document(path, "samples")
    users = {}
    for uid, sample_docs in doc.get("users", {}).items():
        gesture_samples = []
        for sd in sample_docs:
            try:
                gt = GestureType(sd["gesture_type"])
                readings = [
                    Reading(
                        timestamp=float(row[0]),
                        x=int(row[1]),
                        y=int(row[2]),
                        pressure=int(row[3]),
                        touch_major=int(row[4]),
                        touch_minor=int(row[5]),
                        tracking_id=int(row[6]),
                        orientation=int(row[7]),
                    )
                    for row in sd["readings"]
                ]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise IntegrityError(f"bad sample record in {path}: {exc}") from None
            gesture_samples.append(
                GestureSample(RawSample(readings=readings, user_id=uid), gt)
            )
        users[uid] = gesture_samples
    return users
