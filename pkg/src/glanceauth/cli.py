"""Command-line pipeline over the library.

Subcommands: parse (event logs to typed samples), extract (samples to a
feature dataset), train, predict, evaluate, sweep, evolve, synth. Every
stage's output file is a valid input to the next with no hidden state.

Exit codes: 0 success, 1 usage error, 2 data or integrity error. The
GLANCE_AUTH_LOG environment variable (debug, info, warning, error) sets
log verbosity. Randomized commands honour --seed and log an
auto-generated one when it is missing.
"""

import argparse
import csv
import json
import logging
import os
import secrets
import sys
from collections import Counter
from pathlib import Path

from glanceauth.chebyshev import (
    DecisionConfig,
    classify_block,
    lookup_rho,
    train_user_model,
)
from glanceauth.errors import ConfigError, GlanceAuthError, StoreError
from glanceauth.evaluate import (
    DEFAULT_TRAINING_SIZES,
    Dataset,
    EvolutionConfig,
    TrialConfig,
    _rng,
    roc_sweep,
    run_evolution,
    run_report,
)
from glanceauth.features import (
    AREA_MAJOR,
    AREA_MAJOR_TIMES_MINOR,
    ExtractConfig,
    ResampleConfig,
    extract_features,
    feature_ids,
    write_feature_csv,
)
from glanceauth.gestures import (
    GESTURE_ORDER,
    GestureType,
    TypingConfig,
    classify_gesture,
    parse_combination,
)
from glanceauth.events import read_event_log
from glanceauth.store import (
    load_dataset,
    load_model,
    load_samples,
    save_dataset,
    save_model,
    save_samples,
    write_document,
)
from glanceauth.synth import SynthConfig, synth_generate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_STREAM_TRAIN = 9


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _rho_arg(text):
    if text == "lookup":
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--rho takes a positive number or 'lookup', got {text!r}"
        ) from None
    if not value > 0:
        raise argparse.ArgumentTypeError("--rho must be positive")
    return value


def _training_sizes_arg(text):
    sizes = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise argparse.ArgumentTypeError(
                f"--training-size entries look like T=50, got {part!r}"
            )
        letter, _, number = part.partition("=")
        try:
            gt = GestureType(letter.strip().upper())
            sizes[gt] = int(number)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"bad --training-size entry {part!r}"
            ) from None
    if not sizes:
        raise argparse.ArgumentTypeError("--training-size is empty")
    return sizes


def _days_arg(text):
    try:
        days = tuple(int(d) for d in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--days takes integers, got {text!r}") from None
    if not days:
        raise argparse.ArgumentTypeError("--days is empty")
    return days


def _ensure_seed(args):
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(32)
    print(f"note: --seed not given; using generated seed {seed}", file=sys.stderr)
    return seed


def _setup_logging():
    level_name = os.environ.get("GLANCE_AUTH_LOG", "warning").lower()
    level = {
        "debug": logging.DEBUG,
        "info": logging.INFO,
        "warning": logging.WARNING,
        "error": logging.ERROR,
    }.get(level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _collect_input_files(inputs):
    paths = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(c for c in p.iterdir() if c.is_file()))
        elif p.is_file():
            paths.append(p)
        else:
            raise StoreError(f"input {item!r} is neither a file nor a directory")
    return paths


def _write_roc_csv(path, report):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rho", "fpr", "tpr"])
        for point in report.roc:
            writer.writerow([repr(point.rho), repr(point.fpr), repr(point.tpr)])


def _write_frequency_csv(path, report):
    ids = feature_ids(parse_combination(report.combination))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "tp_count", "fp_count"])
        for fid in ids:
            entry = report.feature_frequencies[fid]
            writer.writerow([fid, entry["tp"], entry["fp"]])


def cmd_parse(args):
    typing_cfg = TypingConfig(
        tap_path_max=args.tap_path_max,
        down_ratio=args.down_ratio,
        invert_x=args.invert_x,
    )
    samples_by_user = {}
    untyped = 0
    discards = Counter()
    for path in _collect_input_files(args.inputs):
        uid = args.user_id or path.stem
        raw_samples, counts = read_event_log(
            path, user_id=uid, legacy=args.legacy_timestamps
        )
        discards.update(counts)
        bucket = samples_by_user.setdefault(uid, [])
        for raw in raw_samples:
            typed = classify_gesture(raw, typing_cfg)
            if typed is None:
                untyped += 1
            else:
                bucket.append(typed)
    if args.out:
        save_samples(samples_by_user, args.out)
    _print_parse_summary(samples_by_user, untyped, discards)
    return EXIT_OK


def _print_parse_summary(samples_by_user, untyped, discards):
    users = sorted(samples_by_user)
    per_type = {gt: [] for gt in GESTURE_ORDER}
    for uid in users:
        counts = Counter(gs.gesture_type for gs in samples_by_user[uid])
        for gt in GESTURE_ORDER:
            per_type[gt].append(counts.get(gt, 0))
    print(f"{'gesture':>8} {'total':>7} {'avg/user':>9} {'min':>5}")
    for gt in GESTURE_ORDER:
        counts = per_type[gt]
        total = sum(counts)
        avg = total / len(users) if users else 0.0
        minimum = min(counts) if counts else 0
        print(f"{gt.value:>8} {total:>7} {avg:>9.2f} {minimum:>5}")
    print(f"untyped samples: {untyped}")
    if discards:
        detail = ", ".join(f"{k}={v}" for k, v in sorted(discards.items()))
        print(f"discarded samples: {sum(discards.values())} ({detail})")
    else:
        print("discarded samples: 0")
    for uid in users:
        counts = Counter(gs.gesture_type for gs in samples_by_user[uid])
        for gt in GESTURE_ORDER:
            have = counts.get(gt, 0)
            floor = DEFAULT_TRAINING_SIZES[gt] + 2
            if 0 < have < floor:
                print(
                    f"note: user {uid} has only {have} {gt.value} samples "
                    f"(< {floor}); exclude them from {gt.value} n-block evaluation"
                )


def cmd_extract(args):
    samples_by_user = load_samples(args.samples)
    resample = ResampleConfig(t_int=args.t_int, t_off=args.t_off)
    cfg = ExtractConfig(resample=resample, area_mode=args.area_mode)
    users = {}
    rows = []
    total = 0
    for uid in sorted(samples_by_user):
        by_type = {}
        for gesture_sample in samples_by_user[uid]:
            fs = extract_features(gesture_sample, cfg)
            by_type.setdefault(fs.gesture_type, []).append(fs)
            rows.append((uid, fs))
            total += 1
        users[uid] = by_type
    save_dataset(Dataset(users=users, resample=resample), args.out)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_feature_csv(fh, rows, resample.m)
    print(f"extracted {total} samples from {len(users)} users -> {args.out}")
    return EXIT_OK


def cmd_train(args):
    dataset = load_dataset(args.dataset)
    if args.user not in dataset.users:
        raise ConfigError(f"user {args.user!r} is not in the dataset")
    by_type = dataset.users[args.user]
    if args.combination:
        combination = parse_combination(args.combination)
    else:
        combination = tuple(gt for gt in GESTURE_ORDER if by_type.get(gt))
    rng = None
    selected = {}
    for gt in combination:
        feature_sets = by_type.get(gt)
        if not feature_sets:
            raise ConfigError(f"user {args.user!r} has no {gt.value} samples")
        if args.training_size and gt in args.training_size:
            size = args.training_size[gt]
            if size > len(feature_sets):
                raise ConfigError(
                    f"training size {size} exceeds the {len(feature_sets)} "
                    f"{gt.value} samples of user {args.user!r}"
                )
            if rng is None:
                rng = _rng(_ensure_seed(args), _STREAM_TRAIN)
            chosen = rng.choice(len(feature_sets), size=size, replace=False)
            selected[gt] = [feature_sets[int(i)] for i in chosen]
        else:
            selected[gt] = list(feature_sets)
    model = train_user_model(selected, dataset.resample, user_id=args.user)
    save_model(model, args.out)
    sizes = {gt.value: len(v) for gt, v in selected.items()}
    print(f"trained model for {args.user} on {sizes} -> {args.out}")
    return EXIT_OK


def cmd_predict(args):
    model = load_model(args.model)
    dataset = load_dataset(args.dataset)
    user = args.user
    if user is None:
        if model.user_id in dataset.users:
            user = model.user_id
        elif len(dataset.users) == 1:
            user = next(iter(dataset.users))
        else:
            raise ConfigError("pass --user: the dataset holds several users")
    if user not in dataset.users:
        raise ConfigError(f"user {user!r} is not in the dataset")
    if args.combination:
        combination = parse_combination(args.combination)
    else:
        combination = tuple(gt for gt in GESTURE_ORDER if gt in model.gestures)
    rho = args.rho
    if rho is None:
        rho = lookup_rho(combination, args.n)
    cfg = DecisionConfig(rho=rho, n=args.n, epsilon=args.epsilon)
    block = {}
    for gt in combination:
        feature_sets = dataset.users[user].get(gt, [])
        if len(feature_sets) < args.n:
            raise ConfigError(
                f"user {user!r} has {len(feature_sets)} {gt.value} samples, "
                f"needs n={args.n}"
            )
        block[gt] = feature_sets[: args.n]  # first n in file order
    decision = classify_block(model, block, combination, cfg)
    doc = {
        "accept": bool(decision.accept),
        "votes": decision.votes,
        "boundary": decision.boundary,
        "rho": rho,
        "n": args.n,
        "user": user,
        "features": {
            fid: int(bit) for fid, bit in zip(decision.feature_ids, decision.bits)
        },
    }
    print(json.dumps(doc, sort_keys=True, indent=1))
    return EXIT_OK


def _load_eval_dataset(args):
    dataset = load_dataset(args.dataset)
    if args.users:
        dataset = dataset.restrict_users(args.users)
    return dataset


def _trial_config(args, seed):
    return TrialConfig(
        n=args.n,
        combination=args.combination,
        seed=seed,
        trials=args.trials,
        training_sizes=args.training_size,
        rho=getattr(args, "rho", None),
        epsilon=args.epsilon,
        threads=args.threads,
    )


def cmd_evaluate(args):
    dataset = _load_eval_dataset(args)
    report = run_report(dataset, _trial_config(args, _ensure_seed(args)))
    write_document(args.out, "report", report.to_doc())
    if args.freq_csv:
        _write_frequency_csv(args.freq_csv, report)
    print(
        f"tpr={report.tpr:.4f} fpr={report.fpr:.4f} aer={report.aer:.4f} "
        f"rho={report.rho} -> {args.out}"
    )
    return EXIT_OK


def cmd_sweep(args):
    dataset = _load_eval_dataset(args)
    report = roc_sweep(dataset, _trial_config(args, _ensure_seed(args)))
    write_document(args.out, "report", report.to_doc())
    if args.roc_csv:
        _write_roc_csv(args.roc_csv, report)
    if args.freq_csv:
        _write_frequency_csv(args.freq_csv, report)
    flag = " (extrapolated)" if report.eer_extrapolated else ""
    print(f"eer={report.eer:.4f}{flag} over {len(report.roc)} rho values -> {args.out}")
    return EXIT_OK


def cmd_evolve(args):
    dataset = load_dataset(args.dataset)
    cfg = EvolutionConfig(
        scenario=args.scenario,
        n=args.n,
        combination=args.combination,
        seed=_ensure_seed(args),
        trials=args.trials,
        training_size=args.training_size,
        replace_per_day=args.replace,
        rho=args.rho,
        epsilon=args.epsilon,
        threads=args.threads,
    )
    report = run_evolution(dataset, cfg)
    write_document(args.out, "report", report.to_doc())
    for day in report.days:
        print(
            f"day {day.day}: tpr={day.tpr:.4f} fpr={day.fpr:.4f} aer={day.aer:.4f} "
            f"training={dict(sorted(day.provenance.items()))}"
        )
    print(f"-> {args.out}")
    return EXIT_OK


def cmd_synth(args):
    cfg = SynthConfig(
        users=args.users,
        samples_per_type=args.samples,
        seed=_ensure_seed(args),
        separation=args.separation,
        clusters=args.clusters,
        bimodal=args.bimodal,
        days=args.days,
        samples_per_day=args.per_day,
        drift=args.drift,
    )
    resample = ResampleConfig(t_int=args.t_int, t_off=args.t_off)
    dataset = synth_generate(cfg, resample)
    save_dataset(dataset, args.out)
    per_type = args.per_day * len(args.days) if args.days else args.samples
    print(f"generated {args.users} users x {per_type} samples/type -> {args.out}")
    return EXIT_OK


def _add_resample_flags(sub):
    sub.add_argument("--t-int", type=float, default=0.01, help="resample interval, seconds")
    sub.add_argument("--t-off", type=float, default=0.3, help="series cutoff, seconds")


def _add_decision_flags(sub, with_rho=True, combination_required=True):
    sub.add_argument("--n", type=int, required=True, help="test block size per gesture type")
    sub.add_argument(
        "--combination", required=combination_required, default=None,
        help="gesture letters, e.g. TF or TFBD",
    )
    if with_rho:
        sub.add_argument(
            "--rho",
            type=_rho_arg,
            default=None,
            help="probability bound, or 'lookup' for the bundled calibration (default)",
        )
    sub.add_argument("--epsilon", type=float, default=2.0 / 3.0, help="vote threshold")


def _add_trial_flags(sub):
    sub.add_argument("--trials", type=int, default=500)
    sub.add_argument("--seed", type=int, default=None, help="RNG seed (logged when omitted)")
    sub.add_argument("--threads", type=int, default=None, help="worker cap; default: all cores")
    sub.add_argument(
        "--training-size",
        type=_training_sizes_arg,
        default=None,
        metavar="T=50,F=50,B=25,D=10",
        help="per-type training sizes",
    )
    sub.add_argument("--users", type=int, default=None, help="keep only the first K users")


def build_parser():
    parser = _Parser(prog="glance-auth", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = commands.add_parser("parse", help="decode event logs into typed gesture samples")
    p.add_argument("inputs", nargs="+", help="event-log files or directories")
    p.add_argument("--out", default=None, help="samples JSON output")
    p.add_argument("--user-id", default=None, help="override the file-stem user id")
    p.add_argument(
        "--legacy-timestamps",
        action="store_true",
        help="accept 3-field lines, synthesising timestamps at 0.012 s per reading",
    )
    p.add_argument("--tap-path-max", type=float, default=30.0)
    p.add_argument("--down-ratio", type=float, default=1.0)
    p.add_argument("--invert-x", action="store_true", help="flip the forward/backward convention")
    p.set_defaults(func=cmd_parse)

    p = commands.add_parser("extract", help="compute features from typed samples")
    p.add_argument("samples", help="samples JSON from `parse`")
    p.add_argument("--out", required=True, help="dataset JSON output")
    p.add_argument("--csv", default=None, help="optional per-sample feature CSV")
    _add_resample_flags(p)
    p.add_argument(
        "--area-mode",
        choices=[AREA_MAJOR, AREA_MAJOR_TIMES_MINOR],
        default=AREA_MAJOR,
        help="contact-area estimate used in the normal force",
    )
    p.set_defaults(func=cmd_extract)

    p = commands.add_parser("train", help="fit a per-user model from a dataset")
    p.add_argument("dataset")
    p.add_argument("--user", required=True)
    p.add_argument("--combination", default=None, help="default: every type the user has")
    p.add_argument(
        "--training-size",
        type=_training_sizes_arg,
        default=None,
        metavar="T=50,F=50",
        help="random per-type subsets; omitted types use all samples",
    )
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="model JSON output")
    p.set_defaults(func=cmd_train)

    p = commands.add_parser("predict", help="classify the first n samples per type")
    p.add_argument("model")
    p.add_argument("dataset")
    p.add_argument("--user", default=None)
    _add_decision_flags(p, combination_required=False)
    p.set_defaults(func=cmd_predict)

    p = commands.add_parser("evaluate", help="randomized TPR/FPR trials at one rho")
    p.add_argument("dataset")
    _add_decision_flags(p)
    _add_trial_flags(p)
    p.add_argument("--out", required=True, help="report JSON output")
    p.add_argument("--freq-csv", default=None, help="feature frequencies CSV")
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser("sweep", help="rho sweep with interpolated EER")
    p.add_argument("dataset")
    _add_decision_flags(p, with_rho=False)
    _add_trial_flags(p)
    p.add_argument("--out", required=True, help="report JSON output")
    p.add_argument("--roc-csv", default=None)
    p.add_argument("--freq-csv", default=None)
    p.set_defaults(func=cmd_sweep)

    p = commands.add_parser("evolve", help="per-day error rates under a permanence scenario")
    p.add_argument("dataset", help="day-labelled dataset JSON")
    p.add_argument("--scenario", required=True, choices=["same_day", "first_day", "adaptive"])
    _add_decision_flags(p)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--training-size", type=int, default=20)
    p.add_argument("--replace", type=int, default=4, help="samples swapped in per day")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)

    p = commands.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--users", type=int, default=10)
    p.add_argument("--samples", type=int, default=70, help="samples per gesture type")
    p.add_argument("--separation", type=float, default=1.0, help="profile spread in sigmas")
    p.add_argument("--clusters", type=int, default=0, help="0: random profiles; k: k fixed profiles")
    p.add_argument("--bimodal", action="store_true", help="two-component scalar features")
    p.add_argument("--days", type=_days_arg, default=None, metavar="1,2,3,7,14")
    p.add_argument("--per-day", type=int, default=34, help="samples per type per day")
    p.add_argument("--drift", type=float, default=0.0, help="per-day mean drift in sigmas")
    p.add_argument("--seed", type=int, default=None)
    _add_resample_flags(p)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _setup_logging()
    try:
        return args.func(args)
    except GlanceAuthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
