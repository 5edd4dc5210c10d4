"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete. Statistical criteria use fixed seeds; tolerances are stated
inline next to each assertion.
"""

import json
import logging
import math
import time

import numpy as np
import pytest

from conftest import REFERENCE_PACKET
from glanceauth.chebyshev import (
    RHO_CALIBRATION,
    UnitaryStat,
    chebyshev_threshold,
    decision_boundary,
    f_series,
    f_unitary,
    fit_series,
    fit_unitary,
    lookup_rho,
)
from glanceauth.cli import main
from glanceauth.evaluate import (
    EvolutionConfig,
    TrialConfig,
    roc_sweep,
    run_evolution,
)
from glanceauth.events import MT_TOOL_FINGER, assemble_samples, iter_log_events
from glanceauth.features import feature_ids
from glanceauth.gestures import parse_combination
from glanceauth.synth import SynthConfig, synth_generate

COMBINATIONS = ("T", "F", "B", "D", "TF", "TFB", "TFBD")


def gate(number, name, ok, detail=""):
    verdict = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {number} {name}: {verdict}{suffix}")
    assert ok, f"criterion {number} {name} failed{suffix}"


def test_c1_parser_fidelity(tmp_path):
    started = time.perf_counter()
    packet_file = tmp_path / "packet.log"
    packet_file.write_bytes(REFERENCE_PACKET)
    assert packet_file.read_bytes() == REFERENCE_PACKET  # byte-level golden input

    events = list(
        iter_log_events(packet_file.read_text().splitlines(), legacy=True)
    )
    samples, discards = assemble_samples(events, "golden")
    tool_events = [e for e in events if e.ev_code == 0x0037]

    ok = (
        len(samples) == 1
        and len(samples[0].readings) == 1
        and not discards
        and tool_events[0].ev_value == MT_TOOL_FINGER
    )
    if ok:
        reading = samples[0].readings[0]
        ok = (
            reading.x == 849
            and reading.y == 102
            and reading.pressure == 71
            and reading.touch_major == 3
            and reading.touch_minor == 2
            and reading.tracking_id == 0
        )
    elapsed = time.perf_counter() - started
    gate(1, "parser-fidelity", ok and elapsed < 1.0, f"{elapsed:.3f}s")


def test_c2_decision_boundary_table():
    expected = {
        "T": (3, 4),
        "F": (6, 9),
        "B": (6, 9),
        "D": (6, 9),
        "TF": (9, 13),
        "TFB": (15, 22),
        "TFBD": (21, 31),
    }
    got = {}
    for label in COMBINATIONS:
        m = len(feature_ids(parse_combination(label)))
        got[label] = (decision_boundary(m, 2.0 / 3.0), m)
    gate(2, "decision-boundary-table", got == expected, f"{got}")


def test_c3_chebyshev_bound_monte_carlo():
    started = time.perf_counter()
    # bimodal feature with exactly known moments, supplied as the model
    mu, delta, s = 40.0, 6.0, 2.5
    var = delta**2 + s**2
    stat = UnitaryStat(mean=mu, var=var, count=1000)
    rng = np.random.default_rng(2024)
    trials, n = 10_000, 10
    ok = True
    details = []
    for rho in (0.1, 0.2, 0.5):
        component = rng.choice((-1.0, 1.0), size=(trials, n))
        blocks = mu + delta * component + s * rng.standard_normal((trials, n))
        tau = chebyshev_threshold(stat.var, n, rho)
        rejected = np.abs(blocks.mean(axis=1) - stat.mean) >= tau
        # spot-check that the vectorized rule equals the classifier's output
        for idx in rng.choice(trials, size=50, replace=False):
            assert f_unitary(stat, blocks[idx], rho) == (0 if rejected[idx] else 1)
        bound = rho + 3 * math.sqrt(rho * (1 - rho) / trials)
        rate = float(rejected.mean())
        details.append(f"rho={rho}: {rate:.4f} <= {bound:.4f}")
        ok = ok and rate <= bound
    elapsed = time.perf_counter() - started
    gate(3, "chebyshev-bound", ok and elapsed < 10.0, "; ".join(details) + f"; {elapsed:.2f}s")


def test_c4_summed_series_oracle_equivalence():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 6))
        count = int(rng.integers(2, 9))
        rows = rng.standard_normal((count, m)) * rng.uniform(0.1, 30.0)
        grand_sum = fit_series(rows).sum_var
        direct = float(np.var(rows.sum(axis=1), ddof=1))
        scale = max(abs(direct), 1e-30)
        worst = max(worst, abs(grand_sum - direct) / scale)
    equivalence_ok = worst <= 1e-9

    mismatches = 0
    for _ in range(1000):
        train = rng.standard_normal(int(rng.integers(2, 12))) * rng.uniform(0.1, 5)
        test = rng.standard_normal(int(rng.integers(1, 9))) * rng.uniform(0.1, 5)
        rho = float(rng.uniform(0.05, 1.4))
        if f_unitary(fit_unitary(train), test, rho) != f_series(
            fit_series(train[:, None]), test[:, None], rho
        ):
            mismatches += 1
    gate(
        4,
        "summed-series-oracle",
        equivalence_ok and mismatches == 0,
        f"worst rel err {worst:.2e}; {mismatches} bit mismatches",
    )


def test_c5_eer_pipeline():
    started = time.perf_counter()
    separated = synth_generate(
        SynthConfig(users=2, samples_per_type=70, seed=13, separation=6.0, clusters=2)
    )
    report = roc_sweep(
        separated, TrialConfig(n=10, combination="TFBD", seed=99, trials=500)
    )
    twins = synth_generate(SynthConfig(users=4, samples_per_type=70, seed=5, separation=0.0))
    twin_report = roc_sweep(
        twins, TrialConfig(n=10, combination="TFBD", seed=11, trials=500)
    )
    elapsed = time.perf_counter() - started
    ok = report.eer <= 0.02 and 0.4 <= twin_report.eer <= 0.6 and elapsed < 120.0
    gate(
        5,
        "eer-pipeline",
        ok,
        f"separated eer={report.eer:.4f}, twins eer={twin_report.eer:.4f}, {elapsed:.1f}s",
    )


def test_c6_eer_trends():
    dataset = synth_generate(SynthConfig(users=10, samples_per_type=80, seed=42))
    ns = (1, 3, 5, 7, 10)
    trials = 500
    eers = {}
    for label in COMBINATIONS:
        eers[label] = [
            roc_sweep(
                dataset, TrialConfig(n=n, combination=label, seed=101, trials=trials)
            ).eer
            for n in ns
        ]
    monotone = True
    for label, values in eers.items():
        for a, b in zip(values, values[1:]):
            mid = max((a + b) / 2.0, 1.0 / trials)
            noise = 3.0 * math.sqrt(mid * (1.0 - mid) / trials)
            if b > a + noise:
                monotone = False
    tap_worst = eers["TFBD"][-1] <= eers["T"][-1]
    summary = {k: [round(e, 3) for e in v] for k, v in eers.items()}
    gate(6, "eer-trends", monotone and tap_worst, f"{summary}")


def test_c7_rho_lookup_table():
    expected = {
        ("T", 1): 0.475, ("T", 3): 0.325, ("T", 5): 0.225, ("T", 7): 0.175,
        ("T", 10): 0.175, ("T", 15): 0.125, ("T", 25): 0.125,
        ("F", 1): 0.775, ("F", 3): 0.525, ("F", 5): 0.375, ("F", 7): 0.375,
        ("F", 10): 0.325, ("F", 15): 0.275, ("F", 25): 0.175,
        ("B", 1): 0.725, ("B", 3): 0.425, ("B", 5): 0.325, ("B", 7): 0.275,
        ("B", 10): 0.225,
        ("D", 1): 0.525, ("D", 3): 0.325, ("D", 5): 0.225, ("D", 7): 0.175,
        ("D", 10): 0.175,
        ("TF", 1): 0.825, ("TF", 3): 0.525, ("TF", 5): 0.425, ("TF", 7): 0.375,
        ("TF", 10): 0.275, ("TF", 15): 0.225, ("TF", 25): 0.175,
        ("TFB", 1): 0.825, ("TFB", 3): 0.525, ("TFB", 5): 0.425, ("TFB", 7): 0.375,
        ("TFB", 10): 0.325,
        ("TFBD", 1): 0.775, ("TFBD", 3): 0.525, ("TFBD", 5): 0.425,
        ("TFBD", 7): 0.325, ("TFBD", 10): 0.275,
    }
    populated = {key for key, cohorts in RHO_CALIBRATION.items() if "U1" in cohorts}
    ok = populated == set(expected)
    mismatches = []
    for (label, n), midpoint in expected.items():
        got = lookup_rho(label, n)
        if got != midpoint:
            mismatches.append((label, n, got, midpoint))
            ok = False
    gate(7, "rho-lookup", ok, f"{len(expected)} cells" + (f"; mismatches {mismatches}" if mismatches else ""))


def test_c8_report_determinism(tmp_path):
    data = tmp_path / "data.json"
    assert main(["synth", "--out", str(data), "--users", "4", "--samples", "40", "--seed", "3"]) == 0
    daily = tmp_path / "daily.json"
    assert main([
        "synth", "--out", str(daily), "--users", "3", "--seed", "4",
        "--days", "1,2,3", "--per-day", "16",
    ]) == 0

    runs = {
        "evaluate": lambda out, threads: main([
            "evaluate", str(data), "--combination", "TF", "--n", "5", "--rho", "0.3",
            "--trials", "50", "--seed", "12", "--training-size", "T=20,F=20,B=20,D=20",
            "--threads", threads, "--out", out,
        ]),
        "sweep": lambda out, threads: main([
            "sweep", str(data), "--combination", "T", "--n", "3",
            "--trials", "30", "--seed", "12", "--training-size", "T=20",
            "--threads", threads, "--out", out,
        ]),
        "evolve": lambda out, threads: main([
            "evolve", str(daily), "--scenario", "adaptive", "--combination", "T",
            "--n", "2", "--trials", "20", "--seed", "12", "--rho", "0.3",
            "--training-size", "10", "--replace", "2",
            "--threads", threads, "--out", out,
        ]),
    }
    ok = True
    details = []
    for name, runner in runs.items():
        outputs = []
        for tag, threads in (("r1", "1"), ("r2", "1"), ("r3", "4")):
            out = tmp_path / f"{name}-{tag}.json"
            assert runner(str(out), threads) == 0
            outputs.append(out.read_bytes())
        same = outputs[0] == outputs[1] == outputs[2]
        details.append(f"{name}: {'identical' if same else 'DIFFERS'}")
        ok = ok and same
    gate(8, "report-determinism", ok, "; ".join(details))


def test_c9_adaptive_training_composition(caplog):
    dataset = synth_generate(
        SynthConfig(users=3, seed=21, days=(1, 2, 3, 7, 14), samples_per_day=34)
    )
    cfg = EvolutionConfig(
        scenario="adaptive", n=3, combination="T", seed=6, trials=20,
        training_size=20, replace_per_day=4, rho=0.3,
    )
    with caplog.at_level(logging.INFO, logger="glanceauth.evaluate"):
        report = run_evolution(dataset, cfg)
    by_day = {d.day: d.provenance for d in report.days}
    expected = {
        1: {1: 20},
        2: {1: 16, 2: 4},
        3: {1: 12, 2: 4, 3: 4},
        7: {1: 8, 2: 4, 3: 4, 7: 4},
        14: {1: 4, 2: 4, 3: 4, 7: 4, 14: 4},
    }
    logged = [r.message for r in caplog.records if "training composition" in r.message]
    ok = by_day == expected and len(logged) == 5
    gate(9, "adaptive-training-composition", ok, f"{by_day}")
