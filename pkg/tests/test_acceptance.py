"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The heavy synthetic-corpus runs (criteria 7 and 8) share one module-scoped
corpus. Sensitivity diffs from criterion 2 are reused by criterion 5.
"""

import json
import math
import os
import subprocess
import sys
import time

import mpmath as mp
import numpy as np
import pytest

import oracles
from dpsu.calibration import calibrate, gaussian_sigma, laplace_threshold
from dpsu.core import PRIVATE_MECHANISMS, Database, Mechanism, MechanismConfig, PrivacyParams
from dpsu.experiments import ExperimentSpec, SynthSpec, run_grid
from dpsu.policies import PolicyKind, UpdatePolicy
from dpsu.release import run_dpsu
from dpsu.sensitivity import (contraction_trial, greedy_counterexample,
                              greedy_local_configuration, neighbor_diffs,
                              pair_stays_invariant)

DELTA = math.exp(-10)
PARAMS = PrivacyParams(3.0, DELTA)
FROZEN_SYNTH = SynthSpec(users=20000, vocab=50000, exponent=1.0, mu=3.0, sigma=1.0, seed=7)
SHUFFLES = 5


# -- 1 ------------------------------------------------------------------------

def test_criterion_1_calibration_exactness(record_criterion):
    eps_grid = (0.5, 1.5, 3.0, 5.0)
    delta_grid = (1e-10, 1e-8, 1e-6, 1e-4, 1e-3)
    start = time.perf_counter()
    rho = laplace_threshold(PARAMS, 1, tightened=True)
    sigmas = {(e, d): gaussian_sigma(PrivacyParams(e, d)) for e in eps_grid for d in delta_grid}
    elapsed = time.perf_counter() - start

    ref = 1 + mp.log(mp.e ** 10 / 2) / 3
    rho_err = abs(rho - float(ref))
    bad = []
    for (e, d), s in sigmas.items():
        f_at = oracles.privacy_loss_gap(s, e)
        f_below = oracles.privacy_loss_gap(s * (1 - 1e-9), e)
        if not (f_at <= mp.mpf(d) / 2 < f_below):
            bad.append((e, d))
    passed = rho_err <= 1e-6 and not bad and len(sigmas) == 20 and elapsed < 1.0
    record_criterion(1, passed, f"|rho-ref|={rho_err:.2e}, sigma bracket failures={bad}, "
                                f"20 pairs, runtime {elapsed:.3f}s")
    assert passed


# -- 2 and 5 ------------------------------------------------------------------

def random_small_db(rng):
    n_users = int(rng.integers(2, 51))
    n_items = int(rng.integers(1, 31))
    weights = 1.0 / np.arange(1, n_items + 1)
    weights /= weights.sum()
    sets = {}
    for j in range(n_users):
        k = int(rng.integers(1, min(n_items, 12) + 1))
        sets[f"u{j}"] = [f"i{x}" for x in rng.choice(n_items, size=k, replace=False, p=weights)]
    return Database.from_mapping(sets)


@pytest.fixture(scope="module")
def sensitivity_run():
    """All-user deletion over 200 random databases for the six private mechanisms.

    Each database also draws epsilon and alpha so the cutoff ranges from
    about 2 (items saturate often) to about 30 (almost never).
    """
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    worst = {m: 0.0 for m in PRIVATE_MECHANISMS}
    new_item_violations = []
    new_item_checked = 0
    n_diffs = 0
    for case in range(200):
        db = random_small_db(rng)
        delta0 = int(rng.choice([1, 2, 5, 10]))
        params = PrivacyParams(float(rng.uniform(0.5, 8.0)), DELTA)
        alpha = float(rng.uniform(0.0, 6.0))
        seed = int(rng.integers(0, 2 ** 63))
        for mech in PRIVATE_MECHANISMS:
            cfg = MechanismConfig(mech, delta0=delta0, alpha=alpha, seed=seed)
            for diff in neighbor_diffs(db, cfg, mode="all", params=params):
                n_diffs += 1
                worst[mech] = max(worst[mech], diff.lp_gap)
                if mech.is_policy and diff.new_items:
                    new_item_checked += 1
                    if diff.new_item_max > diff.new_item_bound + 1e-9:
                        new_item_violations.append((case, mech.value, diff.removed_user))
    return {
        "worst": worst,
        "elapsed": time.perf_counter() - start,
        "n_diffs": n_diffs,
        "new_item_checked": new_item_checked,
        "new_item_violations": new_item_violations,
    }


def test_criterion_2_sensitivity(record_criterion, sensitivity_run):
    worst = sensitivity_run["worst"]
    elapsed = sensitivity_run["elapsed"]
    passed = all(g <= 1 + 1e-9 for g in worst.values()) and elapsed < 120
    summary = ", ".join(f"{m.value}={g:.12f}" for m, g in worst.items())
    record_criterion(2, passed, f"max gaps {summary}; {sensitivity_run['n_diffs']} neighbor "
                                f"pairs over 200 dbs; runtime {elapsed:.1f}s")
    assert passed


def test_criterion_5_new_item_bound(record_criterion, sensitivity_run):
    violations = sensitivity_run["new_item_violations"]
    checked = sensitivity_run["new_item_checked"]
    passed = not violations and checked > 0
    record_criterion(5, passed, f"{checked} policy-mechanism diffs with T non-empty, "
                                f"violations={violations[:5]}")
    assert passed


# -- 3 ------------------------------------------------------------------------

def test_criterion_3_contraction(record_criterion):
    start = time.perf_counter()
    l1 = sum(contraction_trial(PolicyKind.L1_DESCENT, rng_seed=s) for s in range(10000))
    l2 = sum(contraction_trial(PolicyKind.L2_DESCENT, rng_seed=s) for s in range(10000))
    h1, h2, w = greedy_local_configuration()
    greedy_ok = pair_stays_invariant(UpdatePolicy(PolicyKind.GREEDY, gamma=100), h1, h2, w)
    elapsed = time.perf_counter() - start
    passed = l1 == 10000 and l2 == 10000 and not greedy_ok and elapsed < 60
    record_criterion(3, passed, f"l1-descent {l1}/10000, l2-descent {l2}/10000, greedy local "
                                f"configuration stays invariant={greedy_ok}; runtime {elapsed:.1f}s")
    assert passed


# -- 4 ------------------------------------------------------------------------

def test_criterion_4_greedy_blowup(record_criterion):
    start = time.perf_counter()
    rows = []
    for n in (6, 10, 20, 40):
        i = math.ceil(n / 2)
        gap, _ = greedy_counterexample(n, i, 10 * n)
        rows.append((n, i, gap, 1 + 2 * (n - i)))
    elapsed = time.perf_counter() - start
    passed = all(gap == exp for _, _, gap, exp in rows) and elapsed < 1.0
    record_criterion(4, passed, "gaps " + ", ".join(f"n={n},i={i}: {g:g} (expect {e})"
                                                    for n, i, g, e in rows)
                     + f"; runtime {elapsed:.3f}s")
    assert passed


# -- 6 ------------------------------------------------------------------------

def test_criterion_6_privacy_smoke(record_criterion):
    delta, n_seeds = 0.05, 5000
    params = PrivacyParams(3.0, delta)
    users = {f"crowd{j}": ["common", f"c{j % 3}"] for j in range(30)}
    users["target"] = ["secret"]
    db = Database.from_mapping(users)
    bound = delta + 3 * math.sqrt(delta * (1 - delta) / n_seeds)
    start = time.perf_counter()
    rates = {}
    for mech in (Mechanism.POLICY_LAPLACE, Mechanism.POLICY_GAUSSIAN):
        cal = calibrate(mech, params, 1, 5.0)
        hits = 0
        for seed in range(n_seeds):
            cfg = MechanismConfig(mech, delta0=1, alpha=5.0, seed=seed)
            hits += "secret" in run_dpsu(db, cfg, params, calibration=cal).released
        rates[mech.value] = hits / n_seeds
    elapsed = time.perf_counter() - start
    passed = all(r <= bound for r in rates.values()) and elapsed < 300
    record_criterion(6, passed, f"release rates {rates} vs bound {bound:.4f} "
                                f"(delta=0.05, {n_seeds} seeds); runtime {elapsed:.1f}s")
    assert passed


# -- 7 and 8 ------------------------------------------------------------------

@pytest.fixture(scope="module")
def frozen_corpus():
    return FROZEN_SYNTH.build()


def test_criterion_7_trend(record_criterion, frozen_corpus):
    start = time.perf_counter()
    spec = ExperimentSpec(mechanisms=tuple(PRIVATE_MECHANISMS), epsilons=(1.0, 2.0, 3.0, 4.0),
                          delta=DELTA, delta0s=(100,), alphas=(5.0,), shuffles=SHUFFLES,
                          synth=FROZEN_SYNTH)
    result = run_grid(spec, db=frozen_corpus)
    elapsed = time.perf_counter() - start
    assert not any(c.error for c in result.cells)
    mean = {m.value: result.cell(m, epsilon=3.0).mean for m in PRIVATE_MECHANISMS}

    checks = {
        "PG>WG>CG": mean["policy-gaussian"] > mean["weighted-gaussian"] > mean["count-gaussian"],
        "PL>WL": mean["policy-laplace"] > mean["weighted-laplace"],
    }
    ratio_l = mean["policy-laplace"] / mean["weighted-laplace"]
    ratio_g = mean["policy-gaussian"] / mean["weighted-gaussian"]
    checks["PL/WL>=1.3"] = ratio_l >= 1.3
    checks["PG/WG>=1.3"] = ratio_g >= 1.3
    non_monotone = []
    for m in PRIVATE_MECHANISMS:
        series = [result.cell(m, epsilon=e).mean for e in (1.0, 2.0, 3.0, 4.0)]
        if any(a > b for a, b in zip(series, series[1:])):
            non_monotone.append((m.value, series))
    checks["eps-monotone"] = not non_monotone
    checks["runtime<10min"] = elapsed < 600

    passed = all(checks.values())
    failed = [k for k, ok in checks.items() if not ok]
    means = ", ".join(f"{k}={v:.1f}" for k, v in mean.items())
    record_criterion(7, passed, f"means at eps=3: {means}; PL/WL={ratio_l:.3f}, "
                                f"PG/WG={ratio_g:.3f}; failed checks={failed}; "
                                f"non-monotone={non_monotone}; runtime {elapsed:.0f}s")
    assert passed, f"failed sub-checks: {failed}"


def test_criterion_8_delta0_one(record_criterion, frozen_corpus):
    laplace = (Mechanism.COUNT_LAPLACE, Mechanism.WEIGHTED_LAPLACE, Mechanism.POLICY_LAPLACE)
    spec = ExperimentSpec(mechanisms=laplace, epsilons=(3.0,), delta=DELTA, delta0s=(1,),
                          alphas=(5.0,), shuffles=SHUFFLES, synth=FROZEN_SYNTH)
    result = run_grid(spec, db=frozen_corpus)
    means = {m.value: result.cell(m).mean for m in laplace}
    spread = (max(means.values()) - min(means.values())) / min(means.values())
    passed = spread <= 0.02
    record_criterion(8, passed, f"means at delta0=1: {means}; relative spread {spread:.4f}")
    assert passed


# -- 9 ------------------------------------------------------------------------

def test_criterion_9_determinism(record_criterion, tmp_path):
    spec = {
        "mechanisms": [m.value for m in PRIVATE_MECHANISMS],
        "epsilons": [1.0, 3.0],
        "delta0s": [1, 20],
        "alphas": [2.0, 5.0],
        "shuffles": 2,
        "synth": {"users": 3000, "vocab": 8000, "exponent": 1.0, "seed": 7},
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec), encoding="utf-8")
    outputs = []
    for run, workers in enumerate(("1", "2")):
        env = dict(os.environ, DPSU_WORKERS=workers)
        for ext in ("json", "csv", "md"):
            out = tmp_path / f"run{run}.{ext}"
            subprocess.run([sys.executable, "-m", "dpsu.cli", "grid", "--spec", str(spec_path),
                            "--out", str(out)], check=True, env=env)
        outputs.append({ext: (tmp_path / f"run{run}.{ext}").read_bytes()
                        for ext in ("json", "csv", "md")})
    same = {ext: outputs[0][ext] == outputs[1][ext] for ext in ("json", "csv", "md")}
    passed = all(same.values())
    record_criterion(9, passed, f"byte-identical across two grid executions "
                                f"(1 vs 2 workers): {same}")
    assert passed
