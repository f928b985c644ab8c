"""Empirical checks of bounded sensitivity and policy contraction.

Neighboring databases are compared by deleting one user and rebuilding with
the same seed, so every remaining user keeps its hash position and its
capped item set. The greedy policy is included as a negative control: a
forced-order construction shows its l1 sensitivity grows linearly with the
number of users that follow the deleted one.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from dpsu.calibration import calibrate
from dpsu.core import (EPS_BUDGET, Database, Mechanism, MechanismConfig, Norm,
                       PrivacyParams, WeightedHistogram, lp_distance)
from dpsu.histogram import _capped_sequence, apply_policy, order_users
from dpsu.policies import PolicyKind, UpdatePolicy, policy_for

DEFAULT_PARAMS = PrivacyParams(3.0, math.exp(-10))


@dataclass
class NeighborDiff:
    removed_user: str
    h_full: WeightedHistogram
    h_minus: WeightedHistogram
    new_items: frozenset
    lp_gap: float  # distance restricted to supp(h_minus)
    full_gap: float  # distance over the union of supports
    norm: Norm = Norm.L1

    @property
    def new_item_max(self) -> float:
        return max((self.h_full[u] for u in self.new_items), default=0.0)

    @property
    def new_item_bound(self) -> float:
        """1/|T| (l1) or 1/sqrt(|T|) (l2); infinite when T is empty."""
        t = len(self.new_items)
        if t == 0:
            return math.inf
        return 1.0 / t if self.norm is Norm.L1 else 1.0 / math.sqrt(t)


def _restricted_distance(h_full, h_minus, p):
    return lp_distance({u: h_full[u] for u in h_minus}, h_minus, p)


def _default_gamma(config: MechanismConfig, params: PrivacyParams) -> float:
    mech = config.mechanism
    if mech is Mechanism.GREEDY_DEMO:
        mech = Mechanism.POLICY_LAPLACE
    return calibrate(mech, params, config.delta0, config.alpha).gamma


def _resolve_policy(config, gamma, params):
    if gamma is None:
        gamma = _default_gamma(config, params or DEFAULT_PARAMS)
    return policy_for(config.mechanism, gamma=gamma, delta0=config.delta0)


def neighbor_diffs(db: Database, config: MechanismConfig, p=None, mode="all", *,
                   gamma=None, params=None, sample_seed=0):
    """Yield a :class:`NeighborDiff` for each deleted user.

    ``mode`` is ``"all"`` or an integer k for k users sampled without
    replacement. ``gamma`` defaults to the cutoff calibrated from ``params``
    (epsilon=3, delta=e^-10 when omitted).
    """
    if len(db) < 2:
        raise ValueError("need at least two users")
    policy = _resolve_policy(config, gamma, params)
    p = Norm(p) if p is not None else policy.norm
    ordered = order_users(db, config.seed)
    sets = _capped_sequence(ordered, config.delta0, config.seed)
    ids = [u.user_id for u in ordered]

    h_full = apply_policy(sets, policy, config.passes)
    if mode == "all":
        positions = list(range(len(sets)))
    else:
        positions = sorted(random.Random(sample_seed).sample(range(len(sets)), int(mode)))

    # Deleting user t leaves the first t updates untouched, so replay only the suffix.
    prefix = WeightedHistogram()
    done = 0
    for t in positions:
        if config.passes == 1:
            apply_policy(sets[done:t], policy, 1, histogram=prefix)
            done = t
            h_minus = apply_policy(sets[t + 1:], policy, 1, histogram=prefix.copy())
        else:
            h_minus = apply_policy(sets[:t] + sets[t + 1:], policy, config.passes)
        yield NeighborDiff(
            removed_user=ids[t],
            h_full=h_full,
            h_minus=h_minus,
            new_items=frozenset(set(h_full) - set(h_minus)),
            lp_gap=_restricted_distance(h_full, h_minus, p),
            full_gap=lp_distance(h_full, h_minus, p),
            norm=p,
        )


def empirical_sensitivity(db: Database, config: MechanismConfig, p=None, mode="all", *,
                          gamma=None, params=None, sample_seed=0):
    """Largest neighbor gap on supp(h_minus), plus the diff that attains it."""
    worst = None
    for diff in neighbor_diffs(db, config, p, mode, gamma=gamma, params=params,
                               sample_seed=sample_seed):
        if worst is None or diff.lp_gap > worst.lp_gap:
            worst = diff
    return worst.lp_gap, worst


# -- contraction trials -------------------------------------------------------

def random_pair(rng: np.random.Generator, p, gamma: float, size: int | None = None,
                dominated: bool | None = None):
    """A random histogram pair inside the invariant set of the ``p`` policy.

    Differences are drawn on the l_p unit sphere then scaled by U[0, 1]. For
    l1 the difference is non-negative so that h1 >= h2 pointwise. Both
    histograms stay inside [0, gamma].
    """
    p = Norm(p)
    size = size or int(rng.integers(1, 11))
    if dominated is None:
        dominated = p is Norm.L1
    if dominated:
        d = rng.exponential(size=size)
        d /= d.sum() if p is Norm.L1 else np.linalg.norm(d)
    else:
        d = rng.normal(size=size)
        d /= np.abs(d).sum() if p is Norm.L1 else np.linalg.norm(d)
    d *= rng.uniform()
    low = np.maximum(0.0, -d)
    high = gamma - np.maximum(0.0, d)
    base = rng.uniform(low, high)
    items = [f"i{j}" for j in range(size)]
    h1 = WeightedHistogram({u: v for u, v in zip(items, base + d) if v > 0})
    h2 = WeightedHistogram({u: v for u, v in zip(items, base) if v > 0})
    return h1, h2


def pair_stays_invariant(policy: UpdatePolicy, h1, h2, w, p=None) -> bool:
    """Apply ``policy`` to both histograms and test the invariant-set conditions.

    l1: h1' >= h2' and ||h1' - h2'||_1 <= ||h1 - h2||_1 (hence <= 1).
    l2: ||h1' - h2'||_2 <= ||h1 - h2||_2 (hence <= 1).
    All comparisons allow EPS_BUDGET.
    """
    p = Norm(p) if p is not None else policy.norm
    before = lp_distance(h1, h2, p)
    g1, g2 = policy.apply(h1, w), policy.apply(h2, w)
    after = lp_distance(g1, g2, p)
    ok = after <= min(before, 1.0) + EPS_BUDGET
    if p is Norm.L1:
        ok = ok and all(g1[u] >= g2[u] - EPS_BUDGET for u in set(g1) | set(g2))
    return ok


def _trial_case(policy: UpdatePolicy, p, rng_seed, delta0):
    rng = np.random.default_rng(rng_seed)
    h1, h2 = random_pair(rng, p, policy.gamma)
    pool = sorted(set(h1) | set(h2)) + ["fresh0", "fresh1"]
    k = int(rng.integers(1, min(delta0, len(pool)) + 1))
    w = frozenset(rng.choice(pool, size=k, replace=False).tolist())
    return h1, h2, w


def _as_policy(policy, gamma, delta0):
    if not isinstance(policy, UpdatePolicy):
        policy = UpdatePolicy(PolicyKind(policy), gamma=gamma, delta0=delta0)
    if policy.kind not in (PolicyKind.L1_DESCENT, PolicyKind.L2_DESCENT, PolicyKind.GREEDY):
        raise ValueError("contraction trials cover l1-descent, l2-descent and greedy")
    return policy


def contraction_trial(policy, p=None, rng_seed: int = 0, *, gamma: float = 10.0,
                      delta0: int = 10) -> bool:
    """One random invariant-set pair, one random user set, one policy step.

    ``policy`` is a :class:`PolicyKind` (or an :class:`UpdatePolicy`, whose
    cutoff then overrides ``gamma``).
    """
    policy = _as_policy(policy, gamma, delta0)
    p = Norm(p) if p is not None else policy.norm
    h1, h2, w = _trial_case(policy, p, rng_seed, delta0)
    return pair_stays_invariant(policy, h1, h2, w, p)


def greedy_local_configuration(x: float = 1.0, y: float = 1.5):
    """h1 = {u1: x+1, u2: y}, h2 = {u1: x, u2: y} with x < y < x+1, user set {u1, u2}."""
    if not x < y < x + 1:
        raise ValueError("need x < y < x + 1")
    h1 = WeightedHistogram({"u1": x + 1, "u2": y})
    h2 = WeightedHistogram({"u1": x, "u2": y})
    return h1, h2, frozenset({"u1", "u2"})


# -- greedy blow-up -----------------------------------------------------------

# Weights before the deleted user: u1 < u2 < u1 + 1. Integer-step greedy
# updates from an empty histogram can never produce this, so the
# construction starts from this state.
_GREEDY_SEED_STATE = {"u1": 0.5, "u2": 1.0}


def _build_forced(sets, policy, initial):
    return apply_policy(sets, policy, 1, histogram=WeightedHistogram(initial))


def greedy_counterexample(n: int, i: int, gamma: float):
    """l1 gap between greedy histograms built with and without user ``i``.

    Users 1..i-1 each hold a private padding item, user i holds {u1} and users
    i+1..n hold {u1, u2}; the order is forced (no hashing). With user i, u1
    gets ahead and every follower piles onto it; without, they all pile onto
    u2, giving a gap of 1 + 2 (n - i).

    Returns:
      (l1_gap, NeighborDiff)
    """
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= n, got i={i}, n={n}")
    if not gamma > n + 2:
        raise ValueError(f"gamma={gamma} too small: weights would saturate (need > n + 2)")
    policy = UpdatePolicy(PolicyKind.GREEDY, gamma=gamma, delta0=2)
    sets = [frozenset({f"pad{j}"}) for j in range(1, i)]
    sets.append(frozenset({"u1"}))
    sets.extend(frozenset({"u1", "u2"}) for _ in range(i + 1, n + 1))
    h1 = _build_forced(sets, policy, _GREEDY_SEED_STATE)
    h2 = _build_forced(sets[:i - 1] + sets[i:], policy, _GREEDY_SEED_STATE)
    gap = lp_distance(h1, h2, Norm.L1)
    diff = NeighborDiff(
        removed_user=f"user{i}", h_full=h1, h_minus=h2,
        new_items=frozenset(set(h1) - set(h2)),
        lp_gap=_restricted_distance(h1, h2, Norm.L1), full_gap=gap, norm=Norm.L1)
    return gap, diff


def audit_policy(kind, trials: int, base_seed: int = 0, gamma: float = 10.0,
                 delta0: int = 10) -> dict:
    """Run ``trials`` contraction trials and summarize them as a JSON-ready dict."""
    policy = _as_policy(kind, gamma, delta0)
    p = policy.norm
    passed = 0
    worst = None
    for s in range(base_seed, base_seed + trials):
        h1, h2, w = _trial_case(policy, p, s, delta0)
        passed += pair_stays_invariant(policy, h1, h2, w, p)
        growth = (lp_distance(policy.apply(h1, w), policy.apply(h2, w), p)
                  - lp_distance(h1, h2, p))
        if worst is None or growth > worst["gap_growth"]:
            worst = {"seed": s, "gap_growth": growth, "items": sorted(w),
                     "h1": dict(h1), "h2": dict(h2)}
    failed = trials - passed
    return {
        "policy": policy.kind.value,
        "norm": p.value,
        "trials": trials,
        "passed": passed,
        "failed": failed,
        "verdict": "pass" if failed == 0 else "fail",
        "worst": worst,
    }
