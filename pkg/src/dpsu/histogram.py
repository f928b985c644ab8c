"""Weighted histogram construction: hash ordering, capping, sequential updates."""

from __future__ import annotations

import random
from dataclasses import dataclass

from dpsu._hashing import keyed_hash128
from dpsu.core import Database, MechanismConfig, WeightedHistogram
from dpsu.policies import UpdatePolicy


@dataclass(frozen=True)
class OrderedDatabase:
    users: tuple

    def __len__(self):
        return len(self.users)

    def __iter__(self):
        return iter(self.users)


def order_users(db: Database, seed: int) -> OrderedDatabase:
    """Sort users by a keyed 128-bit hash of their id; ties go to the smaller id.

    The resulting permutation depends only on ``seed`` and the set of ids,
    never on the order in which users were supplied.
    """
    key = lambda u: (keyed_hash128(seed, "order", u.user_id), u.user_id)
    return OrderedDatabase(tuple(sorted(db.users, key=key)))


def cap_user_set(w, delta0: int, user_id: str, seed: int) -> frozenset:
    """Return ``w`` itself, or a uniform ``delta0``-subset when it is larger.

    The subset is drawn from a stream keyed by (seed, user_id), so a user's
    contribution does not depend on who else is in the database.
    """
    if delta0 < 1:
        raise ValueError("delta0 must be at least 1")
    if len(w) <= delta0:
        return frozenset(w)
    rng = random.Random(keyed_hash128(seed, "cap", user_id))
    return frozenset(rng.sample(sorted(w), delta0))


def _capped_sequence(ordered, delta0, seed):
    return [cap_user_set(u.items, delta0, u.user_id, seed) for u in ordered]


def apply_policy(sets, policy: UpdatePolicy, passes: int = 1, histogram=None):
    """Run ``policy`` over already-ordered, already-capped item sets.

    With ``passes > 1`` the sequence is repeated and each update gets
    ``policy.budget / passes``.
    """
    h = WeightedHistogram() if histogram is None else histogram
    if passes > 1:
        policy = policy.with_budget(policy.budget / passes)
    for _ in range(passes):
        for w in sets:
            policy.update(h, w)
    return h


def build_histogram(db: Database, config: MechanismConfig, policy: UpdatePolicy,
                    cutoff: float | None = None) -> WeightedHistogram:
    """Build the weighted histogram for ``db`` under ``policy``.

    Args:
      db: the user database.
      config: supplies ``delta0``, ``seed`` and ``passes``.
      policy: the update policy. Its cutoff is used unless ``cutoff`` is given.
      cutoff: optional override of the policy cutoff.

    Returns:
      The histogram after every user (in hash order) has applied one update
      per pass.
    """
    if config.delta0 < 1:
        raise ValueError(f"delta0 must be at least 1, got {config.delta0}")
    if cutoff is not None and cutoff != policy.gamma:
        policy = UpdatePolicy(policy.kind, cutoff, policy.delta0, policy.budget)
    ordered = order_users(db, config.seed)
    sets = _capped_sequence(ordered, config.delta0, config.seed)
    return apply_policy(sets, policy, config.passes)
