"""Shared data types and elementary histogram operations."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

# Single tolerance for budget accounting in the water-filling loops.
EPS_BUDGET = 1e-12


class Norm(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"


class Mechanism(str, enum.Enum):
    """Set-union mechanisms. Values double as CLI spellings."""

    COUNT_LAPLACE = "count-laplace"
    COUNT_GAUSSIAN = "count-gaussian"
    WEIGHTED_LAPLACE = "weighted-laplace"
    WEIGHTED_GAUSSIAN = "weighted-gaussian"
    POLICY_LAPLACE = "policy-laplace"
    POLICY_GAUSSIAN = "policy-gaussian"
    GREEDY_DEMO = "greedy-demo"

    @property
    def norm(self) -> Norm:
        if self in (Mechanism.COUNT_GAUSSIAN, Mechanism.WEIGHTED_GAUSSIAN,
                    Mechanism.POLICY_GAUSSIAN):
            return Norm.L2
        return Norm.L1

    @property
    def is_policy(self) -> bool:
        return self in (Mechanism.POLICY_LAPLACE, Mechanism.POLICY_GAUSSIAN,
                        Mechanism.GREEDY_DEMO)


PRIVATE_MECHANISMS = tuple(m for m in Mechanism if m is not Mechanism.GREEDY_DEMO)


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    items: frozenset

    def __post_init__(self):
        if not isinstance(self.items, frozenset):
            object.__setattr__(self, "items", frozenset(self.items))


@dataclass(frozen=True)
class Database:
    """An ordered collection of users, each holding a non-empty item set."""

    users: tuple = ()

    def __post_init__(self):
        users = tuple(self.users)
        object.__setattr__(self, "users", users)
        seen = set()
        for user in users:
            if user.user_id in seen:
                raise ValueError(f"duplicate user id {user.user_id!r}")
            if not user.items:
                raise ValueError(f"user {user.user_id!r} has an empty item set")
            seen.add(user.user_id)

    @classmethod
    def from_mapping(cls, sets: Mapping[str, Iterable[str]]) -> "Database":
        return cls(tuple(UserRecord(uid, frozenset(items)) for uid, items in sets.items()))

    def __len__(self) -> int:
        return len(self.users)

    def __iter__(self):
        return iter(self.users)

    def without(self, user_id: str) -> "Database":
        return Database(tuple(u for u in self.users if u.user_id != user_id))

    def union(self) -> set:
        out = set()
        for user in self.users:
            out.update(user.items)
        return out

    def canonical(self) -> "Database":
        """Users sorted by id; useful for equality checks that ignore input order."""
        return Database(tuple(sorted(self.users, key=lambda u: u.user_id)))


class WeightedHistogram(dict):
    """Item -> weight map. Absent items read as 0.0; stored weights are > 0.

    Reading a missing key does not insert it, so ``h[u]`` is safe inside
    update loops. Writers are expected to store only positive finite weights;
    :meth:`validate` checks that.
    """

    def __missing__(self, key):
        return 0.0

    def copy(self) -> "WeightedHistogram":
        return WeightedHistogram(self)

    @property
    def support(self) -> set:
        return set(self)

    def validate(self) -> None:
        for item, weight in self.items():
            if not (math.isfinite(weight) and weight > 0):
                raise ValueError(f"invalid weight {weight!r} for item {item!r}")

    def __repr__(self) -> str:
        return f"WeightedHistogram({dict.__repr__(self)})"


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not (0 < self.delta < 1):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class MechanismConfig:
    mechanism: Mechanism
    delta0: int = 100
    alpha: float = 5.0
    seed: int = 0
    passes: int = 1
    experimental: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.passes < 1:
            raise ValueError("passes must be at least 1")


def lp_distance(h1: Mapping, h2: Mapping, p=Norm.L1) -> float:
    """l1 or l2 distance between two histograms over the union of supports."""
    p = Norm(p)
    keys = set(h1) | set(h2)
    diffs = [abs(h1.get(u, 0.0) - h2.get(u, 0.0)) for u in keys]
    if p is Norm.L1:
        return math.fsum(diffs)
    return math.hypot(*diffs)


def dominates(h1: Mapping, h2: Mapping) -> bool:
    """True iff h1[u] >= h2[u] on every item of either support."""
    return all(h1.get(u, 0.0) >= h2.get(u, 0.0) for u in set(h1) | set(h2))
