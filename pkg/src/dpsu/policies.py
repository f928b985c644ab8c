"""Update policies: how one user's budget is spread over their items.

Every policy only touches items of the user's set and never decreases a
weight. The public functions are pure (they return a new histogram); the
``_*_inplace`` variants mutate and are what the histogram builder calls.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from dpsu.core import Mechanism, Norm, WeightedHistogram


class PolicyKind(str, enum.Enum):
    COUNT_L1 = "count-l1"
    COUNT_L2 = "count-l2"
    WEIGHTED_L1 = "weighted-l1"
    WEIGHTED_L2 = "weighted-l2"
    L1_DESCENT = "l1-descent"
    L2_DESCENT = "l2-descent"
    GREEDY = "greedy"

    @property
    def norm(self) -> Norm:
        if self in (PolicyKind.COUNT_L2, PolicyKind.WEIGHTED_L2, PolicyKind.L2_DESCENT):
            return Norm.L2
        return Norm.L1

    @property
    def uses_gamma(self) -> bool:
        return self in (PolicyKind.L1_DESCENT, PolicyKind.L2_DESCENT, PolicyKind.GREEDY)


MECHANISM_POLICY = {
    Mechanism.COUNT_LAPLACE: PolicyKind.COUNT_L1,
    Mechanism.COUNT_GAUSSIAN: PolicyKind.COUNT_L2,
    Mechanism.WEIGHTED_LAPLACE: PolicyKind.WEIGHTED_L1,
    Mechanism.WEIGHTED_GAUSSIAN: PolicyKind.WEIGHTED_L2,
    Mechanism.POLICY_LAPLACE: PolicyKind.L1_DESCENT,
    Mechanism.POLICY_GAUSSIAN: PolicyKind.L2_DESCENT,
    Mechanism.GREEDY_DEMO: PolicyKind.GREEDY,
}


def _gaps(h, w, gamma):
    """(gap, item) pairs for items strictly below the cutoff, sorted."""
    return sorted((gamma - h[u], u) for u in w if h[u] < gamma)


def _l1_descent_inplace(h, w, gamma, budget=1.0):
    gaps = _gaps(h, w, gamma)
    k = len(gaps)
    remaining = budget
    raised = 0.0  # common increment applied to every still-active item
    saturated = 0
    for gap, _ in gaps:
        step = gap - raised
        cost = step * (k - saturated)
        if cost <= remaining:
            raised = gap
            remaining -= cost
            saturated += 1
        else:
            raised += remaining / (k - saturated)
            break
    for j, (gap, u) in enumerate(gaps):
        if j < saturated:
            h[u] = gamma
        elif raised > 0:
            h[u] = min(gamma, h[u] + raised)
    return h


def _l2_descent_inplace(h, w, gamma, budget=1.0):
    # Items already at or above the cutoff get a zero gap, never a negative one.
    gaps = [(gamma - h[u], u) for u in w if h[u] < gamma]
    if not gaps:
        return h
    z = math.hypot(*(g for g, _ in gaps))
    if z < budget:
        for _, u in gaps:
            h[u] = gamma
    else:
        scale = budget / z
        for g, u in gaps:
            h[u] = min(gamma, h[u] + scale * g)
    return h


def _weighted_inplace(h, w, p, budget=1.0):
    n = len(w)
    if n == 0:
        return h
    inc = budget / n if Norm(p) is Norm.L1 else budget / math.sqrt(n)
    for u in w:
        h[u] = h[u] + inc
    return h


def _count_inplace(h, w, delta0, p, budget=1.0):
    if len(w) > delta0:
        raise ValueError(f"item set of size {len(w)} exceeds delta0={delta0}; cap first")
    if not w:
        return h
    inc = budget / delta0 if Norm(p) is Norm.L1 else budget / math.sqrt(delta0)
    for u in w:
        h[u] = h[u] + inc
    return h


def _greedy_inplace(h, w, gamma, budget=1.0):
    remaining = budget
    for gap, u in _gaps(h, w, gamma):
        if remaining <= 0:
            break
        if gap <= remaining:
            h[u] = gamma
            remaining -= gap
        else:
            h[u] = h[u] + remaining
            break
    return h


def _fresh(h):
    return WeightedHistogram(h)


def l1_descent_update(h, w, gamma, budget=1.0):
    """Water-filling: raise the below-cutoff items of ``w`` uniformly.

    Items that reach ``gamma`` are frozen and the rest of the budget keeps
    flowing to the others. Total l1 change is at most ``budget``.
    """
    return _l1_descent_inplace(_fresh(h), w, gamma, budget)


def l2_descent_update(h, w, gamma, budget=1.0):
    """Move ``h`` restricted to ``w`` towards (gamma, ..., gamma) by l2 distance ``budget``."""
    return _l2_descent_inplace(_fresh(h), w, gamma, budget)


def weighted_update(h, w, p=Norm.L1, budget=1.0):
    """Add budget/|w| (l1) or budget/sqrt(|w|) (l2) to each item of ``w``."""
    return _weighted_inplace(_fresh(h), w, p, budget)


def count_update(h, w, delta0, p=Norm.L1, budget=1.0):
    """Normalized count: add budget/delta0 (l1) or budget/sqrt(delta0) (l2) per item."""
    return _count_inplace(_fresh(h), w, delta0, p, budget)


def greedy_update(h, w, gamma, budget=1.0):
    """Fill the items closest to the cutoff first. Not contractive; for demos only."""
    return _greedy_inplace(_fresh(h), w, gamma, budget)


@dataclass(frozen=True)
class UpdatePolicy:
    kind: PolicyKind
    gamma: float = math.inf
    delta0: int = 1
    budget: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if self.kind.uses_gamma and not self.gamma > 0:
            raise ValueError(f"{self.kind.value} needs a positive cutoff, got {self.gamma}")
        if not 0 < self.budget <= 1:
            raise ValueError(f"budget must lie in (0, 1], got {self.budget}")
        if self.delta0 < 1:
            raise ValueError("delta0 must be at least 1")

    @property
    def norm(self) -> Norm:
        return self.kind.norm

    def with_budget(self, budget: float) -> "UpdatePolicy":
        return UpdatePolicy(self.kind, self.gamma, self.delta0, budget)

    def update(self, h, w):
        """Apply the policy to ``h`` in place and return it."""
        kind = self.kind
        if kind is PolicyKind.L1_DESCENT:
            return _l1_descent_inplace(h, w, self.gamma, self.budget)
        if kind is PolicyKind.L2_DESCENT:
            return _l2_descent_inplace(h, w, self.gamma, self.budget)
        if kind is PolicyKind.WEIGHTED_L1 or kind is PolicyKind.WEIGHTED_L2:
            return _weighted_inplace(h, w, kind.norm, self.budget)
        if kind is PolicyKind.COUNT_L1 or kind is PolicyKind.COUNT_L2:
            return _count_inplace(h, w, self.delta0, kind.norm, self.budget)
        return _greedy_inplace(h, w, self.gamma, self.budget)

    def apply(self, h, w):
        return self.update(_fresh(h), w)


def policy_for(mechanism, gamma=math.inf, delta0=1, budget=1.0) -> UpdatePolicy:
    return UpdatePolicy(MECHANISM_POLICY[Mechanism(mechanism)], gamma, delta0, budget)
