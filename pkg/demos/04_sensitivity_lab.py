#!/usr/bin/env python
# coding: utf-8

# # Checking sensitivity by deleting users
#
# Remove one user, rebuild with the same seed, and measure how far the
# histogram moved on the items both versions share.

# In[1]:

from dpsu import MechanismConfig, synth_zipf_corpus
from dpsu.ingestion import LognormalSetSize
from dpsu.sensitivity import (audit_policy, empirical_sensitivity, greedy_counterexample,
                              neighbor_diffs)

db = synth_zipf_corpus(50, 20, 1.0, LognormalSetSize(1.2, 0.8), seed=11)

for mech in ("count-laplace", "weighted-gaussian", "policy-laplace", "policy-gaussian"):
    gap, worst = empirical_sensitivity(db, MechanismConfig(mech, delta0=5), gamma=2.0)
    print(f"{mech:18s} max gap {gap:.12f} (removing {worst.removed_user})")


# Items that only the deleted user held must each carry little weight:
# at most 1/|T| in l1, or 1/sqrt(|T|) in l2.

# In[2]:

for d in neighbor_diffs(db, MechanismConfig("policy-gaussian", delta0=5), gamma=2.0):
    if len(d.new_items) > 1:
        print(d.removed_user, sorted(d.new_items), round(d.new_item_max, 4),
              "<=", round(d.new_item_bound, 4))


# Random contraction trials, as `dpsu audit` runs them.

# In[3]:

for kind in ("l1-descent", "l2-descent", "greedy"):
    res = audit_policy(kind, 3000)
    print(kind, res["verdict"], res["passed"], "/", res["trials"])


# The greedy policy's gap grows by 2 for each user after the deleted one.

# In[4]:

for n in (6, 10, 20, 40):
    gap, _ = greedy_counterexample(n, n // 2, 10 * n)
    print(f"n={n:2d}  l1 gap {gap:g}")
