#!/usr/bin/env python
# coding: utf-8

# # What the synthetic corpus looks like

# In[1]:

import math

from dpsu import (MechanismConfig, PrivacyParams, corpus_stats, k_anonymity_baseline,
                  run_dpsu, synth_zipf_corpus, tokenize)

print(tokenize("See https://example.com now, the CAT sat!", 1))
print(tokenize("the cat sat on the mat", 2))


# Item popularity should follow a power law with exponent near 1, and most
# users should hold well under a hundred items.

# In[2]:

db = synth_zipf_corpus(20000, 50000, 1.0, seed=7)
stats = corpus_stats(db)
print("users", stats.n_users, "items", stats.n_items)
print("fitted exponent", round(stats.zipf_exponent_fit, 3))
for t, frac in stats.set_size_percentiles.items():
    print(f"|W| <= {t:3d}: {100 * frac:6.2f}%")
print("top ranks", stats.rank_frequency[:5])


# How a private release compares with the non-private rule "keep items
# that at least k users hold".

# In[3]:

params = PrivacyParams(3.0, math.exp(-10))
rep = run_dpsu(db, MechanismConfig("policy-gaussian", delta0=100, seed=0), params)
for k in (5, 10, 15, 20, 25):
    size, coverage = k_anonymity_baseline(db, k, rep.released)
    print(f"k={k:2d}  |S_k|={size:6d}  coverage={100 * coverage:6.1f}%")
