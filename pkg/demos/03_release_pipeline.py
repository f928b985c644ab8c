#!/usr/bin/env python
# coding: utf-8

# # End to end: corpus in, private vocabulary out

# In[1]:

import math
from pathlib import Path

from dpsu import MechanismConfig, PrivacyParams, load_corpus, run_dpsu, synth_zipf_corpus

here = Path(__file__).parent
tiny = load_corpus(here / "data" / "sample.jsonl")
for user in tiny:
    print(user.user_id, sorted(user.items))


# Three users cannot support a private release; nothing comes out.

# In[2]:

params = PrivacyParams(3.0, math.exp(-10))
report = run_dpsu(tiny, MechanismConfig("policy-gaussian", delta0=10, seed=1), params)
print("released:", report.released)


# A synthetic Zipf corpus is large enough to see the mechanisms differ.

# In[3]:

db = synth_zipf_corpus(n_users=8000, vocab_size=20000, zipf_exponent=1.0, seed=7)
print(len(db), "users,", len(db.union()), "distinct items")

sizes = {}
for mech in ("count-laplace", "weighted-laplace", "policy-laplace",
             "count-gaussian", "weighted-gaussian", "policy-gaussian"):
    rep = run_dpsu(db, MechanismConfig(mech, delta0=100, alpha=5.0, seed=0), params)
    sizes[mech] = rep.released_size
    print(f"{mech:18s} released {rep.released_size:5d} of {rep.histogram_support_size} items")


# The report is plain JSON; `dpsu run` writes the same thing.

# In[4]:

rep = run_dpsu(db, MechanismConfig("policy-gaussian", delta0=100, seed=0), params)
d = rep.to_dict()
print({k: d[k] for k in ("mechanism", "epsilon", "delta0", "private", "released_size")})
print("first released items:", d["released"][:10])
