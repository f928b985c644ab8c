#!/usr/bin/env python
# coding: utf-8

# # How a user spends their budget
#
# Each user gets one unit of l1 (Laplace) or l2 (Gaussian) budget. The
# baselines spread it blindly; the descent policies pour it into items that
# are still short of the cutoff.

# In[1]:

from dpsu import (count_update, greedy_update, l1_descent_update, l2_descent_update,
                  weighted_update)
from dpsu.core import Norm, lp_distance

h = {"a": 4.8, "b": 3.0, "c": 0.2}
w = {"a", "b", "d"}
gamma = 5.0

print("count (delta0=4)  ", count_update(h, w, 4))
print("weighted l1       ", weighted_update(h, w, Norm.L1))
print("l1-descent        ", l1_descent_update(h, w, gamma))
print("l2-descent        ", l2_descent_update(h, w, gamma))


# Water-filling: all three items rise by 0.2 until a hits the cutoff,
# then the leftover 0.4 is split between b and d.

# In[2]:

out = l1_descent_update(h, w, gamma)
print({u: round(out[u] - h.get(u, 0.0), 4) for u in sorted(w)})
print("l1 change:", lp_distance(out, h, Norm.L1))


# Why the descent policies are safe: two histograms that differ by at most
# 1 (with h1 >= h2) stay that way after any user's update.

# In[3]:

h1 = {"a": 4.6, "b": 2.5}
h2 = {"a": 3.9, "b": 2.3}
for user_set in ({"a"}, {"b"}, {"a", "b"}, {"a", "b", "c"}):
    g1, g2 = l1_descent_update(h1, user_set, gamma), l1_descent_update(h2, user_set, gamma)
    print(sorted(user_set), "before", round(lp_distance(h1, h2), 3),
          "after", round(lp_distance(g1, g2), 3))


# The greedy policy fills the smallest gap first. That looks similar but a
# one-unit head start flips where everyone else's budget goes.

# In[4]:

h1, h2 = {"u1": 2.0, "u2": 1.5}, {"u1": 1.0, "u2": 1.5}
g1, g2 = greedy_update(h1, {"u1", "u2"}, 100), greedy_update(h2, {"u1", "u2"}, 100)
print("greedy:", g1, g2, "distance", lp_distance(g1, g2))
