#!/usr/bin/env python
# coding: utf-8

# # Calibrating noise, threshold and cutoff
#
# Every private mechanism needs three numbers before it touches data: the
# noise scale, the release threshold rho, and (for the policy mechanisms)
# the cutoff Gamma = rho + alpha * scale.

# In[1]:

import math

import numpy as np

from dpsu import PrivacyParams, calibrate, gaussian_sigma, laplace_threshold
from dpsu.calibration import gaussian_threshold, privacy_loss_gap

params = PrivacyParams(epsilon=3.0, delta=math.exp(-10))


# Laplace side. With one item per user the threshold is
# 1 + ln(1/(2 delta)) / epsilon. With more items the 1/t leading term
# shrinks but the per-item failure budget shrinks faster.

# In[2]:

for delta0 in (1, 10, 100, 300):
    tight = laplace_threshold(params, delta0)
    generic = laplace_threshold(params, delta0, tightened=False)
    print(f"delta0={delta0:4d}  rho={tight:.6f}  generic rho={generic:.6f}")


# Gaussian side: sigma is the smallest value with F(sigma) <= delta/2.
# F is decreasing, so we bisect.

# In[3]:

sigma = gaussian_sigma(params)
print("sigma =", sigma)
print("F(sigma) / (delta/2) =", privacy_loss_gap(sigma, 3.0) / (params.delta / 2))

for eps in (0.5, 1, 2, 3, 5):
    print(f"eps={eps}: sigma={gaussian_sigma(PrivacyParams(eps, params.delta)):.4f}")


# In[4]:

rhos = [gaussian_threshold(sigma, params, d) for d in range(1, 201)]
print("Gaussian rho at delta0=1, 50, 200:", rhos[0], rhos[49], rhos[199])
print("nondecreasing:", bool(np.all(np.diff(rhos) >= 0)))


# The full calibration record, as `dpsu calibrate` prints it.

# In[5]:

for mech in ("policy-laplace", "policy-gaussian", "count-gaussian"):
    cal = calibrate(mech, params, delta0=100, alpha=5.0)
    print(mech, {k: cal.to_dict()[k] for k in ("scale", "rho", "gamma")})
