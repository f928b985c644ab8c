"""Differentially private set union with contractive update policies."""

from dpsu.calibration import (CalibrationResult, NoiseKind, calibrate, gaussian_sigma,
                              gaussian_threshold, laplace_threshold, normal_cdf,
                              normal_quantile)
from dpsu.core import (EPS_BUDGET, Database, Mechanism, MechanismConfig, Norm,
                       PrivacyParams, UserRecord, WeightedHistogram, dominates,
                       lp_distance)
from dpsu.histogram import build_histogram, cap_user_set, order_users
from dpsu.ingestion import (corpus_stats, k_anonymity_baseline, load_corpus,
                            synth_zipf_corpus, tokenize)
from dpsu.policies import (PolicyKind, UpdatePolicy, count_update, greedy_update,
                           l1_descent_update, l2_descent_update, policy_for,
                           weighted_update)
from dpsu.release import NoiseSpec, ReleaseReport, release_set, run_dpsu, sample_noise

__version__ = "0.1.0"
