#!/usr/bin/env python
# coding: utf-8

# # Sweeps over epsilon, alpha and passes
#
# Hyperparameter sweeps are not private: picking the best cell after looking
# at results costs extra privacy. The reports say so.

# In[1]:

from dpsu.experiments import (ExperimentSpec, SynthSpec, compare_passes, run_grid,
                              to_markdown)

synth = SynthSpec(users=5000, vocab=15000, seed=7)
db = synth.build()

spec = ExperimentSpec(
    mechanisms=("weighted-laplace", "policy-laplace", "weighted-gaussian", "policy-gaussian"),
    epsilons=(1.0, 2.0, 3.0, 4.0), delta0s=(50,), shuffles=2, synth=synth)
result = run_grid(spec, db=db)
for mech in spec.mechanisms:
    print(mech.value, [result.cell(mech, epsilon=e).mean for e in spec.epsilons])


# Alpha sets how far above rho the cutoff sits. With alpha = 0 items stop
# right at rho, where noise drops half of them. A large alpha keeps pouring
# budget into items that were already safe.

# In[2]:

alphas = (0.0, 1.0, 2.0, 4.0, 6.0)
spec = ExperimentSpec(mechanisms=("policy-laplace", "policy-gaussian"), delta0s=(50,),
                      alphas=alphas, shuffles=2, synth=synth)
result = run_grid(spec, db=db)
for mech in spec.mechanisms:
    print(mech.value, [result.cell(mech, alpha=a).mean for a in alphas])


# One pass versus two half-budget passes, with a Welch t-test.

# In[3]:

spec = ExperimentSpec(mechanisms=("policy-gaussian",), delta0s=(50,), shuffles=4, synth=synth)
result, tests = compare_passes(spec, db=db)
for t in tests:
    print(f"{t['mechanism']}: 1 pass {t['mean_1']:.1f}, 2 passes {t['mean_2']:.1f}, p={t['p']:.3f}")
print(to_markdown(result))
