"""
Choosing bits per coefficient
=============================

Two rules: a fixed bit-error rate per coefficient (metric A) and a
fixed number of coefficient errors the code must absorb (metric B).
"""

# %%
import numpy as np
from ropuf import quantize as q
from ropuf import source, transforms

model = source.SourceModel.exponential(16, 16)
stats = source.model_stats(model, transforms.DCT)
print("noise/signal ratio, smallest and largest:", stats.sigma_n[1:].min(), stats.sigma_n[1:].max())

# %% transition matrix of a 2-bit quantizer at sigma_n = 0.1
P = q.transition_matrix(2, 0.1)
print(np.round(P, 4))
print("P_c(2) =", round(q.correctness(2, 0.1), 5), " D(2) =", round(q.hd_metric(2, 0.1), 5))

# %% metric B: thresholds for C_max = 16..20 correctable coefficients
for c in range(16, 21):
    print(c, round(q.correctness_threshold(c, 255), 5))

# %% metric B allocation, one bit per coefficient
alloc = q.allocate_fixed_errors(stats, 19, force_K=1)
print("N =", alloc.N, " e =", alloc.e, " d_min needed =", alloc.d_min_required)

# %% metric A with a loose crossover lets low-noise coefficients carry more bits
alloc_a = q.allocate_fixed_bsc(stats, 0.06)
print("N =", alloc_a.N, " K_max =", alloc_a.k_max, " S_max =", round(q.smax(0.06, alloc_a.N), 1))
