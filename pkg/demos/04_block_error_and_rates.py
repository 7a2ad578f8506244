"""
Block-error probabilities and rate pairs of the three code designs
==================================================================
"""

# %%
import numpy as np
from ropuf import analysis as an
from ropuf import quantize as q
from ropuf import source, transforms

# %% repetition(3) inner code turns BSC(0.06) into a much cleaner BSC
p_rep = an.repetition_crossover(0.06)
print("rep3 crossover", p_rep, " eBCH block error", an.binomial_tail(256, p_rep, 17))

# %% RM(1,5) inner code: measured erasure/error rates feed the RS outer code
r = an.rm_channel_mc(0.06, 200_000, seed=1)
print("RM erasure", r.p_era, "+-", round(r.se_era, 7), " error", r.p_err, "+-", round(r.se_err, 7))
print("RS(28,22) block error with the long-run rates", an.ee_tail(28, 7, 4.54e-6, 6.57e-5))

# %% BCH(255,131): exact Poisson-binomial tail over the used coefficients
stats = source.model_stats(source.SourceModel.exponential(16, 16), transforms.DCT)
alloc = q.allocate_fixed_errors(stats, 19, force_K=1)
# same allocation, counters 40x noisier than the design assumed
noisy = source.model_stats(source.SourceModel.exponential(16, 16, noise_var=20.0), transforms.DCT)
qv = np.array([1 - q.correctness(1, s) for s in noisy.sigma_n[alloc.used]])
print("average crossover", round(qv.mean(), 5))
print("P[W > 18]  DFT-CF", an.poisson_binomial_tail_dftcf(qv, 18), " DP", an.poisson_binomial_tail_dp(qv, 18))

# %% where the codes sit against the optimal trade-off
p = 0.0097
print("optimal point", an.fc_region(p).optimal)
for name, (k, n) in {"bch255_131": (131, 255), "rm+rs": (132, 896)}.items():
    print(name, an.code_rates(k, n))
for pt in an.cs_region_mgl(p, [0.0, 0.05, 0.1, 0.25, 0.5]):
    print("chosen-secret boundary", round(pt.R_s, 4), round(pt.R_l, 4))
