"""
Fixed-point DWHT and the quantizer ROM
======================================
"""

# %%
import numpy as np
from ropuf import hwmodel as hw
from ropuf import quantize, source, transforms

print(hw.dwht4p(1, 2, 3, 4))
print("odd negative sums round down:", hw.dwht4p(-3, 0, 0, 0))

# %% bit growth over the four passes on the extreme inputs
_, trace = hw.dwht2d_fixed(hw.corner_arrays(), trace=True)
print("pre-shift widths", trace.sum_bits, " stored widths", trace.stored_bits)

# %% distance from the exact transform on random counter values
x = np.random.default_rng(0).integers(-(1 << 15), 1 << 15, (20000, 16, 16))
err = np.abs(hw.dwht2d_fixed(x) - transforms.forward(transforms.DWHT, x.astype(float)))
print("max error", err.max(), " bound", hw.truncation_bound(), " mean", round(err.mean(), 3))

# %% counter sizing and the boundary ROM
print("T_min =", round(hw.counter_overload_time(16, 500e6) * 1e6, 2), "us")
stats = source.model_stats(source.SourceModel.exponential(16, 16), transforms.DWHT)
K = np.ones(256, dtype=int)
K[0] = 0
rom = hw.quantizer_rom(quantize.BitAllocation(K, "fixed_errors"), stats)
print(rom.n_words, "words,", rom.total_bytes, "bytes")
