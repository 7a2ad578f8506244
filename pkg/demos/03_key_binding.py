"""
Binding a 128-bit key with BCH(255,131) and recovering it
=========================================================
"""

# %%
import numpy as np
from ropuf import commit, quantize, source, transforms
from ropuf.codes import get_code

# design on the nominal model, then measure with 40x more counter noise
stats = source.model_stats(source.SourceModel.exponential(16, 16), transforms.DCT)
alloc = quantize.allocate_fixed_errors(stats, 19, force_K=1)
data = source.synth_dataset(source.SourceModel.exponential(16, 16, noise_var=20.0), 5, 2, seed=3)
code = get_code("bch255_131")

# %% enrollment on measurement 0, reconstruction from measurement 1
rng = np.random.default_rng(0)
for dev in range(5):
    stack = data.measurements[dev]
    x, y = quantize.extract_bits(stack, transforms.DCT, stats, alloc)
    key = rng.integers(0, 2, 128, dtype=np.uint8)
    helper = commit.enroll(key, x, code, alloc.digest())
    got = commit.reconstruct(helper, y, code, alloc.digest())
    print(dev, "bit errors:", int((x != y).sum()), " key recovered:", np.array_equal(got, key))

# %% the helper file is plain bytes with a readable header
blob = helper.to_bytes()
print(blob[:blob.index(b"\n")].decode())
print(len(blob), "bytes")

# %% another device's bits do not open the helper data
other = quantize.extract_bits(data.measurements[0][1], transforms.DCT, stats, alloc)
try:
    commit.reconstruct(helper, other, code)
except commit.DecodingFailure as exc:
    print("refused:", exc)
