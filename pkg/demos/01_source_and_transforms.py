"""
Synthetic RO arrays and how well each transform decorrelates them
=================================================================
"""

# %%
import numpy as np
from ropuf import source, transforms

model = source.SourceModel.exponential(16, 16, sigma2=1500.0**2, rho=0.97)
data = source.synth_dataset(model, 200, 2, seed=1)
print(data.n_devices, "devices,", data.measurements[0].shape[0], "measurements each")

# %% neighbouring ROs are strongly correlated in the raw domain
x = data.measurement(0).reshape(200, -1)
c = np.corrcoef(x.T)
print("corr(RO 0, RO 1) =", round(c[0, 1], 3), " corr(RO 0, RO 255) =", round(c[0, 255], 3))

# %% decorrelation efficiency on the model covariance
for kind in ("dct", "dwht", "dht"):
    tr = transforms.get_transform(kind)
    ct = transforms.transform_covariance(tr, model.cov, 16, 16)
    print(kind, round(transforms.decorrelation_efficiency(ct, model.cov), 5))
klt = transforms.klt_fit(model.cov)
ct = transforms.transform_covariance(klt, model.cov, 16, 16)
print("klt", round(transforms.decorrelation_efficiency(ct, model.cov), 6))

# %% energy compaction: most variance lands in a few coefficients
stats = source.model_stats(model, transforms.DCT)
var = np.sort(stats.sigma[1:] ** 2)[::-1]
print("top 10 coefficients hold", round(var[:10].sum() / var.sum(), 3), "of the non-DC variance")
