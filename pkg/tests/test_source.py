import io

import numpy as np
import pytest

from ropuf import source as src
from ropuf.transforms import DCT, forward


def test_zero_noise_measurements_identical():
    model = src.SourceModel.exponential(4, 4, noise_var=0.0)
    ds = src.synth_dataset(model, 5, 3, seed=1)
    for m in ds.measurements:
        assert np.array_equal(m[0], m[1]) and np.array_equal(m[1], m[2])


def test_synth_is_deterministic():
    model = src.SourceModel.exponential(4, 4)
    assert src.synth_dataset(model, 6, 2, seed=9) == src.synth_dataset(model, 6, 2, seed=9)
    assert src.synth_dataset(model, 6, 2, seed=9) != src.synth_dataset(model, 6, 2, seed=10)


def test_latents_follow_the_model_covariance():
    model = src.SourceModel.exponential(6, 6)
    lat = src.synth_latents(model, 10000, seed=4)
    c = src.estimate_autocovariance(lat)
    assert np.abs(c - model.cov).max() < 0.05 * np.abs(model.cov).max()
    ds = src.synth_dataset(model, 3, 1, seed=4)
    assert np.allclose(ds.measurement(0).reshape(3, -1), lat[:3] + 0, atol=5)


def test_non_psd_covariance_rejected_with_eigenvalue():
    cov = np.array([[1.0, 2.0], [2.0, 1.0]])
    model = src.SourceModel(1, 2, 0.0, cov)
    with pytest.raises(ValueError, match="eigenvalue -1"):
        src.synth_dataset(model, 2, 1, seed=0)


def test_model_validation():
    with pytest.raises(ValueError):
        src.SourceModel.exponential(4, 4, rho=1.5)
    with pytest.raises(ValueError):
        src.SourceModel(2, 2, 0.0, np.eye(3))
    with pytest.raises(ValueError):
        src.SourceModel(1, 2, 0.0, np.eye(2), noise_var=-1)


def test_stats_two_device_example():
    # a 1x1 array makes every transform the identity
    ds1 = src.RODataset(1, 1, ["a", "b"], [np.array([[[-1.0]], [[-1.0]]]), np.array([[[1.0]], [[1.0]]])])
    st = src.estimate_stats(ds1, DCT)
    assert st.mu[0] == 0.0 and abs(st.sigma[0] - np.sqrt(2)) < 1e-15
    assert not st.usable[0]


def test_stats_paired_noise_example():
    # device a: two measurements {9, 11}; device b sits sqrt(2) away so sigma = 1
    ds = src.RODataset(1, 1, ["a", "b"], [np.array([[[9.0]], [[11.0]]]), np.array([[[10.0 + np.sqrt(2)]]])])
    st = src.estimate_stats(ds, DCT)
    assert abs(st.sigma[0] - 1.0) < 1e-12
    assert abs(st.sigma_n[0] - np.sqrt(2)) < 1e-12


def test_stats_requirements():
    one = src.RODataset(1, 1, ["a"], [np.zeros((2, 1, 1))])
    with pytest.raises(ValueError):
        src.estimate_stats(one, DCT)
    single = src.RODataset(1, 1, ["a", "b"], [np.zeros((1, 1, 1)), np.ones((1, 1, 1))])
    with pytest.raises(ValueError):
        src.estimate_stats(single, DCT)


def test_zero_variance_coefficient_marked_unusable():
    same = np.ones((2, 2, 2))
    ds = src.RODataset(2, 2, ["a", "b"], [same, same.copy()])
    st = src.estimate_stats(ds, DCT)
    assert not st.usable.any()
    assert np.all(st.sigma_n == 0)


def test_noise_estimate_matches_model():
    model = src.SourceModel.exponential(4, 4, noise_var=4.0)
    ds = src.synth_dataset(model, 5000, 2, seed=3)
    st = src.estimate_stats(ds, DCT)
    exact = src.model_stats(model, DCT)
    raw = st.sigma_n * st.sigma
    # 5000 pooled degrees of freedom: about 1% standard error on each estimate
    assert np.all(np.abs(raw - 2.0) < 0.05 * 2.0)
    ok = exact.usable
    assert np.all(np.abs(st.sigma[ok] / exact.sigma[ok] - 1) < 0.05)


def test_mean_estimates_converge():
    model = src.SourceModel.exponential(4, 4)
    exact = src.model_stats(model, DCT)
    errs = []
    for n in (100, 1000, 10000):
        st = src.estimate_stats(src.synth_dataset(model, n, 2, seed=n), DCT)
        errs.append(np.abs(st.mu - exact.mu).mean())
    assert errs[0] > errs[1] > errs[2]


def test_autocovariance_examples():
    assert np.array_equal(src.estimate_autocovariance(np.ones((5, 3))), np.zeros((3, 3)))
    assert src.estimate_autocovariance(np.array([[0.0], [2.0]])).tolist() == [[2.0]]
    with pytest.raises(ValueError):
        src.estimate_autocovariance(np.ones((1, 3)))
    c = src.estimate_autocovariance(np.random.default_rng(0).standard_normal((10, 6)))
    assert np.array_equal(c, c.T) and np.all(np.diag(c) >= 0)


def test_csv_round_trip():
    model = src.SourceModel.exponential(3, 4)
    ds = src.synth_dataset(model, 3, 2, seed=2)
    back = src.ingest_csv(io.StringIO(src.dataset_to_csv(ds)))
    assert back == ds


def test_csv_well_formed_two_devices():
    text = "device,measurement,row,col,count\n" + "".join(
        f"{d},0,{r},{c},{100 + r + c}\n" for d in ("x", "y") for r in range(2) for c in range(2)
    )
    ds = src.ingest_csv(io.StringIO(text))
    assert ds.n_devices == 2 and (ds.rows, ds.cols) == (2, 2)
    assert ds.device("y")[0, 1, 1] == 102


def test_csv_short_device_names_device():
    rows = [f"{d},0,{r},{c},1" for d in ("x", "y") for r in range(2) for c in range(2)]
    rows.pop()
    text = "device,measurement,row,col,count\n" + "\n".join(rows) + "\n"
    with pytest.raises(src.DatasetFormatError, match="device y"):
        src.ingest_csv(io.StringIO(text))


@pytest.mark.parametrize(
    "text,match",
    [
        ("dev,measurement,row,col,count\n", "line 1"),
        ("device,measurement,row,col,count\nx,0,0,0,abc\n", "line 2"),
        ("device,measurement,row,col,count\nx,0,0\n", "line 2"),
        ("device,measurement,row,col,count\nx,0,0,0,1\nx,0,0,0,2\n", "line 3"),
        ("", "empty"),
    ],
)
def test_csv_diagnostics(text, match):
    with pytest.raises(src.DatasetFormatError, match=match):
        src.ingest_csv(io.StringIO(text))


def test_stats_json_round_trip():
    st = src.model_stats(src.SourceModel.exponential(4, 4), DCT)
    back = src.CoefficientStats.from_json(st.to_json())
    assert np.allclose(back.mu, st.mu) and np.array_equal(back.usable, st.usable)
    assert set(st.to_records()[0]) == {"index", "mu", "sigma", "sigma_n", "usable"}


def test_model_stats_agree_with_transform():
    model = src.SourceModel.exponential(4, 4, noise_var=9.0)
    st = src.model_stats(model, DCT)
    assert np.allclose(st.mu, forward(DCT, model.mean.reshape(4, 4)).ravel())
    assert np.allclose(st.sigma_n * st.sigma, 3.0)
