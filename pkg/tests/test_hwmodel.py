import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ropuf import hwmodel as hw
from ropuf.quantize import BitAllocation, extract_bits
from ropuf.source import SourceModel, model_stats, synth_dataset
from ropuf.transforms import DWHT, forward

LO, HI = hw.signed_range(16)


def _random_arrays(count, seed):
    return np.random.default_rng(seed).integers(LO, HI + 1, (count, 16, 16))


def test_butterfly_examples():
    assert hw.dwht4p(1, 1, 1, 1) == (2, 0, 0, 0)
    assert hw.dwht4p(1, 2, 3, 4) == (5, -1, -2, 0)
    assert hw.dwht4p(0, 0, 0, 0) == (0, 0, 0, 0)


def test_shift_rounds_toward_minus_infinity():
    assert hw.dwht4p(-3, 0, 0, 0) == (-2, -2, -2, -2)
    assert hw.dwht4p(3, 0, 0, 0) == (1, 1, 1, 1)


@given(st.lists(st.integers(LO, HI), min_size=4, max_size=4))
def test_butterfly_growth_is_one_bit(x):
    y = hw.dwht4p(*x)
    hw.check_width(y, 17)
    exact = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]]) @ np.array(x)
    assert np.array_equal(np.array(y), exact // 2)


def test_butterfly_rejects_wide_input():
    with pytest.raises(OverflowError):
        hw.dwht4p(HI + 1, 0, 0, 0)


def test_fixed_word_and_widths():
    assert hw.signed_range(20) == (-(1 << 19), (1 << 19) - 1)
    assert hw.signed_width([0]) == 1 and hw.signed_width([-1]) == 1
    assert hw.signed_width([1]) == 2 and hw.signed_width([-(1 << 15)]) == 16
    assert hw.signed_width([(1 << 15) - 1]) == 16 and hw.signed_width([1 << 15]) == 17
    assert int(hw.FixedWord(-5, 4)) == -5
    with pytest.raises(OverflowError):
        hw.FixedWord(8, 4)


def test_schedule_touches_every_cell_once_per_pass():
    passes = hw.dwht_schedule(16)
    assert len(passes) == 4
    for p in passes:
        cells = [a for quad in p for a in quad]
        assert sorted(cells) == list(range(256))
    with pytest.raises(ValueError):
        hw.dwht_schedule(12)


def test_schedule_matches_vectorized_model():
    x = _random_arrays(1, 0)[0]
    a = x.ravel().tolist()
    for p in hw.dwht_schedule(16):
        for quad in p:
            out = hw.dwht4p(*(a[i] for i in quad), width=20)
            for i, v in zip(quad, out):
                a[i] = v
    assert np.array_equal(np.array(a).reshape(16, 16), hw.dwht2d_fixed(x))


def test_constant_array_dc_gain():
    for v in (8, 7, -3, 100):
        out = hw.dwht2d_fixed(np.full((16, 16), v))
        if v % 2 == 0:
            assert out[0, 0] == 16 * v
            rest = out.copy()
            rest[0, 0] = 0
            assert not rest.any()
        else:
            assert abs(out[0, 0] - 16 * v) <= hw.truncation_bound()


def test_fixed_tracks_float_transform():
    x = _random_arrays(1000, 1)
    err = np.abs(hw.dwht2d_fixed(x) - forward(DWHT, x.astype(float)))
    assert err.max() <= hw.truncation_bound() == 7.5


def test_truncation_bound_holds_on_random_arrays():
    x = _random_arrays(100_000, 2)
    err = np.abs(hw.dwht2d_fixed(x) - forward(DWHT, x.astype(float)))
    assert err.max() <= 7.5


@pytest.mark.xfail(strict=True, reason="floor shifts over four passes reach errors of 6 on random inputs")
def test_truncation_within_four():
    x = _random_arrays(100_000, 2)
    err = np.abs(hw.dwht2d_fixed(x) - forward(DWHT, x.astype(float)))
    assert err.max() <= 4


def test_corner_set_stays_within_twenty_bits():
    corners = hw.corner_arrays()
    assert corners.shape == (512, 16, 16)
    out, tr = hw.dwht2d_fixed(corners, trace=True)
    assert max(tr.stored_bits) <= 20
    assert tr.sum_bits == (18, 19, 20, 21)
    assert tr.stored_bits == (17, 18, 19, 20)
    assert np.abs(out - forward(DWHT, corners.astype(float))).max() <= 7.5


def test_random_fuzz_stays_within_twenty_bits():
    _, tr = hw.dwht2d_fixed(_random_arrays(100_000, 3), trace=True)
    assert max(tr.stored_bits) <= 20


def test_bad_inputs():
    with pytest.raises(OverflowError):
        hw.dwht2d_fixed(np.full((16, 16), HI + 1))
    with pytest.raises(ValueError):
        hw.dwht2d_fixed(np.zeros((16, 8), dtype=int))
    with pytest.raises(OverflowError):
        hw.dwht2d_fixed(np.full((16, 16), HI), out_width=18)


def test_timing():
    assert abs(hw.counter_overload_time(16, 500e6) - 131.07e-6) < 1e-9
    assert hw.counter_overload_time(1, 1.0) == 1.0
    assert hw.no_overload(100e-6, 16, 500e6)
    assert not hw.no_overload(200e-6, 16, 500e6)
    with pytest.raises(ValueError):
        hw.counter_overload_time(0, 1.0)


def _default_setup():
    model = SourceModel.exponential(16, 16)
    stats = model_stats(model, DWHT)
    K = np.ones(256, dtype=np.int64)
    K[0] = 0
    return model, stats, BitAllocation(K, "fixed_errors")


def test_rom_size_and_round_trip(tmp_path):
    _, stats, alloc = _default_setup()
    rom = hw.quantizer_rom(alloc, stats)
    assert rom.n_words == 255 and rom.total_bytes == 638
    blob = rom.to_bytes()
    head, body = blob.split(b"\n", 1)
    assert head == b'{"words": 255, "word_bits": 20}' and len(body) == 765
    words, bits = hw.read_rom(blob)
    assert bits == 20 and np.array_equal(words, rom.words)


def test_rom_negative_words_round_trip():
    rom = hw.QuantizerROM(np.array([-1, -(1 << 19), (1 << 19) - 1, 0]), np.array([0, 2, 1]))
    words, _ = hw.read_rom(rom.to_bytes())
    assert words.tolist() == [-1, -(1 << 19), (1 << 19) - 1, 0]
    assert rom.coefficient_words(1).tolist() == [-1, -(1 << 19), (1 << 19) - 1]


def test_rom_variants():
    _, stats, _ = _default_setup()
    empty = hw.quantizer_rom(BitAllocation(np.zeros(256, dtype=int), "fixed_errors"), stats)
    assert empty.n_words == 0 and empty.total_bytes == 0
    K = np.zeros(256, dtype=int)
    K[5] = 2
    rom = hw.quantizer_rom(BitAllocation(K, "fixed_errors"), stats)
    assert rom.n_words == 3 and np.all(np.diff(rom.words) > 0)
    with pytest.raises(OverflowError):
        hw.quantizer_rom(BitAllocation(K, "fixed_errors"), stats, scale=1e6)


def test_read_rom_errors():
    with pytest.raises(ValueError):
        hw.read_rom(b'{"words": 2, "word_bits": 20}')
    with pytest.raises(ValueError):
        hw.read_rom(b'{"words": 2, "word_bits": 20}\n\x00\x00\x00')
    with pytest.raises(ValueError):
        hw.read_rom(b'{"words": 1, "word_bits": 20}\n\x00\x00\xf0')


def _decisions(seed=11, devices=200):
    model, stats, alloc = _default_setup()
    counts = np.rint(synth_dataset(model, devices, 1, seed=seed).measurement(0)).astype(np.int64)
    rom = hw.quantizer_rom(alloc, stats)
    fixed = hw.fixed_quantize(hw.dwht2d_fixed(counts), rom)
    float_bits = extract_bits(counts.astype(float), DWHT, stats, alloc)
    t = forward(DWHT, counts.astype(float)).reshape(devices, 256)[:, 1:]
    return fixed, float_bits, np.abs(t - rom.words[None, :])


def test_fixed_and_float_decisions_agree_outside_truncation_bound():
    fixed, float_bits, dist = _decisions()
    outside = dist > hw.truncation_bound()
    assert np.array_equal(fixed[outside], float_bits[outside])
    assert (fixed != float_bits).mean() < 1e-2


@pytest.mark.xfail(strict=True, reason="a coefficient 4.31 units from its boundary flips; truncation exceeds 4")
def test_fixed_and_float_decisions_agree_outside_band_of_four():
    fixed, float_bits, dist = _decisions()
    outside = dist > 4
    assert np.array_equal(fixed[outside], float_bits[outside])
