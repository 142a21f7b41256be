import math

import numpy as np
import pytest

from complexsvm.csvm import QUATERNARY_LABELS
from complexsvm.datasets import (
    BlobConfig,
    ChannelConfig,
    SincGridConfig,
    apply_channel,
    channel_equalization_data,
    channel_identification_data,
    complex_sinc,
    config_from_dict,
    default_taps,
    empirical_snr_db,
    equalization_config,
    gen_quaternary_blobs,
    gen_sinc_grid,
    gen_source,
    identification_config,
)


def pseudo_ratio(s):
    return abs(np.mean(s * s)) / np.mean(np.abs(s) ** 2)


# -- sinc

def test_sinc_values():
    assert complex_sinc(0) == 1
    assert abs(complex_sinc(math.pi)) < 1e-15
    v = complex_sinc(1j)
    assert v.real == pytest.approx(math.sinh(1.0), rel=1e-15)
    assert v.imag == 0.0
    assert complex_sinc(1e-9) == 1


def test_sinc_overflow():
    with pytest.raises(OverflowError):
        complex_sinc(800j)


def test_sinc_grid_noiseless():
    train, clean = gen_sinc_grid(SincGridConfig(noise_snr_db=math.inf, impulse_prob=0.0))
    np.testing.assert_array_equal(train.targets, clean.targets)
    assert len(train) == 33 * 9
    assert train.inputs.shape == (297, 1)
    z = train.inputs[:, 0]
    assert z.real.min() == -4 and z.real.max() == 4 and z.imag.min() == -1 and z.imag.max() == 1
    np.testing.assert_array_equal(clean.targets, complex_sinc(z))


def test_sinc_grid_snr():
    noisy, clean = gen_sinc_grid(SincGridConfig(seed=1))
    gauss, _ = gen_sinc_grid(SincGridConfig(seed=1, impulse_prob=0.0))
    # Gaussian and impulse streams are independent, so the difference isolates the impulses
    assert abs(empirical_snr_db(clean.targets, gauss.targets) - 15.0) <= 1.0
    impulses = noisy.targets - gauss.targets
    hit = np.abs(impulses) > 0
    rms = math.sqrt(np.mean(np.abs(clean.targets) ** 2))
    np.testing.assert_allclose(np.abs(impulses[hit]), 5.0 * rms, rtol=1e-10)
    assert 0 < hit.sum() < 0.15 * len(noisy)


def test_sinc_grid_deterministic():
    a = gen_sinc_grid(SincGridConfig(seed=1))[0].targets
    b = gen_sinc_grid(SincGridConfig(seed=1))[0].targets
    assert a.tobytes() == b.tobytes()
    assert gen_sinc_grid(SincGridConfig(seed=2))[0].targets.tobytes() != a.tobytes()


def test_sinc_config_validation():
    with pytest.raises(ValueError):
        SincGridConfig(rows=0)
    with pytest.raises(ValueError):
        SincGridConfig(x_range=(1.0, -1.0))
    with pytest.raises(ValueError):
        SincGridConfig(impulse_prob=1.5)


# -- taps and source

def test_default_taps():
    h = default_taps()
    assert h[2] == pytest.approx(0.864 - 0.864j, abs=1e-15)
    expect = 0.432 * (1 + math.cos(-4 * math.pi / 5)) - 0.432j * (1 + math.cos(-2 * math.pi / 5))
    assert h[0] == pytest.approx(expect, abs=1e-15)
    assert h[0] == pytest.approx(0.0825047 - 0.5654953j, abs=1e-7)
    assert h[0] == pytest.approx(0.082513 - 0.565498j, abs=1e-5)
    assert h[1].real == pytest.approx(h[3].real, abs=1e-15)


def test_circularity_dial():
    assert pseudo_ratio(gen_source(100_000, math.sqrt(2) / 2, seed=3)) < 0.01
    assert pseudo_ratio(gen_source(100_000, math.sqrt(2) / 2, seed=4)) < 0.02
    for rho in (0.02, 0.98):
        assert pseudo_ratio(gen_source(100_000, rho, seed=3)) > 0.9


def test_source_extremes():
    assert np.all(gen_source(50, 0.0, seed=1).imag == 0)
    assert np.all(gen_source(50, 1.0, seed=1).real == 0)
    with pytest.raises(ValueError):
        gen_source(5, 1.5)


def test_source_scale():
    a = gen_source(100, 0.5, seed=2)
    np.testing.assert_array_equal(gen_source(100, 0.5, scale=0.3, seed=2), 0.3 * a)


# -- channel

def test_fir_steady_state():
    cfg = identification_config(nonlin=0, snr_db=math.inf, n_train=10, n_test=10)
    train, test = channel_identification_data(cfg, source=np.ones(200))
    np.testing.assert_allclose(train.targets, np.sum(default_taps()), rtol=1e-14)
    np.testing.assert_allclose(test.targets, np.sum(default_taps()), rtol=1e-14)


def test_nonlinearity():
    s = np.array([1.0, 0.5j, -0.3 + 0.2j])
    t = np.convolve(s, default_taps())[:3]
    np.testing.assert_allclose(apply_channel(s, default_taps(), 0.15 - 0.1j), t + (0.15 - 0.1j) * t * t)


def test_identification_shapes_and_windows():
    cfg = identification_config(snr_db=math.inf, n_train=150, n_test=600)
    ramp = np.arange(1000, dtype=complex)
    train, test = channel_identification_data(cfg, source=ramp)
    assert len(train) == 150 and len(test) == 600
    assert train.inputs.shape == (150, 5)
    first = cfg.warmup
    np.testing.assert_array_equal(train.inputs[0], ramp[first - 4: first + 1])
    # consecutive windows, no overlap of target indices between splits
    n_train = train.inputs[:, -1].real
    n_test = test.inputs[:, -1].real
    np.testing.assert_array_equal(np.diff(np.concatenate([n_train, n_test])), 1.0)
    assert not set(n_train) & set(n_test)
    x = apply_channel(ramp, cfg.taps, cfg.nonlin)
    np.testing.assert_array_equal(train.targets, x[n_train.astype(int)])


def test_identification_snr():
    cfg = identification_config(seed=5, n_train=150, n_test=600)
    train, test = channel_identification_data(cfg)
    clean = np.concatenate([train.clean, test.clean])
    noisy = np.concatenate([train.targets, test.targets])
    assert abs(empirical_snr_db(clean, noisy) - 15.0) <= 1.0


def test_snr_calibration_large_sample():
    cfg = identification_config(seed=6, n_train=5000, n_test=5000)
    train, test = channel_identification_data(cfg)
    snr = empirical_snr_db(np.concatenate([train.clean, test.clean]), np.concatenate([train.targets, test.targets]))
    assert abs(snr - 15.0) <= 0.5
    sinc_train, sinc_clean = gen_sinc_grid(SincGridConfig(rows=200, cols=60, impulse_prob=0.0, seed=3))
    assert abs(empirical_snr_db(sinc_clean.targets, sinc_train.targets) - 15.0) <= 0.5


def test_equalization_pass_through():
    cfg = ChannelConfig(taps=(1, 0, 0, 0, 0), nonlin=0, snr_db=math.inf, filter_len=1, delay=0,
                        n_train=20, n_test=30, seed=2)
    train, test = channel_equalization_data(cfg)
    np.testing.assert_array_equal(train.inputs[:, 0], train.targets)
    np.testing.assert_array_equal(test.inputs[:, 0], test.targets)


def test_equalization_windows_on_ramp():
    cfg = equalization_config(snr_db=math.inf, nonlin=0, taps=(1, 0, 0, 0, 0), n_train=15, n_test=25)
    ramp = np.arange(500, dtype=complex)
    train, test = channel_equalization_data(cfg, source=ramp)
    for samples in (train, test):
        n = samples.targets.real
        expect = n[:, None] + 2 - np.arange(5)[None, :]
        np.testing.assert_array_equal(samples.inputs.real, expect)


def test_equalization_defaults():
    cfg = equalization_config(seed=9)
    assert cfg.nonlin == 0.1 - 0.15j and cfg.delay == 2 and cfg.filter_len == 5 and cfg.source_scale == 0.3
    a_train, a_test = channel_equalization_data(cfg)
    b_train, b_test = channel_equalization_data(cfg)
    assert a_train.inputs.shape == (150, 5) and a_test.inputs.shape == (600, 5)
    assert a_train.inputs.tobytes() == b_train.inputs.tobytes()
    assert a_test.targets.tobytes() == b_test.targets.tobytes()


def test_equalization_snr():
    train, test = channel_equalization_data(equalization_config(seed=9))
    # inputs are received samples; reconstruct the noise-free channel output for the same lags
    cfg = equalization_config(seed=9, snr_db=math.inf)
    clean_train, clean_test = channel_equalization_data(cfg)
    noisy = np.concatenate([train.inputs[:, 0], test.inputs[:, 0]])
    clean = np.concatenate([clean_train.inputs[:, 0], clean_test.inputs[:, 0]])
    assert abs(empirical_snr_db(clean, noisy) - 15.0) <= 1.0


def test_channel_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(filter_len=0)
    with pytest.raises(ValueError):
        ChannelConfig(delay=-1)
    with pytest.raises(ValueError):
        ChannelConfig(rho=1.2)
    with pytest.raises(ValueError):
        ChannelConfig(n_test=0)


def test_channel_determinism():
    a = channel_identification_data(identification_config(seed=4))[0]
    b = channel_identification_data(identification_config(seed=4))[0]
    assert a.inputs.tobytes() == b.inputs.tobytes() and a.targets.tobytes() == b.targets.tobytes()


# -- blobs

def test_blobs_nearest_center():
    cfg = BlobConfig(seed=3)
    data = gen_quaternary_blobs(cfg)
    centers = np.asarray(cfg.centers)
    nearest = np.argmin(np.abs(data.inputs[:, 0, None] - centers[None, :]), axis=1)
    np.testing.assert_array_equal(np.asarray(QUATERNARY_LABELS)[nearest], data.labels)


def test_blobs_zero_spread():
    data = gen_quaternary_blobs(BlobConfig(spread=0.0, n_per_class=1))
    np.testing.assert_array_equal(data.inputs[:, 0], [2 + 2j, 2 - 2j, -2 + 2j, -2 - 2j])
    np.testing.assert_array_equal(data.labels, QUATERNARY_LABELS)


def test_blobs_deterministic_and_spread():
    a = gen_quaternary_blobs(BlobConfig(seed=8, n_per_class=5000))
    b = gen_quaternary_blobs(BlobConfig(seed=8, n_per_class=5000))
    assert a.inputs.tobytes() == b.inputs.tobytes()
    dev = a.inputs[:, 0] - np.repeat([2 + 2j, 2 - 2j, -2 + 2j, -2 - 2j], 5000)
    assert math.sqrt(np.mean(np.abs(dev) ** 2)) == pytest.approx(0.3, rel=0.02)


def test_blob_config_validation():
    with pytest.raises(ValueError):
        BlobConfig(centers=(1, 1, 2, 3))


# -- config parsing

def test_config_from_dict_complex_fields():
    cfg = config_from_dict(ChannelConfig, {"nonlin": [0.1, -0.15], "delay": 2})
    assert cfg.nonlin == 0.1 - 0.15j and cfg.delay == 2
    assert config_from_dict(ChannelConfig, {"nonlin": "0.1-0.15j"}).nonlin == 0.1 - 0.15j


@pytest.mark.parametrize("obj, fragment", [
    ({"bogus": 1}, "unknown field(s) bogus"),
    ({"delay": 1.5}, "channel.delay"),
    ({"rho": [1, 2, 3]}, "channel.rho"),
    ({"rho": 2.0}, "rho must lie"),
])
def test_config_from_dict_errors(obj, fragment):
    with pytest.raises(ValueError) as exc:
        config_from_dict(ChannelConfig, obj, "channel")
    assert fragment in str(exc.value)
