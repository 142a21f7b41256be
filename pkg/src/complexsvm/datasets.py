"""Seeded generators for the regression, channel and classification benchmarks.

Every generator is a pure function of its config.  Random draws come from
independent numpy streams keyed by ``(seed, role)``, so adding a role never
shifts the draws of another.

Noise levels are SNRs: ``noise power = signal power / 10**(snr_db / 10)``
with the signal power measured on the generated noise-free sequence.  Complex
noise is circular Gaussian, variance split equally between components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .csvm import QUATERNARY_LABELS

__all__ = [
    "SincGridConfig",
    "ChannelConfig",
    "BlobConfig",
    "ComplexSamples",
    "LabeledSamples",
    "complex_sinc",
    "gen_sinc_grid",
    "default_taps",
    "gen_source",
    "apply_channel",
    "channel_identification_data",
    "channel_equalization_data",
    "identification_config",
    "equalization_config",
    "gen_quaternary_blobs",
    "empirical_snr_db",
    "config_from_dict",
]

_ROLES = {
    "source_x": 1,
    "source_y": 2,
    "noise": 3,
    "impulse_mask": 4,
    "impulse_phase": 5,
    "blobs": 6,
}


def _stream(seed, role):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), _ROLES[role]])))


def _circular_noise(rng, n, power):
    scale = math.sqrt(power / 2.0)
    draws = rng.standard_normal((n, 2))
    return scale * (draws[:, 0] + 1j * draws[:, 1])


def _noise_power(signal, snr_db):
    return float(np.mean(np.abs(signal) ** 2)) / 10.0 ** (snr_db / 10.0)


def empirical_snr_db(clean, noisy):
    """``10 log10(mean|clean|^2 / mean|noisy - clean|^2)``."""
    clean = np.asarray(clean)
    noise = np.asarray(noisy) - clean
    return 10.0 * math.log10(float(np.mean(np.abs(clean) ** 2)) / float(np.mean(np.abs(noise) ** 2)))


@dataclass(frozen=True, eq=False)
class ComplexSamples:
    """Complex regression pairs; ``clean`` holds the noise-free targets."""

    inputs: np.ndarray
    targets: np.ndarray
    clean: np.ndarray

    def __len__(self):
        return self.inputs.shape[0]


@dataclass(frozen=True, eq=False)
class LabeledSamples:
    inputs: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return self.inputs.shape[0]


# ---------------------------------------------------------------------------
# sinc regression

def complex_sinc(z):
    """Unnormalised ``sin(z)/z`` with ``sinc(0) = 1``; works elementwise."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z.imag) > 700.0):
        raise OverflowError("complex sinc: |Im z| too large for sinh")
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    out = np.where(small, 1.0 + 0j, np.sin(safe) / safe)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SincGridConfig:
    """``rows`` grid points along the real axis, ``cols`` along the imaginary axis."""

    rows: int = 33
    cols: int = 9
    x_range: tuple = (-4.0, 4.0)
    y_range: tuple = (-1.0, 1.0)
    noise_snr_db: float = 15.0
    impulse_prob: float = 0.05
    impulse_scale: float = 5.0
    seed: int = 1

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid needs rows, cols >= 1")
        if not 0.0 <= self.impulse_prob <= 1.0:
            raise ValueError("impulse_prob must lie in [0, 1]")
        if not self.impulse_scale > 0:
            raise ValueError("impulse_scale must be positive")
        for name in ("x_range", "y_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} must be an interval (lo <= hi)")
            object.__setattr__(self, name, (float(lo), float(hi)))


def gen_sinc_grid(cfg: SincGridConfig):
    """Noisy training samples and clean references of sinc on a regular grid.

    Returns ``(train, clean)``, both :class:`ComplexSamples` over the same
    ``rows * cols`` points (x-major order).  An SNR of ``inf`` disables the
    Gaussian component.
    """
    xs = np.linspace(*cfg.x_range, cfg.rows)
    ys = np.linspace(*cfg.y_range, cfg.cols)
    grid = (xs[:, None] + 1j * ys[None, :]).reshape(-1)
    d = complex_sinc(grid)
    n = grid.size
    noisy = d.copy()
    if math.isfinite(cfg.noise_snr_db):
        noisy = noisy + _circular_noise(_stream(cfg.seed, "noise"), n, _noise_power(d, cfg.noise_snr_db))
    if cfg.impulse_prob > 0:
        hit = _stream(cfg.seed, "impulse_mask").random(n) < cfg.impulse_prob
        phase = _stream(cfg.seed, "impulse_phase").uniform(0.0, 2.0 * np.pi, n)
        rms = math.sqrt(float(np.mean(np.abs(d) ** 2)))
        noisy = noisy + np.where(hit, cfg.impulse_scale * rms * np.exp(1j * phase), 0.0)
    inputs = grid[:, None]
    return ComplexSamples(inputs, noisy, d), ComplexSamples(inputs, d.copy(), d)


# ---------------------------------------------------------------------------
# nonlinear channel

def default_taps():
    """``h(k) = 0.432 (1 + cos(2 pi (k-3)/5) - (1 + cos(2 pi (k-3)/10)) i)``, k = 1..5."""
    k = np.arange(1, 6)
    return 0.432 * (1 + np.cos(2 * np.pi * (k - 3) / 5) - 1j * (1 + np.cos(2 * np.pi * (k - 3) / 10)))


def gen_source(n, rho, scale=1.0, seed=0):
    """``scale * (sqrt(1 - rho^2) X + i rho Y)`` with X, Y iid standard normal.

    Circular at ``rho = sqrt(2)/2``, increasingly non-circular toward 0 or 1.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    x = _stream(seed, "source_x").standard_normal(n)
    y = _stream(seed, "source_y").standard_normal(n)
    return scale * (math.sqrt(1.0 - rho * rho) * x + 1j * rho * y)


def apply_channel(s, taps, nonlin):
    """FIR ``t(n) = sum_k h(k) s(n-k+1)`` (zero history) then ``x = t + q t^2``."""
    s = np.asarray(s, dtype=complex)
    t = np.convolve(s, np.asarray(taps, dtype=complex))[: s.size]
    return t + nonlin * t * t


@dataclass(frozen=True)
class ChannelConfig:
    taps: tuple = field(default_factory=lambda: tuple(complex(h) for h in default_taps()))
    nonlin: complex = 0.15 - 0.1j
    rho: float = math.sqrt(2) / 2
    snr_db: float = 15.0
    filter_len: int = 5
    delay: int = 0
    n_train: int = 150
    n_test: int = 600
    source_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.filter_len < 1:
            raise ValueError("filter_len must be >= 1")
        if self.delay < 0:
            raise ValueError("delay must be >= 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("n_train and n_test must be >= 1")
        object.__setattr__(self, "taps", tuple(complex(h) for h in self.taps))
        object.__setattr__(self, "nonlin", complex(self.nonlin))

    @property
    def warmup(self):
        return max(self.filter_len, 5) + self.delay


def identification_config(**overrides):
    return replace(ChannelConfig(), **overrides)


def equalization_config(**overrides):
    base = ChannelConfig(nonlin=0.1 - 0.15j, delay=2, source_scale=0.30)
    return replace(base, **overrides)


def _channel(cfg, length, source):
    if source is None:
        s = gen_source(length, cfg.rho, cfg.source_scale, cfg.seed)
    else:
        s = np.asarray(source, dtype=complex)
        if s.size < length:
            raise ValueError(f"source needs at least {length} samples, got {s.size}")
        s = s[:length]
    x = apply_channel(s, cfg.taps, cfg.nonlin)
    if math.isfinite(cfg.snr_db):
        y = x + _circular_noise(_stream(cfg.seed, "noise"), length, _noise_power(x, cfg.snr_db))
    else:
        y = x.copy()
    return s, x, y


def _split(inputs, targets, clean, n_train):
    return (
        ComplexSamples(inputs[:n_train], targets[:n_train], clean[:n_train]),
        ComplexSamples(inputs[n_train:], targets[n_train:], clean[n_train:]),
    )


def channel_identification_data(cfg: ChannelConfig, source=None):
    """Pairs ``((s(n-L+1), ..., s(n)), y(n))``.

    Train targets are the noisy outputs ``y(n)``; every split also carries the
    noise-free ``x(n)`` in ``clean``, the reference for test MSE.
    """
    L = cfg.filter_len
    first = cfg.warmup
    total = cfg.n_train + cfg.n_test
    length = first + total
    s, x, y = _channel(cfg, length, source)
    n = np.arange(first, first + total)
    lags = np.arange(-L + 1, 1)
    inputs = s[n[:, None] + lags[None, :]]
    return _split(inputs, y[n], x[n], cfg.n_train)


def channel_equalization_data(cfg: ChannelConfig, source=None):
    """Pairs ``((y(n+D), y(n+D-1), ..., y(n+D-L+1)), s(n))``; targets are clean."""
    L, D = cfg.filter_len, cfg.delay
    first = cfg.warmup + max(0, L - 1 - D)
    total = cfg.n_train + cfg.n_test
    length = first + total + D
    s, x, y = _channel(cfg, length, source)
    n = np.arange(first, first + total)
    lags = D - np.arange(L)
    inputs = y[n[:, None] + lags[None, :]]
    return _split(inputs, s[n], s[n], cfg.n_train)


# ---------------------------------------------------------------------------
# quaternary blobs

@dataclass(frozen=True)
class BlobConfig:
    """Four circular Gaussian clusters; ``spread`` is the RMS modulus of the noise."""

    centers: tuple = (2 + 2j, 2 - 2j, -2 + 2j, -2 - 2j)
    spread: float = 0.3
    n_per_class: int = 40
    seed: int = 0

    def __post_init__(self):
        centers = tuple(complex(c) for c in self.centers)
        if len(centers) != 4 or len(set(centers)) != 4:
            raise ValueError("need four pairwise distinct centers")
        if self.spread < 0:
            raise ValueError("spread must be nonnegative")
        if self.n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")
        object.__setattr__(self, "centers", centers)


def gen_quaternary_blobs(cfg: BlobConfig) -> LabeledSamples:
    """Class ``k`` points around ``centers[k]`` with label ``QUATERNARY_LABELS[k]``."""
    rng = _stream(cfg.seed, "blobs")
    m = cfg.n_per_class
    centers = np.repeat(np.asarray(cfg.centers), m)
    z = centers + _circular_noise(rng, 4 * m, cfg.spread**2)
    labels = np.repeat(np.asarray(QUATERNARY_LABELS), m)
    return LabeledSamples(z[:, None], labels)


def config_from_dict(cls, obj, where="config"):
    """Build a config dataclass from a JSON object, naming any offending field."""
    if not isinstance(obj, dict):
        raise ValueError(f"{where}: expected an object, got {type(obj).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ValueError(f"{where}: unknown field(s) {', '.join(unknown)}; expected a subset of {sorted(known)}")
    kwargs = {}
    for key, value in obj.items():
        try:
            kwargs[key] = _decode_field(key, value)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{where}.{key}: {exc}") from None
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{where}: {exc}") from None


def _decode_field(key, value):
    if key in ("taps", "centers"):
        return tuple(_decode_complex(v) for v in value)
    if key == "nonlin":
        return _decode_complex(value)
    if key in ("x_range", "y_range"):
        lo, hi = value
        return float(lo), float(hi)
    if key in ("rows", "cols", "filter_len", "delay", "n_train", "n_test", "n_per_class", "seed"):
        if isinstance(value, bool) or not float(value).is_integer():
            raise ValueError(f"expected an integer, got {value!r}")
        return int(value)
    if isinstance(value, (list, dict)) or isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    return float(value)


def _decode_complex(value):
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    return complex(float(value))
