"""Cross-correlation receiver for synthetic UWB pulse trains.

Pipeline per receive chain: bandpass filter, correlate with the known
transmit template, band-limited upsampling around the correlation peak,
peak-time readout.  TDOA is the difference of two peak times; RSS is the
mean squared correlation over a fixed window behind the peak.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import signal

from .errors import AliasingSampleRate, TemplateTooLong, WindowOutOfSupport

DEFAULT_BAND = (2.3e9, 3.9e9)   # Hz, -10 dB band edges
DEFAULT_PRF = 3e6               # Hz
DEFAULT_SAMPLE_RATE = 12.5e9    # Hz
DEFAULT_UPSAMPLE = 8
DEFAULT_RSS_WINDOW = 70e-9      # s
_CHIP_COUNT = 128
_FILTER_ORDER = 4
_PULSE_SUPPORT_SIGMAS = 6.0


@dataclass
class Waveform:
    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be > 0")
        self.samples = np.asarray(self.samples, dtype=float)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.samples)) / self.sample_rate

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["t", "amplitude"])
            for t, a in zip(self.times(), self.samples):
                w.writerow([f"{t:.12e}", f"{a:.9e}"])

    @classmethod
    def from_csv(cls, path) -> "Waveform":
        t, a = [], []
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                t.append(float(row["t"]))
                a.append(float(row["amplitude"]))
        rate = (len(t) - 1) / (t[-1] - t[0]) if len(t) > 1 else 1.0
        return cls(np.array(a), rate, t[0])


def default_chips(seed: int = 20120316) -> np.ndarray:
    """Fixed pseudorandom bi-phase code of 128 chips."""
    rng = np.random.default_rng(seed)
    return rng.choice([-1.0, 1.0], size=_CHIP_COUNT)


@dataclass
class SignalSpec:
    chips: np.ndarray = field(default_factory=default_chips)
    prf: float = DEFAULT_PRF
    band: Tuple[float, float] = DEFAULT_BAND

    def __post_init__(self):
        self.chips = np.asarray(self.chips, dtype=float)
        if len(self.chips) != _CHIP_COUNT:
            raise ValueError(f"chip code must have {_CHIP_COUNT} entries")
        if not np.all(np.abs(self.chips) == 1.0):
            raise ValueError("chips must be +-1")
        if self.band[0] >= self.band[1]:
            raise ValueError("band must satisfy f_low < f_high")

    @property
    def center_frequency(self) -> float:
        return 0.5 * (self.band[0] + self.band[1])

    @property
    def pulse_sigma(self) -> float:
        """Gaussian envelope sigma matching the -10 dB band edges."""
        half_bw = 0.5 * (self.band[1] - self.band[0])
        return math.sqrt(math.log(10.0)) / (2.0 * math.pi * half_bw)


@dataclass
class CorrelationResult:
    c: Waveform       # full cross-correlation output
    peak_time: float  # s, sub-sample peak location


def generate_signal(spec: SignalSpec, delay: float, attenuation_db: float,
                    sample_rate: float = DEFAULT_SAMPLE_RATE,
                    noise_std: float = 0.0,
                    rng: Optional[np.random.Generator] = None) -> Waveform:
    """Sampled bi-phase pulse train seen at one receiver.

    Each chip is a Gaussian-modulated sinusoid at the band center; the whole
    train is shifted by `delay` (any real value, not only whole samples),
    scaled by the dB attenuation, and optionally buried in white noise.
    """
    if sample_rate < 2.0 * spec.band[1]:
        raise AliasingSampleRate(
            f"sample_rate {sample_rate:.3g} Hz below Nyquist for "
            f"{spec.band[1]:.3g} Hz")
    sigma = spec.pulse_sigma
    fc = spec.center_frequency
    pad = _PULSE_SUPPORT_SIGMAS * sigma
    duration = delay + (len(spec.chips) - 1) / spec.prf + 2.0 * pad
    n = int(math.ceil(duration * sample_rate)) + 1
    t = np.arange(n) / sample_rate
    out = np.zeros(n)
    amp = 10.0 ** (attenuation_db / 20.0)
    for k, chip in enumerate(spec.chips):
        tc = delay + pad + k / spec.prf
        lo = max(int((tc - pad) * sample_rate), 0)
        hi = min(int((tc + pad) * sample_rate) + 1, n)
        tk = t[lo:hi] - tc
        out[lo:hi] += (chip * amp * np.exp(-0.5 * (tk / sigma) ** 2)
                       * np.cos(2.0 * math.pi * fc * tk))
    if noise_std > 0:
        if rng is None:
            raise ValueError("noise_std > 0 requires an rng")
        out += rng.normal(0.0, noise_std, size=n)
    return Waveform(out, sample_rate, 0.0)


def transmit_template(spec: SignalSpec,
                      sample_rate: float = DEFAULT_SAMPLE_RATE) -> Waveform:
    """Ideal (noiseless, zero-delay, unit-amplitude) transmit signal."""
    return generate_signal(spec, delay=0.0, attenuation_db=0.0,
                           sample_rate=sample_rate)


def bandpass(w: Waveform, band: Tuple[float, float] = DEFAULT_BAND) -> Waveform:
    """Zero-phase Butterworth bandpass, so filtering adds no group delay."""
    sos = signal.butter(_FILTER_ORDER, band, btype="bandpass",
                        fs=w.sample_rate, output="sos")
    return Waveform(signal.sosfiltfilt(sos, w.samples), w.sample_rate, w.t0)


def correlate_and_detect(r: Waveform, template: Waveform,
                         upsample_factor: int = DEFAULT_UPSAMPLE,
                         band: Optional[Tuple[float, float]] = DEFAULT_BAND
                         ) -> CorrelationResult:
    """Filter, correlate with the template, and read the peak time.

    The peak is refined by band-limited (FFT) resampling of a window around
    the strongest correlation sample; ties resolve to the earliest time.
    """
    if upsample_factor < 1:
        raise ValueError("upsample_factor must be >= 1")
    if len(template.samples) > len(r.samples):
        raise TemplateTooLong(
            f"template ({len(template.samples)}) longer than input "
            f"({len(r.samples)})")
    if r.sample_rate != template.sample_rate:
        raise ValueError("input and template sample rates differ")
    fs = r.sample_rate
    filtered = bandpass(r, band) if band is not None else r
    c = signal.correlate(filtered.samples, template.samples,
                         mode="full", method="fft")
    t0 = (r.t0 - template.t0) - (len(template.samples) - 1) / fs
    corr = Waveform(c, fs, t0)

    k = int(np.argmax(np.abs(c)))
    if upsample_factor == 1:
        return CorrelationResult(corr, t0 + k / fs)

    # Upsample only a window around the coarse peak; the sub-sample maximum
    # lies within one sample of it, so search just the central region to
    # keep FFT edge effects out.
    half = min(256, k, len(c) - 1 - k)
    seg = c[k - half:k + half + 1]
    up = signal.resample(seg, len(seg) * upsample_factor)
    center = half * upsample_factor
    span = max(upsample_factor, 2)
    lo = max(center - 2 * span, 0)
    hi = min(center + 2 * span + 1, len(up))
    j = lo + int(np.argmax(np.abs(up[lo:hi])))
    peak_time = t0 + (k - half) / fs + j / (fs * upsample_factor)
    return CorrelationResult(corr, peak_time)


def estimate_tdoa(a: CorrelationResult, b: CorrelationResult) -> float:
    """Arrival-time difference of two receive chains, in seconds."""
    return a.peak_time - b.peak_time


def rss_from_correlation(c: CorrelationResult,
                         window: float = DEFAULT_RSS_WINDOW) -> float:
    """Mean squared correlation over [peak, peak + window].

    Trapezoidal approximation of the time-normalized energy integral; the
    window rides on the detected peak, so the value is delay-invariant.
    """
    if window <= 0:
        raise WindowOutOfSupport("window must be > 0")
    fs = c.c.sample_rate
    ia = int(math.ceil((c.peak_time - c.c.t0) * fs - 1e-9))
    ib = int(math.floor((c.peak_time + window - c.c.t0) * fs + 1e-9))
    if ia < 0 or ib >= len(c.c.samples) or ib <= ia:
        raise WindowOutOfSupport(
            f"window [{c.peak_time:.3e}, {c.peak_time + window:.3e}] s "
            f"outside correlation support")
    sq = np.square(c.c.samples[ia:ib + 1])
    return float(np.trapezoid(sq, dx=1.0 / fs) / window)
