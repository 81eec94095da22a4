"""Raw-audio feature extraction: RMS normalization, framing, MFCCs,
spectral descriptors, and the 30 language-level features."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .corpus import AudioClip

SILENCE_RMS = 1e-8
LOG_FLOOR = 1e-10
N_MEL_FILTERS = 26
N_MFCC = 12

FEATURE_NAMES = (
    ["energy_dynamic_range"]
    + [f"mfcc_{i}_mean" for i in range(1, 13)]
    + [f"mfcc_{i}_std" for i in range(1, 13)]
    + ["spectral_centroid_mean", "spectral_centroid_std",
       "spectral_bandwidth_mean", "spectral_bandwidth_std",
       "zcr_mean"]
)
assert len(FEATURE_NAMES) == 30


class SilentClipError(ValueError):
    """Clip too quiet to normalize; excluded from feature extraction."""


@dataclass(frozen=True)
class FrameSpec:
    window_len: int = 400   # 25 ms at 16 kHz
    hop: int = 160          # 10 ms
    fft_size: int = 512

    def __post_init__(self):
        if not 0 < self.hop <= self.window_len <= self.fft_size:
            raise ValueError("need 0 < hop <= window_len <= fft_size")


@dataclass
class Frames:
    raw: np.ndarray       # (n_frames, window_len), pre-window samples
    windowed: np.ndarray  # (n_frames, fft_size), Hann-windowed, zero-padded

    @property
    def n_frames(self) -> int:
        return self.raw.shape[0]


@dataclass
class ClipFeatures:
    mfcc: np.ndarray               # (n_frames, 12)
    spectral_centroid: np.ndarray  # Hz
    spectral_bandwidth: np.ndarray # Hz
    zcr: np.ndarray                # in [0, 1]
    frame_energy_db: np.ndarray
    energy_dynamic_range: float


def rms_normalize(clip: AudioClip, target_rms: float = 0.1) -> AudioClip:
    """Scale the clip so its RMS equals target_rms."""
    samples = np.asarray(clip.samples, dtype=np.float64)
    rms = math.sqrt(float(np.mean(samples**2)))
    if rms <= SILENCE_RMS:
        raise SilentClipError(f"clip RMS {rms:.3g} below threshold")
    return AudioClip(samples=samples * (target_rms / rms), sample_rate=clip.sample_rate)


def frame_signal(clip: AudioClip, spec: FrameSpec = FrameSpec()) -> Frames:
    """Slice into overlapping frames; windowed copies use a periodic Hann."""
    samples = np.asarray(clip.samples, dtype=np.float64)
    if samples.shape[0] < spec.window_len:
        raise ValueError(
            f"clip of {samples.shape[0]} samples shorter than one window "
            f"({spec.window_len})"
        )
    n_frames = 1 + (samples.shape[0] - spec.window_len) // spec.hop
    idx = np.arange(spec.window_len)[None, :] + spec.hop * np.arange(n_frames)[:, None]
    raw = samples[idx]
    hann = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(spec.window_len) / spec.window_len)
    windowed = np.zeros((n_frames, spec.fft_size))
    windowed[:, : spec.window_len] = raw * hann
    return Frames(raw=raw, windowed=windowed)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(spec: FrameSpec, sample_rate: int) -> np.ndarray:
    """Triangular mel filters over the rfft bins, spanning 0..Nyquist."""
    n_bins = spec.fft_size // 2 + 1
    f_max = sample_rate / 2.0
    mel_points = np.linspace(0.0, float(hz_to_mel(f_max)), N_MEL_FILTERS + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.arange(n_bins) * sample_rate / spec.fft_size
    fbank = np.zeros((N_MEL_FILTERS, n_bins))
    for m in range(N_MEL_FILTERS):
        lo, mid, hi = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        rising = (bin_freqs - lo) / (mid - lo)
        falling = (hi - bin_freqs) / (hi - mid)
        # normalize each triangle to unit discrete sum: a flat power spectrum
        # maps to exactly equal mel energies, keeping broadband tilt out of
        # the cepstrum
        tri = np.maximum(0.0, np.minimum(rising, falling))
        fbank[m] = tri / tri.sum()
    return fbank


def mel_mfcc(frames: Frames, spec: FrameSpec, sample_rate: int) -> np.ndarray:
    """MFCCs 1..12 per frame (orthonormal DCT-II of log mel energies)."""
    if sample_rate != 16000:
        raise ValueError(f"feature extraction expects 16 kHz audio, got {sample_rate}")
    power = np.abs(np.fft.rfft(frames.windowed, axis=1)) ** 2
    mel_energy = power @ mel_filterbank(spec, sample_rate).T
    log_mel = np.log(np.maximum(mel_energy, LOG_FLOOR))
    coeffs = dct(log_mel, type=2, norm="ortho", axis=1)
    return coeffs[:, 1 : N_MFCC + 1]


def frame_spectral(
    frames: Frames, spec: FrameSpec, sample_rate: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-frame spectral centroid, bandwidth, zero-crossing rate, energy dB."""
    mag = np.abs(np.fft.rfft(frames.windowed, axis=1))
    freqs = np.arange(mag.shape[1]) * sample_rate / spec.fft_size
    total = mag.sum(axis=1)
    safe = np.where(total > 0, total, 1.0)
    centroid = (mag * freqs).sum(axis=1) / safe
    bandwidth = np.sqrt((mag * (freqs[None, :] - centroid[:, None]) ** 2).sum(axis=1) / safe)

    signs = np.sign(frames.raw)
    zcr = (np.abs(np.diff(signs, axis=1)) > 0).sum(axis=1) / (spec.window_len - 1)

    rms = np.sqrt((frames.raw**2).mean(axis=1))
    energy_db = 20.0 * np.log10(rms + LOG_FLOOR)
    return centroid, bandwidth, zcr, energy_db


def energy_dynamic_range(frame_energy_db: np.ndarray) -> float:
    """p95 - p5 of per-frame energy in dB (linear-interpolated percentiles)."""
    frame_energy_db = np.asarray(frame_energy_db, dtype=np.float64)
    if frame_energy_db.shape[0] < 2:
        raise ValueError("need at least 2 frames for a dynamic range")
    p5, p95 = np.percentile(frame_energy_db, [5.0, 95.0])
    return float(p95 - p5)


def clip_features(
    clip: AudioClip, spec: FrameSpec = FrameSpec(), target_rms: float = 0.1
) -> ClipFeatures:
    """Full per-clip pipeline: RMS-normalize, frame, extract descriptors."""
    norm = rms_normalize(clip, target_rms)
    frames = frame_signal(norm, spec)
    mfcc = mel_mfcc(frames, spec, clip.sample_rate)
    centroid, bandwidth, zcr, energy_db = frame_spectral(frames, spec, clip.sample_rate)
    return ClipFeatures(
        mfcc=mfcc,
        spectral_centroid=centroid,
        spectral_bandwidth=bandwidth,
        zcr=zcr,
        frame_energy_db=energy_db,
        energy_dynamic_range=energy_dynamic_range(energy_db),
    )


def language_features(clips: list[ClipFeatures]) -> dict[str, float]:
    """Aggregate clip statistics into the 30 named language-level features.

    Within each clip, per-frame series reduce to mean and population std;
    language values are unweighted means over clips, so a long clip counts
    no more than a short one.
    """
    if not clips:
        raise ValueError("no usable (non-silent) clips for this language")
    per_clip = []
    for cf in clips:
        row = [cf.energy_dynamic_range]
        row += list(cf.mfcc.mean(axis=0))
        row += list(cf.mfcc.std(axis=0))
        row += [
            float(cf.spectral_centroid.mean()), float(cf.spectral_centroid.std()),
            float(cf.spectral_bandwidth.mean()), float(cf.spectral_bandwidth.std()),
            float(cf.zcr.mean()),
        ]
        per_clip.append(row)
    means = np.mean(np.asarray(per_clip, dtype=np.float64), axis=0)
    return dict(zip(FEATURE_NAMES, (float(v) for v in means)))
