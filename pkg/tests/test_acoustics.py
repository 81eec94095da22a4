import numpy as np
import pytest

from helpers import sine_clip
from langtree.acoustics import (
    FEATURE_NAMES,
    ClipFeatures,
    FrameSpec,
    SilentClipError,
    clip_features,
    energy_dynamic_range,
    frame_signal,
    frame_spectral,
    hz_to_mel,
    language_features,
    mel_filterbank,
    mel_mfcc,
    rms_normalize,
)
from langtree.corpus import AudioClip


def clip_of(samples):
    return AudioClip(np.asarray(samples, dtype=np.float64), 16000)


class TestRmsNormalize:
    def test_halving(self):
        samples = np.full(1000, 0.2)
        out = rms_normalize(clip_of(samples), target_rms=0.1)
        np.testing.assert_allclose(out.samples, samples / 2, atol=1e-12)

    def test_identity_at_target(self):
        samples = sine_clip(440, amp=0.1 * np.sqrt(2))
        out = rms_normalize(clip_of(samples))
        np.testing.assert_allclose(out.samples, samples, atol=1e-9)

    def test_target_reached(self):
        rng = np.random.default_rng(30)
        out = rms_normalize(clip_of(rng.normal(0, 0.3, 5000)))
        assert np.sqrt((out.samples**2).mean()) == pytest.approx(0.1, abs=1e-9)

    def test_silent_clip(self):
        with pytest.raises(SilentClipError):
            rms_normalize(clip_of(np.zeros(1000)))


class TestFraming:
    def test_frame_count(self):
        frames = frame_signal(clip_of(np.ones(16000)))
        assert frames.n_frames == 98  # 1 + (16000-400)//160

    def test_exactly_one_window(self):
        frames = frame_signal(clip_of(np.ones(400)))
        assert frames.n_frames == 1

    def test_too_short(self):
        with pytest.raises(ValueError, match="shorter"):
            frame_signal(clip_of(np.ones(399)))

    def test_windowed_shape_and_padding(self):
        frames = frame_signal(clip_of(np.ones(800)))
        assert frames.windowed.shape[1] == 512
        assert np.all(frames.windowed[:, 400:] == 0.0)

    def test_raw_frames_slice_signal(self):
        samples = np.arange(800, dtype=np.float64)
        frames = frame_signal(clip_of(samples))
        np.testing.assert_array_equal(frames.raw[0], samples[:400])
        np.testing.assert_array_equal(frames.raw[1], samples[160:560])


class TestMfcc:
    def test_zero_frames_zero_coeffs(self):
        spec = FrameSpec()
        frames = frame_signal(clip_of(np.zeros(800) + 1e-30))
        frames.raw[:] = 0.0
        frames.windowed[:] = 0.0
        coeffs = mel_mfcc(frames, spec, 16000)
        # constant (floored) log spectrum lands entirely in excluded c0
        np.testing.assert_allclose(coeffs, 0.0, atol=1e-10)

    def test_wrong_rate(self):
        frames = frame_signal(clip_of(np.ones(800)))
        with pytest.raises(ValueError, match="16 kHz"):
            mel_mfcc(frames, FrameSpec(), 8000)

    def test_tone_hits_correct_mel_band(self):
        spec = FrameSpec()
        fbank = mel_filterbank(spec, 16000)
        frames = frame_signal(clip_of(sine_clip(440)), spec)
        power = np.abs(np.fft.rfft(frames.windowed, axis=1)) ** 2
        mel_energy = (power @ fbank.T).mean(axis=0)
        # filter whose peak is nearest 440 Hz on the mel scale must win
        mel_peaks = np.linspace(0, hz_to_mel(8000), 28)[1:-1]
        expected = int(np.argmin(np.abs(mel_peaks - hz_to_mel(440))))
        assert int(np.argmax(mel_energy)) == expected

    def test_flat_spectrum_kills_tilt(self):
        # an exactly flat power spectrum must put all its energy in the
        # excluded c0, leaving c1..c12 at zero
        spec = FrameSpec()
        frames = frame_signal(clip_of(np.zeros(800)), spec)
        frames.windowed[:] = 0.0
        frames.windowed[:, 0] = 1.0  # impulse: |FFT| identically 1
        coeffs = mel_mfcc(frames, spec, 16000)
        np.testing.assert_allclose(coeffs, 0.0, atol=1e-9)

    def test_white_noise_c1_small(self):
        # genuine white noise keeps a small residual c1 from the per-filter
        # Jensen bias of the log; assert it stays modest and finite
        rng = np.random.default_rng(31)
        spec = FrameSpec()
        coeffs = []
        for _ in range(20):
            frames = frame_signal(clip_of(rng.uniform(-0.5, 0.5, 160 * 52 + 240)), spec)
            coeffs.append(mel_mfcc(frames, spec, 16000))
        all_coeffs = np.vstack(coeffs)
        assert all_coeffs.shape[0] >= 1000
        assert np.isfinite(all_coeffs).all()
        assert abs(all_coeffs[:, 0].mean()) < 0.5

    def test_shape(self):
        frames = frame_signal(clip_of(np.random.default_rng(0).normal(0, 0.1, 4000)))
        assert mel_mfcc(frames, FrameSpec(), 16000).shape == (frames.n_frames, 12)


class TestSpectral:
    def test_tone_centroid_and_zcr(self):
        spec = FrameSpec()
        frames = frame_signal(clip_of(sine_clip(440)), spec)
        centroid, bandwidth, zcr, _ = frame_spectral(frames, spec, 16000)
        assert abs(centroid.mean() - 440.0) < 25.0
        assert zcr.mean() == pytest.approx(2 * 440 / 16000, rel=0.05)
        assert np.all(bandwidth >= 0.0)

    def test_constant_signal_zcr_zero(self):
        spec = FrameSpec()
        frames = frame_signal(clip_of(np.full(800, 0.5)), spec)
        _, _, zcr, _ = frame_spectral(frames, spec, 16000)
        assert np.all(zcr == 0.0)

    def test_alternating_zcr_one(self):
        spec = FrameSpec()
        samples = np.tile([0.5, -0.5], 400)
        frames = frame_signal(clip_of(samples), spec)
        _, _, zcr, _ = frame_spectral(frames, spec, 16000)
        assert np.all(zcr == 1.0)

    def test_ranges(self):
        rng = np.random.default_rng(32)
        spec = FrameSpec()
        frames = frame_signal(clip_of(rng.normal(0, 0.1, 3200)), spec)
        centroid, bandwidth, zcr, _ = frame_spectral(frames, spec, 16000)
        assert np.all((zcr >= 0) & (zcr <= 1))
        assert np.all((centroid >= 0) & (centroid <= 8000))


class TestDynamicRange:
    def test_constant_tone_small(self):
        features = clip_features(clip_of(sine_clip(440, seconds=2.0)))
        assert features.energy_dynamic_range < 0.1

    def test_two_level_clip(self):
        loud = sine_clip(440, seconds=1.0, amp=1.0)
        quiet = sine_clip(440, seconds=1.0, amp=0.1)
        features = clip_features(clip_of(np.concatenate([loud, quiet])))
        assert features.energy_dynamic_range == pytest.approx(20.0, abs=0.5)

    def test_too_few_frames(self):
        with pytest.raises(ValueError):
            energy_dynamic_range(np.array([1.0]))


class TestGainInvariance:
    def test_all_features_invariant(self):
        rng = np.random.default_rng(33)
        samples = sine_clip(300, seconds=1.0, amp=0.3) + rng.normal(0, 0.05, 16000)
        f1 = language_features([clip_features(clip_of(samples))])
        f2 = language_features([clip_features(clip_of(samples * 8.0))])
        for name in FEATURE_NAMES:
            assert abs(f1[name] - f2[name]) < 1e-6, name


class TestLanguageFeatures:
    def test_single_clip_identity(self):
        cf = clip_features(clip_of(sine_clip(500)))
        feats = language_features([cf])
        assert feats["zcr_mean"] == pytest.approx(float(cf.zcr.mean()))
        assert feats["energy_dynamic_range"] == pytest.approx(cf.energy_dynamic_range)

    def test_unweighted_mean_over_clips(self):
        cf1 = clip_features(clip_of(np.concatenate(
            [sine_clip(440, 0.5, amp=1.0), sine_clip(440, 0.5, amp=0.1)])))
        cf2 = clip_features(clip_of(sine_clip(440, 2.0)))
        feats = language_features([cf1, cf2])
        expected = (cf1.energy_dynamic_range + cf2.energy_dynamic_range) / 2
        assert feats["energy_dynamic_range"] == pytest.approx(expected)

    def test_schema(self):
        feats = language_features([clip_features(clip_of(sine_clip(440)))])
        assert list(feats) == list(FEATURE_NAMES)
        assert len(feats) == 30
        assert all(np.isfinite(v) for v in feats.values())

    def test_clip_order_irrelevant(self):
        clips = [clip_features(clip_of(sine_clip(f))) for f in (300, 600, 900)]
        f1 = language_features(clips)
        f2 = language_features(clips[::-1])
        for name in FEATURE_NAMES:
            assert f1[name] == pytest.approx(f2[name], abs=1e-12)

    def test_no_clips(self):
        with pytest.raises(ValueError):
            language_features([])
