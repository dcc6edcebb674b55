"""Metamorphic audio transformations with category constraints and lineage.

Eight transforms over normalized PCM, grouped so a mutant's lineage alters
volume, speed or clearness at most once each (the two "unaffected"
transforms may repeat).  Every transform is pure given an explicit seeded
generator: same clip, kind and seed give bit-identical samples and
parameters, which makes fuzz campaigns replayable.

Parameter ranges are deliberately conservative so mutants stay intelligible:

- volume gain 0.7..1.3, pitch shift -2..+2 semitones, speed 0.9..1.1
- added white noise at 25..40 dB SNR
- low-pass cutoff 2..7 kHz, high-pass cutoff 100..400 Hz
- compressor fixed at -20 dBFS threshold, 4:1 ratio; trim floor -40 dBFS

Canonical WAV: RIFF/WAVE, PCM signed 16-bit little-endian, mono, 16 kHz.
"""

from __future__ import annotations

import enum
import json
import wave
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .errors import FullyTrimmedError, UnsupportedFormatError, ValidationError

SAMPLE_RATE = 16000

VOLUME_GAIN_RANGE = (0.7, 1.3)
PITCH_SEMITONE_RANGE = (-2.0, 2.0)
SPEED_FACTOR_RANGE = (0.9, 1.1)
NOISE_SNR_DB_RANGE = (25.0, 40.0)
LOWPASS_CUTOFF_HZ_RANGE = (2000.0, 7000.0)
HIGHPASS_CUTOFF_HZ_RANGE = (100.0, 400.0)
DRC_THRESHOLD_DBFS = -20.0
DRC_RATIO = 4.0
TRIM_THRESHOLD_DBFS = -40.0

DEFAULT_MAX_HISTORY = 6

_PV_N_FFT = 512
_PV_HOP = 128


@dataclass(frozen=True)
class AudioClip:
    """Normalized mono PCM: samples in [-1, 1] at a fixed rate."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if arr.size < 1:
            raise ValidationError("clip must contain at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("clip contains non-finite samples")
        if self.sample_rate < 1:
            raise ValidationError("sample rate must be positive")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


class TransformCategory(enum.Enum):
    VRT = "volume"
    SRT = "speed"
    CRT = "clearness"
    UAT = "unaffected"


class TransformKind(enum.Enum):
    ADD_WHITE_NOISE = "addwhitenoise"
    PITCH_SHIFT = "pitchshift"
    TRIM = "trim"
    CHANGE_SPEED = "changespeed"
    CHANGE_VOLUME = "changevolume"
    DRC = "drc"
    LOW_PASS_FILTER = "lowpassfilter"
    HIGH_PASS_FILTER = "highpassfilter"

    @property
    def category(self) -> TransformCategory:
        return _CATEGORY[self]


_CATEGORY = {
    TransformKind.CHANGE_VOLUME: TransformCategory.VRT,
    TransformKind.LOW_PASS_FILTER: TransformCategory.VRT,
    TransformKind.HIGH_PASS_FILTER: TransformCategory.VRT,
    TransformKind.PITCH_SHIFT: TransformCategory.SRT,
    TransformKind.CHANGE_SPEED: TransformCategory.SRT,
    TransformKind.ADD_WHITE_NOISE: TransformCategory.CRT,
    TransformKind.DRC: TransformCategory.UAT,
    TransformKind.TRIM: TransformCategory.UAT,
}

_RESTRICTED = (TransformCategory.VRT, TransformCategory.SRT, TransformCategory.CRT)


@dataclass(frozen=True)
class AppliedTransform:
    """One lineage entry: what was applied, with which parameters and seed."""

    kind: TransformKind
    params: tuple[tuple[str, float], ...]
    seed: int

    def param_dict(self) -> dict[str, float]:
        return dict(self.params)


def check_category_constraint(history) -> bool:
    """True iff each restricted category appears at most once."""
    seen = set()
    for entry in history:
        cat = entry.kind.category
        if cat in _RESTRICTED:
            if cat in seen:
                return False
            seen.add(cat)
    return True


@dataclass(frozen=True)
class MutationRecord:
    """Lineage of a mutant: originating seed id plus ordered transform list."""

    seed_id: str
    history: tuple[AppliedTransform, ...] = ()

    def __post_init__(self):
        if not check_category_constraint(self.history):
            raise ValidationError(
                f"mutant of {self.seed_id}: a restricted transform category appears twice"
            )

    def extend(self, kind: TransformKind, params: dict, seed: int) -> "MutationRecord":
        entry = AppliedTransform(kind, tuple(sorted(params.items())), seed)
        return MutationRecord(self.seed_id, self.history + (entry,))

    def used_categories(self) -> set[TransformCategory]:
        return {e.kind.category for e in self.history if e.kind.category in _RESTRICTED}

    def to_json(self) -> str:
        doc = {
            "seed_id": self.seed_id,
            "history": [
                {"kind": e.kind.value, "params": e.param_dict(), "seed": e.seed}
                for e in self.history
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "MutationRecord":
        doc = json.loads(text)
        history = tuple(
            AppliedTransform(
                TransformKind(e["kind"]),
                tuple(sorted((k, float(v)) for k, v in e["params"].items())),
                int(e["seed"]),
            )
            for e in doc.get("history", [])
        )
        return MutationRecord(doc["seed_id"], history)


def pick_transform(
    rec: MutationRecord,
    rng: np.random.Generator,
    max_history: int = DEFAULT_MAX_HISTORY,
) -> Optional[TransformKind]:
    """Uniform draw from the transforms still admissible for this lineage.

    Unaffected transforms are always admissible, so the draw only comes up
    empty once the lineage reaches the history cap — that is the reachable
    "no further transformation" case the fuzz loop skips over.
    """
    if len(rec.history) >= max_history:
        return None
    used = rec.used_categories()
    admissible = [k for k in TransformKind if k.category not in used or k.category is TransformCategory.UAT]
    return admissible[int(rng.integers(len(admissible)))]


# -- transform implementations ----------------------------------------------


def _clip01(samples: np.ndarray) -> np.ndarray:
    return np.clip(samples, -1.0, 1.0)


def _add_white_noise(x: np.ndarray, rng) -> tuple[np.ndarray, dict]:
    snr_db = float(rng.uniform(*NOISE_SNR_DB_RANGE))
    power = float(np.mean(x**2))
    std = np.sqrt(power / 10.0 ** (snr_db / 10.0)) if power > 0 else 0.0
    noise = rng.standard_normal(x.size) * std
    return _clip01(x + noise), {"snr_db": snr_db}


def _change_volume(x: np.ndarray, rng) -> tuple[np.ndarray, dict]:
    gain = float(rng.uniform(*VOLUME_GAIN_RANGE))
    return _clip01(gain * x), {"gain": gain}


def _trim(x: np.ndarray, rng) -> tuple[np.ndarray, dict]:
    threshold = 10.0 ** (TRIM_THRESHOLD_DBFS / 20.0)
    loud = np.nonzero(np.abs(x) >= threshold)[0]
    if loud.size == 0:
        raise FullyTrimmedError("every sample is below the trim threshold")
    return x[loud[0] : loud[-1] + 1], {"threshold_dbfs": TRIM_THRESHOLD_DBFS}


def _resample_linear(x: np.ndarray, out_len: int, step: float) -> np.ndarray:
    pos = np.minimum(np.arange(out_len) * step, x.size - 1)
    return np.interp(pos, np.arange(x.size), x)


def _change_speed(x: np.ndarray, rng) -> tuple[np.ndarray, dict]:
    factor = float(rng.uniform(*SPEED_FACTOR_RANGE))
    out_len = int(round(x.size / factor))
    if out_len < 1:
        raise ValidationError("speed change would produce an empty clip")
    return _clip01(_resample_linear(x, out_len, factor)), {"factor": factor}


def _drc(x: np.ndarray, rng) -> tuple[np.ndarray, dict]:
    threshold = 10.0 ** (DRC_THRESHOLD_DBFS / 20.0)
    mag = np.abs(x)
    over = mag > threshold
    compressed = np.where(over, threshold * (mag / threshold) ** (1.0 / DRC_RATIO), mag)
    return np.sign(x) * compressed, {"threshold_dbfs": DRC_THRESHOLD_DBFS, "ratio": DRC_RATIO}


def _biquad_coeffs(kind: str, cutoff_hz: float, sample_rate: int) -> tuple[np.ndarray, np.ndarray]:
    # RBJ cookbook second-order sections at Butterworth Q
    w0 = 2.0 * np.pi * cutoff_hz / sample_rate
    q = 1.0 / np.sqrt(2.0)
    alpha = np.sin(w0) / (2.0 * q)
    cosw = np.cos(w0)
    if kind == "low":
        b = np.array([(1 - cosw) / 2.0, 1 - cosw, (1 - cosw) / 2.0])
    else:
        b = np.array([(1 + cosw) / 2.0, -(1 + cosw), (1 + cosw) / 2.0])
    a = np.array([1 + alpha, -2 * cosw, 1 - alpha])
    return b / a[0], a / a[0]


def _low_pass(x: np.ndarray, rng) -> tuple[np.ndarray, dict]:
    cutoff = float(rng.uniform(*LOWPASS_CUTOFF_HZ_RANGE))
    b, a = _biquad_coeffs("low", cutoff, SAMPLE_RATE)
    return _clip01(lfilter(b, a, x)), {"cutoff_hz": cutoff}


def _high_pass(x: np.ndarray, rng) -> tuple[np.ndarray, dict]:
    cutoff = float(rng.uniform(*HIGHPASS_CUTOFF_HZ_RANGE))
    b, a = _biquad_coeffs("high", cutoff, SAMPLE_RATE)
    return _clip01(lfilter(b, a, x)), {"cutoff_hz": cutoff}


def _stft(x: np.ndarray, n_fft: int, hop: int, window: np.ndarray) -> np.ndarray:
    n_frames = 1 + (x.size - n_fft) // hop
    frames = np.stack([x[i * hop : i * hop + n_fft] * window for i in range(n_frames)])
    return np.fft.rfft(frames, axis=1).T


def _istft(spec: np.ndarray, n_fft: int, hop: int, window: np.ndarray) -> np.ndarray:
    n_frames = spec.shape[1]
    out_len = n_fft + hop * (n_frames - 1)
    out = np.zeros(out_len)
    norm = np.zeros(out_len)
    frames = np.fft.irfft(spec.T, n=n_fft, axis=1)
    for i in range(n_frames):
        out[i * hop : i * hop + n_fft] += frames[i] * window
        norm[i * hop : i * hop + n_fft] += window**2
    return out / np.maximum(norm, 1e-8)


def _phase_vocoder(spec: np.ndarray, rate: float, hop: int, n_fft: int) -> np.ndarray:
    # Resample the frame axis at fractional positions while accumulating
    # phase so sinusoids stay coherent across the new hop spacing.
    bins = spec.shape[0]
    steps = np.arange(0, spec.shape[1], rate)
    phi_advance = 2.0 * np.pi * hop * np.arange(bins) / n_fft
    padded = np.concatenate([spec, np.zeros((bins, 2), dtype=spec.dtype)], axis=1)
    out = np.zeros((bins, steps.size), dtype=np.complex128)
    phase = np.angle(spec[:, 0])
    for t, step in enumerate(steps):
        i0 = int(np.floor(step))
        frac = step - i0
        mag = (1 - frac) * np.abs(padded[:, i0]) + frac * np.abs(padded[:, i0 + 1])
        out[:, t] = mag * np.exp(1j * phase)
        dphi = np.angle(padded[:, i0 + 1]) - np.angle(padded[:, i0]) - phi_advance
        dphi -= 2.0 * np.pi * np.round(dphi / (2.0 * np.pi))
        phase += phi_advance + dphi
    return out


def _time_stretch(x: np.ndarray, alpha: float) -> np.ndarray:
    """Stretch duration by alpha without changing pitch (phase vocoder)."""
    window = np.hanning(_PV_N_FFT)
    spec = _stft(x, _PV_N_FFT, _PV_HOP, window)
    stretched = _phase_vocoder(spec, 1.0 / alpha, _PV_HOP, _PV_N_FFT)
    return _istft(stretched, _PV_N_FFT, _PV_HOP, window)


def _fit_length(x: np.ndarray, n: int) -> np.ndarray:
    if x.size >= n:
        return x[:n]
    return np.concatenate([x, np.zeros(n - x.size)])


def _pitch_shift(x: np.ndarray, rng) -> tuple[np.ndarray, dict]:
    semitones = float(rng.uniform(*PITCH_SEMITONE_RANGE))
    rate = 2.0 ** (semitones / 12.0)
    if x.size < _PV_N_FFT + _PV_HOP:
        raise ValidationError("clip too short for a pitch shift")
    # faster/slower playback moves the pitch; the vocoder restores duration
    resampled = _resample_linear(x, max(int(round(x.size / rate)), _PV_N_FFT + _PV_HOP), rate)
    stretched = _time_stretch(resampled, x.size / resampled.size)
    return _clip01(_fit_length(stretched, x.size)), {"semitones": semitones}


_TRANSFORMS = {
    TransformKind.ADD_WHITE_NOISE: _add_white_noise,
    TransformKind.PITCH_SHIFT: _pitch_shift,
    TransformKind.TRIM: _trim,
    TransformKind.CHANGE_SPEED: _change_speed,
    TransformKind.CHANGE_VOLUME: _change_volume,
    TransformKind.DRC: _drc,
    TransformKind.LOW_PASS_FILTER: _low_pass,
    TransformKind.HIGH_PASS_FILTER: _high_pass,
}


def apply_transform(
    a: AudioClip, kind: TransformKind, rng: np.random.Generator
) -> tuple[AudioClip, dict]:
    """Apply one transform, returning the mutant and the sampled parameters."""
    samples, params = _TRANSFORMS[kind](a.samples, rng)
    return AudioClip(samples, a.sample_rate), params


# -- canonical WAV I/O -------------------------------------------------------


def load_wav(path) -> AudioClip:
    """Read a canonical WAV file (PCM16, mono, 16 kHz)."""
    with wave.open(str(path), "rb") as fh:
        if fh.getcomptype() != "NONE":
            raise UnsupportedFormatError("compression", f"expected NONE, got {fh.getcomptype()}")
        if fh.getnchannels() != 1:
            raise UnsupportedFormatError("channels", f"expected mono, got {fh.getnchannels()}")
        if fh.getsampwidth() != 2:
            raise UnsupportedFormatError("sample_width", f"expected 2 bytes, got {fh.getsampwidth()}")
        if fh.getframerate() != SAMPLE_RATE:
            raise UnsupportedFormatError("sample_rate", f"expected {SAMPLE_RATE}, got {fh.getframerate()}")
        n = fh.getnframes()
        if n < 1:
            raise UnsupportedFormatError("frames", "empty audio stream")
        raw = fh.readframes(n)
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32767.0
    return AudioClip(np.clip(samples, -1.0, 1.0), SAMPLE_RATE)


def save_wav(a: AudioClip, path) -> None:
    """Write a canonical WAV file; quantization error is at most 1/32768."""
    if a.sample_rate != SAMPLE_RATE:
        raise UnsupportedFormatError("sample_rate", f"expected {SAMPLE_RATE}, got {a.sample_rate}")
    q = np.round(np.clip(a.samples, -1.0, 1.0) * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(SAMPLE_RATE)
        fh.writeframes(q.tobytes())
