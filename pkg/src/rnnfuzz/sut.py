"""Built-in desk-scale transcriber: log filterbank front end + Elman RNN.

Anything mapping an AudioClip to (transcript, Trace) can serve as the
system under test; this module ships one that needs no external ML
framework.  Features are 20 log mel filterbank energies over 25 ms windows
with a 10 ms hop; the recurrence is a single tanh layer with greedy
decoding: per-frame argmax, consecutive duplicates collapsed, blanks
(vocabulary index 0) removed.

Weights are immutable after load and transcribe is pure, so a single
weights object can serve many threads.

Weights file: header ``RNNW 1 <input_dim> <hidden_dim> <vocab_size>``,
then row-major W_xh, W_hh, b_h, W_hy, b_y (one row per line).  Vocabulary
file: one symbol per line, taken verbatim, line 0 = blank.
"""

from __future__ import annotations

import numpy as np

from .audio import SAMPLE_RATE, AudioClip
from .errors import TraceFormatError, ValidationError
from .traces import Trace, TraceStep

WINDOW = 400  # 25 ms at 16 kHz
HOP = 160  # 10 ms
N_FFT = 512
N_BANDS = 20
ENERGY_FLOOR = 1e-10

WEIGHTS_MAGIC = "RNNW"
WEIGHTS_VERSION = 1

BLANK_TOKEN = 0


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(n_bands: int = N_BANDS, n_fft: int = N_FFT, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Triangular mel filters over the rfft bins, shape (n_bands, n_fft//2+1)."""
    n_bins = n_fft // 2 + 1
    mel_points = np.linspace(_hz_to_mel(0.0), _hz_to_mel(sample_rate / 2.0), n_bands + 2)
    hz_points = _mel_to_hz(mel_points)
    bin_freqs = np.arange(n_bins) * sample_rate / n_fft
    bank = np.zeros((n_bands, n_bins))
    for b in range(n_bands):
        lo, mid, hi = hz_points[b : b + 3]
        up = (bin_freqs - lo) / (mid - lo)
        down = (hi - bin_freqs) / (hi - mid)
        bank[b] = np.maximum(0.0, np.minimum(up, down))
    return bank


_FILTERBANK = mel_filterbank()
_WINDOW_FN = np.hanning(WINDOW)


def extract_features(a: AudioClip) -> np.ndarray:
    """Log mel filterbank energies, one row per frame, shape (frames, 20)."""
    if a.sample_rate != SAMPLE_RATE:
        raise ValidationError(f"expected {SAMPLE_RATE} Hz audio, got {a.sample_rate}")
    x = a.samples
    if x.size < WINDOW:
        raise ValidationError(f"clip too short: {x.size} samples < one {WINDOW}-sample window")
    n_frames = (x.size - WINDOW) // HOP + 1
    frames = np.stack([x[i * HOP : i * HOP + WINDOW] * _WINDOW_FN for i in range(n_frames)])
    power = np.abs(np.fft.rfft(frames, n=N_FFT, axis=1)) ** 2
    energies = power @ _FILTERBANK.T
    return np.log(np.maximum(energies, ENERGY_FLOOR))


class ToyRnnWeights:
    """Parameters of the single-layer tanh recurrence."""

    __slots__ = ("input_dim", "hidden_dim", "vocab_size", "w_xh", "w_hh", "b_h", "w_hy", "b_y")

    def __init__(self, w_xh, w_hh, b_h, w_hy, b_y):
        self.w_xh = np.asarray(w_xh, dtype=np.float64)
        self.w_hh = np.asarray(w_hh, dtype=np.float64)
        self.b_h = np.asarray(b_h, dtype=np.float64).reshape(-1)
        self.w_hy = np.asarray(w_hy, dtype=np.float64)
        self.b_y = np.asarray(b_y, dtype=np.float64).reshape(-1)
        self.hidden_dim, self.input_dim = self.w_xh.shape
        self.vocab_size = self.w_hy.shape[0]
        if self.w_hh.shape != (self.hidden_dim, self.hidden_dim):
            raise ValidationError(f"W_hh must be {self.hidden_dim}x{self.hidden_dim}")
        if self.b_h.size != self.hidden_dim or self.b_y.size != self.vocab_size:
            raise ValidationError("bias dimensions inconsistent with weight matrices")
        if self.w_hy.shape[1] != self.hidden_dim:
            raise ValidationError("W_hy column count must equal hidden_dim")
        for arr in (self.w_xh, self.w_hh, self.b_h, self.w_hy, self.b_y):
            if not np.all(np.isfinite(arr)):
                raise ValidationError("weights contain non-finite values")
            arr.setflags(write=False)


def make_random_weights(
    input_dim: int, hidden_dim: int, vocab_size: int, seed: int
) -> ToyRnnWeights:
    """Random fixture weights: fan-in scaled normals, reproducible per seed."""
    rng = np.random.default_rng(seed)
    return ToyRnnWeights(
        rng.standard_normal((hidden_dim, input_dim)) / np.sqrt(input_dim),
        rng.standard_normal((hidden_dim, hidden_dim)) / np.sqrt(hidden_dim),
        rng.standard_normal(hidden_dim) * 0.1,
        rng.standard_normal((vocab_size, hidden_dim)) / np.sqrt(hidden_dim),
        rng.standard_normal(vocab_size) * 0.1,
    )


def rnn_step(w: ToyRnnWeights, s: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One recurrence step: new state (tanh) and output logits."""
    s = np.asarray(s, dtype=np.float64).reshape(-1)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if s.size != w.hidden_dim:
        raise ValidationError(f"state length {s.size} != hidden_dim {w.hidden_dim}")
    if x.size != w.input_dim:
        raise ValidationError(f"input length {x.size} != input_dim {w.input_dim}")
    new_state = np.tanh(w.w_xh @ x + w.w_hh @ s + w.b_h)
    # tanh range check; float64 saturates to exactly +/-1 for large inputs
    assert np.all(np.abs(new_state) <= 1.0)
    logits = w.w_hy @ new_state + w.b_y
    return new_state, logits


def decode_tokens(tokens, vocab: list[str]) -> str:
    """Greedy CTC-style decode: collapse consecutive duplicates, drop blanks."""
    out = []
    prev = None
    for tok in tokens:
        if tok != prev and tok != BLANK_TOKEN:
            out.append(vocab[tok])
        prev = tok
    return "".join(out)


def transcribe(
    w: ToyRnnWeights, a: AudioClip, vocab: list[str], trace_id: str = "utt"
) -> tuple[str, Trace]:
    """Run the recurrence over all frames from the zero state.

    Returns the decoded transcript and a Trace recording every
    (state-before-step, feature frame, argmax token) plus the final state.
    Deterministic: repeated calls yield identical output.
    """
    if len(vocab) != w.vocab_size:
        raise ValidationError(f"vocab has {len(vocab)} symbols, weights expect {w.vocab_size}")
    features = extract_features(a)
    state = np.zeros(w.hidden_dim)
    steps = []
    tokens = []
    for frame in features:
        new_state, logits = rnn_step(w, state, frame)
        token = int(np.argmax(logits))
        steps.append(TraceStep(state, frame, token))
        tokens.append(token)
        state = new_state
    return decode_tokens(tokens, vocab), Trace(trace_id, steps, state)


# -- error rates -------------------------------------------------------------


def _edit_distance(a, b) -> int:
    """Unit-cost Levenshtein distance via the two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def wer(reference: str, hypothesis: str) -> float:
    """Word-level edit distance over the reference word count."""
    ref_words = reference.split()
    if not ref_words:
        raise ValidationError("reference transcript has no words")
    return _edit_distance(ref_words, hypothesis.split()) / len(ref_words)


def cer(reference: str, hypothesis: str) -> float:
    """Character-level edit distance over the reference length."""
    if not reference:
        raise ValidationError("reference transcript is empty")
    return _edit_distance(reference, hypothesis) / len(reference)


# -- weights / vocab files ----------------------------------------------------


def _fmt_row(vec) -> str:
    return " ".join(f"{float(v):.17g}" for v in np.asarray(vec).reshape(-1).tolist())


def save_weights(w: ToyRnnWeights, path) -> None:
    lines = [f"{WEIGHTS_MAGIC} {WEIGHTS_VERSION} {w.input_dim} {w.hidden_dim} {w.vocab_size}"]
    for row in w.w_xh:
        lines.append(_fmt_row(row))
    for row in w.w_hh:
        lines.append(_fmt_row(row))
    lines.append(_fmt_row(w.b_h))
    for row in w.w_hy:
        lines.append(_fmt_row(row))
    lines.append(_fmt_row(w.b_y))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_weights(path) -> ToyRnnWeights:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise TraceFormatError("line 1: empty weights file")
    header = lines[0].split(" ")
    if len(header) != 5 or header[0] != WEIGHTS_MAGIC or header[1] != str(WEIGHTS_VERSION):
        raise TraceFormatError(f"line 1: expected '{WEIGHTS_MAGIC} {WEIGHTS_VERSION} <in> <hidden> <vocab>'")
    input_dim, hidden_dim, vocab_size = (int(v) for v in header[2:])
    expected = hidden_dim + hidden_dim + 1 + vocab_size + 1
    if len(lines) - 1 != expected:
        raise TraceFormatError(f"expected {expected} matrix rows, found {len(lines) - 1}")

    def rows(count, lineno, width):
        out = []
        for i in range(count):
            parts = lines[lineno + i].split(" ")
            if len(parts) != width:
                raise TraceFormatError(f"line {lineno + i + 1}: expected {width} values")
            out.append([float(p) for p in parts])
        return np.array(out), lineno + count

    pos = 1
    w_xh, pos = rows(hidden_dim, pos, input_dim)
    w_hh, pos = rows(hidden_dim, pos, hidden_dim)
    b_h, pos = rows(1, pos, hidden_dim)
    w_hy, pos = rows(vocab_size, pos, hidden_dim)
    b_y, pos = rows(1, pos, vocab_size)
    return ToyRnnWeights(w_xh, w_hh, b_h[0], w_hy, b_y[0])


def save_vocab(vocab: list[str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(vocab) + "\n")


def load_vocab(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise TraceFormatError("vocabulary file is empty")
    return lines
