"""WAV audio helpers: PCM signed 16-bit, mono, 16 kHz throughout."""

from __future__ import annotations

import math
import wave

import numpy as np

SAMPLE_RATE = 16_000
SAMPLE_WIDTH = 2  # bytes, signed 16-bit

__all__ = ["SAMPLE_RATE", "read_wav", "write_wav", "sine_tone", "AudioFormatError"]


class AudioFormatError(ValueError):
    pass


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a mono 16-bit WAV file; returns (int16 samples, sample rate)."""
    with wave.open(str(path), "rb") as wf:
        if wf.getnchannels() != 1:
            raise AudioFormatError(f"{path}: expected mono, got {wf.getnchannels()} channels")
        if wf.getsampwidth() != SAMPLE_WIDTH:
            raise AudioFormatError(f"{path}: expected 16-bit samples")
        rate = wf.getframerate()
        data = wf.readframes(wf.getnframes())
    return np.frombuffer(data, dtype="<i2"), rate


def write_wav(path, samples: np.ndarray, rate: int = SAMPLE_RATE) -> None:
    samples = np.asarray(samples)
    if samples.dtype != np.int16:
        raise AudioFormatError(f"samples must be int16, got {samples.dtype}")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(SAMPLE_WIDTH)
        wf.setframerate(rate)
        wf.writeframes(samples.tobytes())


def sine_tone(duration_s: float, freq_hz: float = 440.0, rate: int = SAMPLE_RATE,
              amplitude: float = 0.3) -> np.ndarray:
    """A plain sine burst; the mock speech generator's entire repertoire."""
    n = round(duration_s * rate)
    t = np.arange(n) / rate
    return np.round(amplitude * 32767.0 * np.sin(2.0 * math.pi * freq_hz * t)).astype(np.int16)
