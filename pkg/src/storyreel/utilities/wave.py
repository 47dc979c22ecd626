"""Minimal uncompressed WAV helpers: 8 kHz, mono, 16-bit PCM.

8000 samples per second means exactly 8 samples per millisecond, so every
integer duration maps to a whole number of frames.
"""

from __future__ import annotations

import io
import struct
import wave

SAMPLE_RATE = 8000
SAMPLES_PER_MS = SAMPLE_RATE // 1000


def make_wave(duration_ms: int, sample_value: int = 0) -> bytes:
    if duration_ms < 0:
        raise ValueError("duration must be non-negative")
    frames = duration_ms * SAMPLES_PER_MS
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(SAMPLE_RATE)
        wav.writeframes(struct.pack("<h", sample_value) * frames)
    return buf.getvalue()


def wave_duration_ms(data: bytes) -> int:
    with wave.open(io.BytesIO(data), "rb") as wav:
        frames = wav.getnframes()
        rate = wav.getframerate()
    return frames * 1000 // rate
