"""
Synthetic spoken-digit stand-in corpus.

Each digit is a tone whose pitch, harmonic content and burst envelope are
coded by the digit; speakers shift the pitch by a fixed factor and every
trial jitters duration, amplitude and onset with seeded noise on top. Files
follow the ``{digit}_{speaker}_{trial}.wav`` naming of the public corpus.
"""

import hashlib
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
import structlog

from nanores.core.audio_ingest import write_wav
from nanores.errors import InvalidArgument

SAMPLE_RATE = 8000
DEFAULT_SPEAKERS = ("george", "jackson", "lucas")

logger = structlog.get_logger()


def speaker_pitch(speaker: str) -> float:
    """Pitch factor in [0.85, 1.15], fixed per speaker name."""
    digest = hashlib.blake2b(speaker.encode("utf-8"), digest_size=4).digest()
    return 0.85 + 0.3 * (int.from_bytes(digest, "little") / 0xFFFFFFFF)


def _clip_rng(seed: int, speaker: str, digit: int, trial: int) -> np.random.Generator:
    key = f"{seed}:{speaker}:{digit}:{trial}".encode("utf-8")
    return np.random.default_rng(int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little"))


def synthesize_clip(
    digit: int,
    speaker: str,
    trial: int,
    seed: int = 0,
    sample_rate: int = SAMPLE_RATE,
    noise: float = 0.02,
) -> np.ndarray:
    """Samples in [-1, +1] for one synthetic utterance."""
    if not 0 <= digit <= 9:
        raise InvalidArgument("Digit must be 0-9", digit=digit)
    rng = _clip_rng(seed, speaker, digit, trial)

    duration = rng.uniform(0.35, 0.6)
    n = int(duration * sample_rate)
    t = np.arange(n) / sample_rate

    f0 = 180.0 * 2.0 ** (digit / 5.0) * speaker_pitch(speaker) * rng.uniform(0.98, 1.02)
    harmonic = 0.15 + 0.07 * digit
    tone = np.sin(2 * np.pi * f0 * t) + harmonic * np.sin(2 * np.pi * 2 * f0 * t + rng.uniform(0, np.pi))

    # digit-coded burst envelope: 1-3 bursts with a digit-dependent decay
    bursts = 1 + digit % 3
    phase = (t / duration) * bursts
    decay = 1.5 + 0.5 * (digit // 3)
    envelope = np.exp(-decay * (phase % 1.0)) * np.sin(np.pi * t / duration) ** 0.5

    onset = int(rng.uniform(0.0, 0.05) * sample_rate)
    signal = np.concatenate([np.zeros(onset), envelope * tone])
    signal = signal * rng.uniform(0.5, 0.9) / max(float(np.max(np.abs(signal))), 1e-12)
    signal = signal + rng.normal(0.0, noise, size=signal.size)
    return np.clip(signal, -1.0, 1.0)


def write_corpus(
    root: Union[str, Path],
    speakers: Sequence[str] = DEFAULT_SPEAKERS,
    digits: Sequence[int] = tuple(range(10)),
    trials: int = 10,
    seed: int = 0,
    sample_rate: int = SAMPLE_RATE,
) -> List[Path]:
    """Write ``speakers x digits x trials`` WAV files under ``root``."""
    if trials < 1:
        raise InvalidArgument("At least one trial per digit required", trials=trials)
    root = Path(root)
    paths = []
    for speaker in speakers:
        for digit in digits:
            for trial in range(trials):
                samples = synthesize_clip(digit, speaker, trial, seed=seed, sample_rate=sample_rate)
                path = root / f"{digit}_{speaker}_{trial}.wav"
                write_wav(path, samples, sample_rate)
                paths.append(path)
    logger.info("Synthetic corpus written", root=str(root), files=len(paths))
    return paths
