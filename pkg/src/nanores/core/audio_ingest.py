"""
Audio ingest for nanores.

Raw PCM WAV decoding with no signal pre-processing, dataset manifest building,
and standardization of each clip to a fixed-length voltage drive.
"""

import re
import struct
from pathlib import Path
from typing import Dict, Optional, Pattern, Union

import numpy as np
import structlog
from scipy.io import wavfile

from nanores.errors import (
    DuplicateEntry,
    EmptyClip,
    EmptyDataset,
    InvalidArgument,
    ParseError,
    UnsupportedFormat,
)
from nanores.models.audio import AudioClip, DatasetManifest, ManifestEntry, VoltageTrace

DEFAULT_NAMING = "{digit}_{speaker}_{trial}.wav"

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

_PLACEHOLDERS = {
    "digit": r"(?P<digit>\d)",
    "speaker": r"(?P<speaker>[^/\\]+?)",
    "trial": r"(?P<trial>\d+)",
}

logger = structlog.get_logger()


def read_wav(path: Union[str, Path]) -> AudioClip:
    """
    Decode a RIFF/WAVE PCM file into samples normalized to [-1, +1].

    16-bit data is divided by 32768, 8-bit offset-binary data is centred and
    divided by 128, and multi-channel frames are averaged to mono. Labels are
    filled in when the filename follows the default corpus naming.

    Raises:
        ParseError: malformed RIFF structure
        UnsupportedFormat: float, compressed or non 8/16-bit encodings
        EmptyClip: no sample frames
    """
    path = Path(path)
    data = path.read_bytes()

    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ParseError("Not a RIFF/WAVE container", path=str(path))

    fmt: Optional[tuple] = None
    payload: Optional[bytes] = None
    offset = 12
    while offset + 8 <= len(data):
        chunk_id, size = struct.unpack_from("<4sI", data, offset)
        body = data[offset + 8 : offset + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise ParseError("fmt chunk shorter than 16 bytes", path=str(path))
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == WAVE_FORMAT_EXTENSIBLE:
                if len(body) < 26:
                    raise ParseError("extensible fmt chunk is truncated", path=str(path))
                # the sub-format GUID starts with the real format tag
                (sub_format,) = struct.unpack_from("<H", body, 24)
                fmt = (sub_format,) + fmt[1:]
        elif chunk_id == b"data":
            if len(body) < size:
                raise ParseError(
                    "data chunk runs past the end of the file",
                    path=str(path),
                    declared=size,
                    available=len(body),
                )
            payload = body
        # chunks are word aligned
        offset += 8 + size + (size & 1)

    if fmt is None:
        raise ParseError("Missing fmt chunk", path=str(path))
    if payload is None:
        raise ParseError("Missing data chunk", path=str(path))

    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if audio_format == WAVE_FORMAT_IEEE_FLOAT:
        raise UnsupportedFormat("Floating-point WAV is not supported", path=str(path))
    if audio_format != WAVE_FORMAT_PCM:
        raise UnsupportedFormat(
            "Compressed WAV is not supported", path=str(path), format_tag=audio_format
        )
    if bits not in (8, 16):
        raise UnsupportedFormat(
            "Only 8- and 16-bit PCM is supported", path=str(path), bits=bits
        )
    if channels < 1:
        raise ParseError("fmt chunk declares zero channels", path=str(path))

    frame_bytes = channels * bits // 8
    n_frames = len(payload) // frame_bytes
    if n_frames == 0:
        raise EmptyClip("WAV file contains no samples", path=str(path))
    payload = payload[: n_frames * frame_bytes]

    if bits == 16:
        raw = np.frombuffer(payload, dtype="<i2").astype(np.float64) / 32768.0
    else:
        raw = (np.frombuffer(payload, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    samples = raw.reshape(n_frames, channels).mean(axis=1)

    labels = _parse_name(path.name, _compile_naming(DEFAULT_NAMING))
    return AudioClip(
        samples=samples,
        sample_rate=int(sample_rate),
        label=labels["digit"] if labels else None,
        speaker=labels["speaker"] if labels else None,
        trial=labels["trial"] if labels else None,
    )


def write_wav(path: Union[str, Path], samples: np.ndarray, sample_rate: int) -> None:
    """Write samples in [-1, +1] as 16-bit mono PCM."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scaled = np.round(np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0) * 32768.0)
    pcm = np.clip(scaled, -32768, 32767).astype("<i2")
    wavfile.write(str(path), int(sample_rate), pcm)


def load_clip(entry: ManifestEntry) -> AudioClip:
    """Read a manifest entry, labelling the clip from the manifest."""
    clip = read_wav(entry.path)
    clip.label = entry.digit
    clip.speaker = entry.speaker
    clip.trial = entry.trial
    return clip


def build_manifest(root: Union[str, Path], naming: str = DEFAULT_NAMING) -> DatasetManifest:
    """
    Index every file under ``root`` whose name matches ``naming``.

    Non-matching files are skipped. Entries are sorted by (speaker, digit, trial).

    Raises:
        EmptyDataset: nothing matched
        DuplicateEntry: two files share a (speaker, digit, trial) triple
    """
    root = Path(root)
    if not root.is_dir():
        raise InvalidArgument("Manifest root is not a directory", root=str(root))

    pattern = _compile_naming(naming)
    seen: Dict[tuple, ManifestEntry] = {}
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        labels = _parse_name(path.name, pattern)
        if labels is None:
            continue
        entry = ManifestEntry(
            path=path,
            speaker=labels["speaker"],
            digit=labels["digit"],
            trial=labels["trial"],
        )
        if entry.key in seen:
            raise DuplicateEntry(
                "Duplicate (speaker, digit, trial)",
                key=entry.key,
                first=str(seen[entry.key].path),
                second=str(path),
            )
        seen[entry.key] = entry

    if not seen:
        raise EmptyDataset("No files match the naming pattern", root=str(root), naming=naming)

    entries = [seen[key] for key in sorted(seen)]
    logger.info("Manifest built", root=str(root), entries=len(entries))
    return DatasetManifest(entries=entries, root=root)


def bin_edges(n: int, t: int) -> np.ndarray:
    """Start index of each of ``t`` contiguous bins over ``n`` samples, plus ``n``."""
    return (np.arange(t + 1, dtype=np.int64) * n) // t


def standardize_trace(
    clip: Union[AudioClip, VoltageTrace, np.ndarray],
    t: int = 1024,
    v_p: float = 1.0,
) -> VoltageTrace:
    """
    Reduce a clip to ``t`` bin means and peak-normalize to ``v_p`` volts.

    Bin i covers source indices [floor(i*n/t), floor((i+1)*n/t)). Clips shorter
    than ``t`` are zero-padded at the end first. Silent clips stay all-zero.
    """
    if t < 1:
        raise InvalidArgument("Timestep count must be at least 1", t=t)
    if v_p <= 0:
        raise InvalidArgument("Drive amplitude must be positive", v_p=v_p)

    clip_ref = None
    if isinstance(clip, AudioClip):
        samples = clip.samples
        clip_ref = clip.clip_ref
    elif isinstance(clip, VoltageTrace):
        samples = clip.values
        clip_ref = clip.clip_ref
    else:
        samples = np.asarray(clip, dtype=np.float64)
    if samples.size == 0:
        raise EmptyClip("Cannot standardize an empty clip")

    if samples.size < t:
        samples = np.concatenate([samples, np.zeros(t - samples.size)])

    edges = bin_edges(samples.size, t)
    if samples.size == t:
        values = samples.astype(np.float64, copy=True)
    else:
        values = np.add.reduceat(samples, edges[:-1]) / np.diff(edges)

    peak = float(np.max(np.abs(values)))
    if peak > 0.0 and peak != v_p:
        # (x / peak) * v_p maps the peak to exactly +/- v_p
        values = (values / peak) * v_p
    return VoltageTrace(values=values, v_p=float(v_p), clip_ref=clip_ref)


def _compile_naming(naming: str) -> Pattern:
    parts = re.split(r"(\{[a-z]+\})", naming)
    regex = []
    for part in parts:
        if part.startswith("{") and part.endswith("}"):
            name = part[1:-1]
            if name not in _PLACEHOLDERS:
                raise InvalidArgument("Unknown naming placeholder", placeholder=part)
            regex.append(_PLACEHOLDERS[name])
        else:
            regex.append(re.escape(part))
    compiled = re.compile("^" + "".join(regex) + "$")
    missing = set(_PLACEHOLDERS) - set(compiled.groupindex)
    if missing:
        raise InvalidArgument("Naming pattern lacks placeholders", missing=sorted(missing))
    return compiled


def _parse_name(name: str, pattern: Pattern) -> Optional[dict]:
    match = pattern.match(name)
    if match is None:
        return None
    return {
        "digit": int(match.group("digit")),
        "speaker": match.group("speaker"),
        "trial": int(match.group("trial")),
    }
