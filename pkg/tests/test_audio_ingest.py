import struct

import numpy as np
import pytest

from nanores.core.audio_ingest import (
    bin_edges,
    build_manifest,
    read_wav,
    standardize_trace,
    write_wav,
)
from nanores.errors import (
    DuplicateEntry,
    EmptyClip,
    EmptyDataset,
    InvalidArgument,
    ParseError,
    UnsupportedFormat,
)
from nanores.models.audio import AudioClip, DatasetManifest

from .conftest import wav_bytes


def _pcm16(*values: int) -> bytes:
    return struct.pack(f"<{len(values)}h", *values)


@pytest.mark.unit
class TestReadWav:
    def test_16bit_scaling(self, tmp_path):
        path = tmp_path / "clip.wav"
        path.write_bytes(wav_bytes(_pcm16(0, 16384, -32768, 32767)))
        clip = read_wav(path)
        np.testing.assert_array_equal(clip.samples, [0.0, 0.5, -1.0, 32767 / 32768])
        assert clip.sample_rate == 8000

    def test_8bit_offset_binary(self, tmp_path):
        path = tmp_path / "clip.wav"
        path.write_bytes(wav_bytes(bytes([128, 0, 255]), bits=8))
        np.testing.assert_array_equal(read_wav(path).samples, [0.0, -1.0, 127 / 128])

    def test_stereo_frames_are_averaged(self, tmp_path):
        path = tmp_path / "clip.wav"
        path.write_bytes(wav_bytes(_pcm16(16384, -16384, 16384, 0), channels=2))
        np.testing.assert_array_equal(read_wav(path).samples, [0.0, 0.25])

    def test_odd_sized_chunks_are_skipped(self, tmp_path):
        extra = b"LIST" + struct.pack("<I", 3) + b"abc" + b"\x00"
        path = tmp_path / "clip.wav"
        path.write_bytes(wav_bytes(_pcm16(8192), extra_chunks=extra))
        np.testing.assert_array_equal(read_wav(path).samples, [0.25])

    def test_labels_from_corpus_name(self, tmp_path):
        path = tmp_path / "7_jackson_12.wav"
        path.write_bytes(wav_bytes(_pcm16(1, 2)))
        clip = read_wav(path)
        assert clip.clip_ref == ("jackson", 7, 12)

    def test_unlabelled_name(self, tmp_path):
        path = tmp_path / "noise.wav"
        path.write_bytes(wav_bytes(_pcm16(1, 2)))
        assert read_wav(path).clip_ref is None

    @pytest.mark.parametrize(
        "kwargs",
        [{"format_tag": 3, "bits": 32}, {"format_tag": 2}, {"bits": 24}],
        ids=["float", "compressed", "24bit"],
    )
    def test_unsupported_encodings(self, tmp_path, kwargs):
        path = tmp_path / "clip.wav"
        path.write_bytes(wav_bytes(b"\x00" * 12, **kwargs))
        with pytest.raises(UnsupportedFormat):
            read_wav(path)

    def test_not_riff(self, tmp_path):
        path = tmp_path / "clip.wav"
        path.write_bytes(b"ID3\x00" + b"\x00" * 40)
        with pytest.raises(ParseError):
            read_wav(path)

    def test_missing_data_chunk(self, tmp_path):
        data = wav_bytes(b"")
        truncated = data[: data.index(b"data")]
        path = tmp_path / "clip.wav"
        path.write_bytes(truncated)
        with pytest.raises(ParseError):
            read_wav(path)

    def test_data_chunk_past_end_of_file(self, tmp_path):
        path = tmp_path / "clip.wav"
        path.write_bytes(wav_bytes(_pcm16(100, -100, 200, -200))[:-4])
        with pytest.raises(ParseError) as info:
            read_wav(path)
        assert info.value.context["declared"] == 8
        assert info.value.context["available"] == 4

    def test_empty_data_chunk(self, tmp_path):
        path = tmp_path / "clip.wav"
        path.write_bytes(wav_bytes(b""))
        with pytest.raises(EmptyClip):
            read_wav(path)

    def test_written_wav_reads_back_within_one_lsb(self, tmp_path):
        samples = np.linspace(-1.0, 1.0, 101)
        write_wav(tmp_path / "out.wav", samples, 8000)
        decoded = read_wav(tmp_path / "out.wav").samples
        assert np.max(np.abs(decoded - samples)) <= 1.0 / 32768


@pytest.mark.unit
class TestManifest:
    def _touch(self, path):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(wav_bytes(_pcm16(1)))

    def test_sorted_and_filtered(self, tmp_path):
        for name in ("3_lucas_1.wav", "1_jackson_10.wav", "1_jackson_2.wav", "readme.txt"):
            self._touch(tmp_path / name)
        manifest = build_manifest(tmp_path)
        assert [e.key for e in manifest] == [
            ("jackson", 1, 2),
            ("jackson", 1, 10),
            ("lucas", 3, 1),
        ]
        assert manifest.speakers == ["jackson", "lucas"]

    def test_duplicate_triples(self, tmp_path):
        self._touch(tmp_path / "a" / "1_jackson_0.wav")
        self._touch(tmp_path / "b" / "1_jackson_0.wav")
        with pytest.raises(DuplicateEntry):
            build_manifest(tmp_path)

    def test_nothing_matches(self, tmp_path):
        self._touch(tmp_path / "song.wav")
        with pytest.raises(EmptyDataset):
            build_manifest(tmp_path)

    def test_custom_naming(self, tmp_path):
        self._touch(tmp_path / "jackson-d4-t7.wav")
        manifest = build_manifest(tmp_path, naming="{speaker}-d{digit}-t{trial}.wav")
        assert manifest.entries[0].key == ("jackson", 4, 7)

    def test_naming_needs_every_placeholder(self, tmp_path):
        with pytest.raises(InvalidArgument):
            build_manifest(tmp_path, naming="{digit}_{speaker}.wav")

    def test_saved_manifest_loads_identically(self, tmp_path):
        self._touch(tmp_path / "corpus" / "2_george_0.wav")
        manifest = build_manifest(tmp_path / "corpus")
        manifest.save(tmp_path / "manifest.json")
        loaded = DatasetManifest.load(tmp_path / "manifest.json")
        assert loaded.entries == manifest.entries

    def test_select(self, manifest):
        part = manifest.select(speakers=["lucas"], digits=[1, 2])
        assert {e.speaker for e in part} == {"lucas"}
        assert {e.digit for e in part} == {1, 2}


@pytest.mark.unit
class TestStandardizeTrace:
    def test_bin_edges(self):
        np.testing.assert_array_equal(bin_edges(10, 4), [0, 2, 5, 7, 10])

    def test_bin_means_and_peak(self):
        samples = np.arange(10, dtype=float)
        trace = standardize_trace(samples, t=4, v_p=2.0)
        means = np.array([0.5, 3.0, 5.5, 8.0])
        np.testing.assert_allclose(trace.values, means / 8.0 * 2.0, rtol=1e-15)
        assert np.max(np.abs(trace.values)) == 2.0

    def test_negative_peak_maps_to_minus_v_p(self):
        trace = standardize_trace(np.array([0.1, -0.4, 0.2, 0.0]), t=4, v_p=1.5)
        assert trace.values.min() == -1.5

    def test_short_clip_is_zero_padded(self):
        trace = standardize_trace(np.array([0.5, -0.25]), t=4, v_p=1.0)
        np.testing.assert_array_equal(trace.values, [1.0, -0.5, 0.0, 0.0])

    def test_second_pass_changes_nothing(self):
        samples = np.random.default_rng(5).normal(0.0, 0.2, size=5000)
        once = standardize_trace(samples, t=1024, v_p=2.5)
        twice = standardize_trace(once, t=1024, v_p=2.5)
        np.testing.assert_array_equal(twice.values, once.values)

    def test_silent_clip_stays_zero(self):
        trace = standardize_trace(np.zeros(100), t=16)
        assert len(trace) == 16
        assert not trace.values.any()

    def test_clip_ref_is_carried(self):
        clip = AudioClip(samples=np.ones(32), sample_rate=8000, label=3, speaker="lucas", trial=2)
        assert standardize_trace(clip, t=8).clip_ref == ("lucas", 3, 2)

    def test_empty_clip(self):
        with pytest.raises(EmptyClip):
            standardize_trace(np.array([]), t=8)

    def test_bad_arguments(self):
        with pytest.raises(InvalidArgument):
            standardize_trace(np.ones(8), t=0)
        with pytest.raises(InvalidArgument):
            standardize_trace(np.ones(8), t=4, v_p=0.0)
