import hashlib
import io
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spikecam import (
    BadMagicError,
    CorruptInputError,
    EncoderConfig,
    SpikeStream,
    SpkFormatError,
    TruncatedStreamError,
    VersionMismatchError,
    compress_stream,
    decompress_stream,
    encode_sequence,
    read_spk,
    write_spk,
)
from spikecam.codec import HEADER_SIZE

from conftest import constant_stream, gray

DATA_DIR = Path(__file__).parent / "data"

GOLDEN_SHA256 = "305d41063d5a7948088047e9d47564a203f461f8a516619072aed580e908f160"


def golden_stream():
    """The checked-in fixture's recipe; must never change."""
    frames = [
        gray([[(3 * x + 5 * y + 11 * f) % 37 for x in range(6)] for y in range(5)])
        for f in range(7)
    ]
    stream, _ = encode_sequence(frames, EncoderConfig(omega=19))
    return stream


def round_trip(stream, **kwargs):
    buffer = io.BytesIO()
    write_spk(stream, buffer, **kwargs)
    return buffer.getvalue()


class TestContainer:
    def test_header_only_stream_is_28_bytes(self):
        stream = SpikeStream.from_bool(np.zeros((0, 4, 4), dtype=bool), omega=8)
        payload = round_trip(stream)
        assert len(payload) == 28
        assert read_spk(payload) == stream

    def test_one_byte_planes(self):
        stream = SpikeStream.from_bool(np.zeros((8, 1, 1), dtype=bool), omega=8)
        assert len(round_trip(stream)) == 28 + 8

    def test_nine_pixel_plane_pads_to_two_bytes(self):
        stream = SpikeStream.from_bool(np.zeros((1, 1, 9), dtype=bool), omega=8)
        assert len(round_trip(stream)) == 28 + 2

    def test_layout_is_fixed(self):
        stream = constant_stream(64, width=8, height=8, moments=10)
        payload = round_trip(stream)
        assert payload[:4] == b"SPK1"
        assert payload[4:6] == (1).to_bytes(2, "little")
        assert payload[6:8] == b"\x00\x00"
        assert int.from_bytes(payload[8:12], "little") == 8
        assert int.from_bytes(payload[12:16], "little") == 8
        assert int.from_bytes(payload[16:20], "little") == 256
        assert int.from_bytes(payload[20:28], "little") == 10

    def test_accepts_path_round_trip(self, tmp_path, rng):
        bits = rng.random((5, 3, 7)) < 0.5
        stream = SpikeStream.from_bool(bits, omega=100)
        target = tmp_path / "stream.spk"
        written = write_spk(stream, target)
        assert target.stat().st_size == written
        assert read_spk(target) == stream

    def test_trailing_bytes_stay_unread(self, rng):
        bits = rng.random((3, 2, 2)) < 0.5
        stream = SpikeStream.from_bool(bits, omega=9)
        handle = io.BytesIO(round_trip(stream) + b"extra")
        assert read_spk(handle) == stream
        assert handle.read() == b"extra"

    def test_pixel_major_sets_flag_and_round_trips(self, rng):
        bits = rng.random((19, 4, 5)) < 0.5
        stream = SpikeStream.from_bool(bits, omega=50)
        payload = round_trip(stream, pixel_major=True)
        assert payload[6] == 1
        # 20 pixels, ceil(19 / 8) = 3 bytes of spike history each
        assert len(payload) == 28 + 20 * 3
        assert read_spk(payload) == stream

    def test_bad_magic(self):
        with pytest.raises(BadMagicError):
            read_spk(b"XXXX" + bytes(24))

    def test_version_mismatch(self):
        payload = bytearray(round_trip(constant_stream(1, moments=1)))
        payload[4] = 2
        with pytest.raises(VersionMismatchError):
            read_spk(bytes(payload))

    def test_unknown_flags(self):
        payload = bytearray(round_trip(constant_stream(1, moments=1)))
        payload[7] = 0x80
        with pytest.raises(SpkFormatError):
            read_spk(bytes(payload))

    def test_short_header(self):
        with pytest.raises(TruncatedStreamError):
            read_spk(b"SPK1\x01\x00")

    def test_truncated_payload(self):
        payload = round_trip(constant_stream(64, width=8, height=8, moments=10))
        with pytest.raises(TruncatedStreamError):
            read_spk(payload[:-1])

    def test_nonsense_geometry_is_rejected(self):
        header = b"SPK1" + (1).to_bytes(2, "little") + bytes(2)
        header += (0).to_bytes(4, "little") * 2  # zero width and height
        header += (256).to_bytes(4, "little") + (0).to_bytes(8, "little")
        with pytest.raises(SpkFormatError):
            read_spk(header)

    @settings(max_examples=200, deadline=None)
    @given(
        width=st.integers(1, 12),
        height=st.integers(1, 12),
        moments=st.integers(0, 40),
        omega=st.integers(1, 1000),
        pixel_major=st.booleans(),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_round_trip_property(self, width, height, moments, omega, pixel_major, seed):
        bits = np.random.default_rng(seed).random((moments, height, width)) < 0.3
        stream = SpikeStream.from_bool(bits, omega=omega)
        assert read_spk(round_trip(stream, pixel_major=pixel_major)) == stream


class TestGoldenFixture:
    def test_bytes_never_change(self):
        blob = (DATA_DIR / "golden.spk").read_bytes()
        assert hashlib.sha256(blob).hexdigest() == GOLDEN_SHA256
        assert blob == round_trip(golden_stream())

    def test_decodes_to_recipe(self):
        stream = read_spk(DATA_DIR / "golden.spk")
        assert stream == golden_stream()
        header = stream.header
        assert (header.width, header.height) == (6, 5)
        assert (header.omega, header.moment_count) == (19, 7)


class TestCompression:
    def test_all_zero_megabyte_compresses_hard(self):
        data = bytes(1 << 20)
        for backend in ("lz77", "lzma"):
            _, report = compress_stream(data, backend)
            assert report.ratio >= 50

    def test_periodic_stream_ratios(self):
        stream = constant_stream(100, width=16, height=16, moments=2048)
        data = round_trip(stream, pixel_major=True)
        lz77_blob, lz77_report = compress_stream(data, "lz77")
        lzma_blob, lzma_report = compress_stream(data, "lzma")
        assert lz77_report.ratio >= 8
        assert lzma_report.ratio >= 8
        assert decompress_stream(lz77_blob, "lz77") == data
        assert decompress_stream(lzma_blob, "lzma") == data

    def test_random_bytes_barely_compress(self, rng):
        data = rng.integers(0, 256, size=1 << 16, dtype=np.uint8).tobytes()
        for backend in ("lz77", "lzma"):
            _, report = compress_stream(data, backend)
            assert report.ratio <= 1.1

    def test_header_only_stream_round_trips(self):
        stream = SpikeStream.from_bool(np.zeros((0, 4, 4), dtype=bool), omega=8)
        data = round_trip(stream)
        blob, report = compress_stream(data, "lz77")
        assert decompress_stream(blob, "lz77") == data
        assert report.raw_bytes == 28

    def test_report_is_consistent(self):
        data = b"abc" * 1000
        blob, report = compress_stream(data, "lzma")
        assert report.raw_bytes == len(data)
        assert report.compressed_bytes == len(blob)
        assert report.ratio == pytest.approx(len(data) / len(blob))
        assert report.backend == "lzma"

    def test_empty_input_is_refused(self):
        with pytest.raises(ValueError):
            compress_stream(b"", "lz77")

    def test_unknown_backend(self):
        with pytest.raises(ValueError, match="backend"):
            compress_stream(b"x", "zstd")
        with pytest.raises(ValueError, match="backend"):
            decompress_stream(b"x", "zstd")

    @pytest.mark.parametrize("backend", ["lz77", "lzma"])
    def test_corrupt_input(self, backend):
        blob, _ = compress_stream(b"some spikes" * 64, backend)
        with pytest.raises(CorruptInputError):
            decompress_stream(blob[: len(blob) // 2], backend)
        with pytest.raises(CorruptInputError):
            decompress_stream(b"\x00\x01\x02\x03", backend)

    @settings(max_examples=200, deadline=None)
    @given(
        data=st.binary(min_size=1, max_size=4096),
        backend=st.sampled_from(["lz77", "lzma"]),
    )
    def test_lossless_property(self, data, backend):
        blob, report = compress_stream(data, backend)
        assert decompress_stream(blob, backend) == data
        assert report.raw_bytes == len(data)
        assert report.compressed_bytes == len(blob)


def test_header_size_constant():
    assert HEADER_SIZE == 28
