import numpy as np
import pytest

from spikecam import FrameSource, GrayFrame, NetpbmError, load_frames, save_frame

from conftest import gray


def write_pgm(path, values, maxval=255):
    values = np.asarray(values)
    height, width = values.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode()
    dtype = np.uint8 if maxval <= 255 else np.dtype(">u2")
    path.write_bytes(header + values.astype(dtype).tobytes())


class TestSaveLoadRoundTrip:
    def test_eight_bit(self, tmp_path, rng):
        frame = gray(rng.integers(0, 256, size=(7, 5)))
        target = tmp_path / "frame.pgm"
        save_frame(frame, target)
        (loaded,) = load_frames(FrameSource.from_files([target]))
        assert loaded == frame

    def test_sixteen_bit(self, tmp_path):
        frame = GrayFrame(np.array([[0, 300], [511, 65535]], dtype=np.int64), bit_depth=65535)
        target = tmp_path / "deep.pgm"
        save_frame(frame, target)
        blob = target.read_bytes()
        assert blob.startswith(b"P5\n2 2\n65535\n")
        # big-endian two-byte samples
        assert blob[-8:] == bytes([0, 0, 1, 44, 1, 255, 255, 255])
        (loaded,) = load_frames(FrameSource.from_files([target]))
        assert np.array_equal(loaded.values, frame.values)
        assert loaded.bit_depth == 65535

    def test_dynamic_range_value_forces_16_bit(self, tmp_path):
        frame = GrayFrame(np.full((2, 2), 300, dtype=np.int64), bit_depth=511)
        target = tmp_path / "wide.pgm"
        save_frame(frame, target)
        assert b"65535" in target.read_bytes()[:16]

    def test_all_zero_frame_bytes(self, tmp_path):
        target = tmp_path / "zero.pgm"
        save_frame(gray(np.zeros((4, 4), dtype=np.int64)), target)
        assert target.read_bytes() == b"P5\n4 4\n255\n" + bytes(16)

    def test_depth_8_rejects_bright_values(self, tmp_path):
        frame = GrayFrame(np.full((2, 2), 300, dtype=np.int64), bit_depth=511)
        with pytest.raises(ValueError, match="exceeds"):
            save_frame(frame, tmp_path / "x.pgm", depth=8)
        assert not (tmp_path / "x.pgm").exists()

    def test_invalid_depth(self, tmp_path):
        with pytest.raises(ValueError):
            save_frame(gray([[1]]), tmp_path / "x.pgm", depth=12)

    def test_no_partial_file_on_failure(self, tmp_path):
        target = tmp_path / "missing" / "frame.pgm"
        with pytest.raises(OSError):
            save_frame(gray([[1]]), target)
        assert not target.exists()


class TestDirectoryLoading:
    def test_lexicographic_order(self, tmp_path, rng):
        values = [rng.integers(0, 256, size=(2, 2)) for _ in range(4)]
        for name, plane in zip(["c.pgm", "a.pgm", "d.pgm", "b.pgm"], values):
            write_pgm(tmp_path / name, plane)
        frames = load_frames(FrameSource.from_dir(tmp_path))
        by_name = dict(zip(["c", "a", "d", "b"], values))
        for frame, key in zip(frames, ["a", "b", "c", "d"]):
            assert np.array_equal(frame.values, by_name[key])

    def test_ignores_other_suffixes(self, tmp_path):
        write_pgm(tmp_path / "a.pgm", np.zeros((2, 2), dtype=np.uint8))
        (tmp_path / "notes.txt").write_text("not a frame")
        assert len(load_frames(FrameSource.from_dir(tmp_path))) == 1

    def test_empty_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            FrameSource.from_dir(tmp_path)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            FrameSource.from_dir(tmp_path / "nope")

    def test_dimension_mismatch_names_offender(self, tmp_path):
        write_pgm(tmp_path / "a.pgm", np.zeros((2, 2), dtype=np.uint8))
        write_pgm(tmp_path / "b.pgm", np.zeros((3, 2), dtype=np.uint8))
        with pytest.raises(NetpbmError, match="b.pgm"):
            load_frames(FrameSource.from_dir(tmp_path))


class TestNetpbmParsing:
    def test_comments_and_whitespace(self, tmp_path):
        target = tmp_path / "c.pgm"
        target.write_bytes(b"P5 # comment\n# another\n 2 \t2\n255\n" + bytes([1, 2, 3, 4]))
        (frame,) = load_frames(FrameSource.from_files([target]))
        assert frame.values.tolist() == [[1, 2], [3, 4]]

    def test_sixteen_bit_is_big_endian(self, tmp_path):
        target = tmp_path / "deep.pgm"
        write_pgm(target, np.array([[260]]), maxval=300)
        (frame,) = load_frames(FrameSource.from_files([target]))
        assert frame.values[0, 0] == 260
        assert frame.bit_depth == 300

    def test_color_input_collapses_to_luma(self, tmp_path):
        target = tmp_path / "c.ppm"
        target.write_bytes(b"P6\n1 1\n255\n" + bytes([255, 0, 0]))
        (frame,) = load_frames(FrameSource.from_files([target]))
        assert frame.values[0, 0] == 76

    @pytest.mark.parametrize(
        "blob",
        [
            b"P2\n1 1\n255\n0",  # ascii variant unsupported
            b"P5\n0 1\n255\n",
            b"P5\n1 1\n0\n\x00",
            b"P5\n1 1\n70000\n\x00\x00",
            b"P5\nx 1\n255\n\x00",
            b"P5\n2 2\n255\n\x00\x00\x00",  # raster one byte short
            b"P6\n1 1\n300\n" + bytes(6),  # 16-bit color unsupported
        ],
    )
    def test_rejects_malformed_files(self, tmp_path, blob):
        target = tmp_path / "bad.pgm"
        target.write_bytes(blob)
        with pytest.raises(NetpbmError, match="bad.pgm"):
            load_frames(FrameSource.from_files([target]))

    def test_sample_above_maxval_is_rejected(self, tmp_path):
        target = tmp_path / "hot.pgm"
        target.write_bytes(b"P5\n1 1\n100\n" + bytes([200]))
        with pytest.raises(NetpbmError, match="maxval"):
            load_frames(FrameSource.from_files([target]))


class TestRawLoading:
    def test_count_inferred_from_size(self, tmp_path, rng):
        data = rng.integers(0, 256, size=3 * 4 * 5, dtype=np.uint8)
        target = tmp_path / "frames.raw"
        target.write_bytes(data.tobytes())
        frames = load_frames(FrameSource.from_raw(target, width=4, height=5))
        assert len(frames) == 3
        assert np.array_equal(frames[1].values, data.reshape(3, 5, 4)[1])

    def test_explicit_count_takes_prefix(self, tmp_path):
        target = tmp_path / "frames.raw"
        target.write_bytes(bytes(range(12)))
        frames = load_frames(FrameSource.from_raw(target, width=2, height=2, count=2))
        assert len(frames) == 2
        assert frames[1].values.tolist() == [[4, 5], [6, 7]]

    def test_ragged_size_is_rejected(self, tmp_path):
        target = tmp_path / "frames.raw"
        target.write_bytes(bytes(10))
        with pytest.raises(ValueError, match="whole number"):
            load_frames(FrameSource.from_raw(target, width=4, height=4))

    def test_count_exceeding_file_is_rejected(self, tmp_path):
        target = tmp_path / "frames.raw"
        target.write_bytes(bytes(16))
        with pytest.raises(ValueError, match="cannot hold"):
            load_frames(FrameSource.from_raw(target, width=4, height=4, count=2))

    def test_source_validation(self, tmp_path):
        with pytest.raises(ValueError):
            FrameSource.from_raw(tmp_path / "x", width=0, height=4)
        with pytest.raises(ValueError):
            FrameSource.from_raw(tmp_path / "x", width=4, height=4, count=0)
        with pytest.raises(ValueError):
            FrameSource.from_files([])
