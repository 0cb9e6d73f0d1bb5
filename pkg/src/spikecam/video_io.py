"""Frame ingestion and output: binary netpbm (P5/P6) and raw grayscale.

Directories load in lexicographic filename order; that ordering is the
caller's contract for temporal order. Color P6 input collapses to luma.
Output is always binary PGM, maxval 255 (one byte per sample) or 65535
(two bytes, big-endian) for decoded frames brighter than 8 bits.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import GrayFrame
from .encoder import luma_convert

__all__ = ["FrameSource", "NetpbmError", "load_frames", "save_frame"]

_IMAGE_SUFFIXES = {".pgm", ".ppm"}


class NetpbmError(ValueError):
    """Malformed or unsupported netpbm file."""


@dataclass(frozen=True)
class FrameSource:
    """Ordered frame locators.

    Either a tuple of netpbm files, or a single raw 8-bit grayscale file
    with declared geometry (``width``/``height`` set, optional frame
    ``count`` inferred from the file size when omitted).
    """

    paths: tuple[Path, ...]
    width: int | None = None
    height: int | None = None
    count: int | None = None

    @property
    def is_raw(self) -> bool:
        return self.width is not None

    @classmethod
    def from_dir(cls, directory: str | Path) -> "FrameSource":
        directory = Path(directory)
        if not directory.is_dir():
            raise FileNotFoundError(f"{directory}: not a directory")
        paths = sorted(
            (p for p in directory.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES),
            key=lambda p: p.name,
        )
        if not paths:
            raise FileNotFoundError(f"{directory}: no .pgm or .ppm files")
        return cls(tuple(paths))

    @classmethod
    def from_files(cls, paths) -> "FrameSource":
        paths = tuple(Path(p) for p in paths)
        if not paths:
            raise ValueError("no frame files given")
        return cls(paths)

    @classmethod
    def from_raw(
        cls, path: str | Path, width: int, height: int, count: int | None = None
    ) -> "FrameSource":
        if width < 1 or height < 1:
            raise ValueError("raw geometry must be positive")
        if count is not None and count < 1:
            raise ValueError("raw frame count must be >= 1")
        return cls((Path(path),), width=width, height=height, count=count)


def load_frames(source: FrameSource) -> list[GrayFrame]:
    """Decode every frame in ``source``, verifying the shared geometry."""
    if source.is_raw:
        return _load_raw(source)

    frames = []
    for path in source.paths:
        frame = _read_netpbm(path)
        if frames and frame.values.shape != frames[0].values.shape:
            raise NetpbmError(
                f"{path}: frame is {frame.width}x{frame.height}, earlier "
                f"frames are {frames[0].width}x{frames[0].height}"
            )
        frames.append(frame)
    return frames


def _load_raw(source: FrameSource) -> list[GrayFrame]:
    path = source.paths[0]
    frame_bytes = source.width * source.height
    size = path.stat().st_size
    count = source.count
    if count is None:
        if size == 0 or size % frame_bytes:
            raise ValueError(
                f"{path}: {size} bytes is not a whole number of "
                f"{source.width}x{source.height} frames"
            )
        count = size // frame_bytes
    elif size < count * frame_bytes:
        raise ValueError(
            f"{path}: {size} bytes cannot hold {count} frames of "
            f"{frame_bytes} bytes"
        )
    data = np.fromfile(path, dtype=np.uint8, count=count * frame_bytes)
    planes = data.reshape(count, source.height, source.width)
    return [GrayFrame(plane, bit_depth=255) for plane in planes]


def _read_netpbm(path: Path) -> GrayFrame:
    data = path.read_bytes()
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise NetpbmError(f"{path}: not a binary PGM/PPM (magic {magic!r})")

    fields, pos = [], 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] not in (0x0A, 0x0D):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise NetpbmError(f"{path}: malformed header near byte {start}")
        fields.append(int(token))
    pos += 1  # single whitespace byte separates the header from the raster

    width, height, maxval = fields
    if width < 1 or height < 1:
        raise NetpbmError(f"{path}: invalid dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise NetpbmError(f"{path}: maxval {maxval} out of range")

    channels = 3 if magic == b"P6" else 1
    if magic == b"P6" and maxval > 255:
        raise NetpbmError(f"{path}: 16-bit color input is not supported")
    sample_bytes = 1 if maxval <= 255 else 2
    needed = width * height * channels * sample_bytes
    raster = data[pos : pos + needed]
    if len(raster) < needed:
        raise NetpbmError(
            f"{path}: raster holds {len(raster)} bytes, expected {needed}"
        )

    dtype = np.uint8 if sample_bytes == 1 else np.dtype(">u2")
    samples = np.frombuffer(raster, dtype=dtype)
    if magic == b"P6":
        return luma_convert(samples.reshape(height, width, 3))
    values = samples.reshape(height, width)
    if sample_bytes == 2:
        values = values.astype(np.uint16)
    if values.size and int(values.max()) > maxval:
        raise NetpbmError(f"{path}: sample exceeds declared maxval {maxval}")
    return GrayFrame(values, bit_depth=maxval)


def save_frame(
    frame: GrayFrame, path: str | Path, *, depth: int | None = None
) -> None:
    """Write ``frame`` as binary PGM, atomically (temp file then rename).

    ``depth`` selects 8- or 16-bit samples; by default frames whose
    ``bit_depth`` fits 255 are written 8-bit, anything brighter 16-bit.
    """
    if depth is None:
        depth = 8 if frame.bit_depth <= 255 else 16
    if depth not in (8, 16):
        raise ValueError("depth must be 8 or 16")
    maxval = 255 if depth == 8 else 65535
    peak = int(frame.values.max())
    if peak > maxval:
        raise ValueError(f"value {peak} exceeds {depth}-bit output depth")

    header = f"P5\n{frame.width} {frame.height}\n{maxval}\n".encode("ascii")
    if depth == 8:
        raster = frame.values.astype(np.uint8).tobytes()
    else:
        raster = frame.values.astype(">u2").tobytes()

    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(header)
            handle.write(raster)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
