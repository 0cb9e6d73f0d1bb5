"""Bit-exact spike stream container plus lossless compression backends.

File layout, little-endian:

====== ===== =========================================
offset bytes field
====== ===== =========================================
0      4     magic ``SPK1``
4      2     version, u16 (currently 1)
6      2     flags, u16 (bit 0: payload is pixel-major)
8      4     width, u32
12     4     height, u32
16     4     omega, u32
20     8     moment_count, u64
====== ===== =========================================

The payload follows immediately. Moment-major (the default) stores
``moment_count`` planes of ``ceil(width * height / 8)`` bytes each,
row-major pixels, LSB-first bits; this matches the camera's per-moment bus
dispatch and keeps streaming decode at O(plane) memory. Pixel-major (flag
bit 0) stores one ``ceil(moment_count / 8)``-byte record per pixel in
row-major order, each packing that pixel's spike bits over time LSB-first;
single-pixel spike trains are periodic, so this ordering compresses much
better.

Compression backends operate on whole byte buffers, sequentially, so output
bytes are reproducible. ``lz77`` is DEFLATE (an LZ77-family coder) and
``lzma`` is LZMA in an xz container, both from the standard library.
"""

from __future__ import annotations

import io
import lzma
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Callable

import numpy as np

from .core import SpikeStream, StreamHeader

__all__ = [
    "BACKENDS",
    "BadMagicError",
    "CompressionReport",
    "CorruptInputError",
    "HEADER_SIZE",
    "SpkFormatError",
    "TruncatedStreamError",
    "VersionMismatchError",
    "compress_stream",
    "decompress_stream",
    "read_spk",
    "write_spk",
]

MAGIC = b"SPK1"
VERSION = 1
FLAG_PIXEL_MAJOR = 0x0001

_HEADER = struct.Struct("<4sHHIIIQ")
HEADER_SIZE = _HEADER.size  # 28


class SpkFormatError(ValueError):
    """Malformed spike stream container."""


class BadMagicError(SpkFormatError):
    pass


class VersionMismatchError(SpkFormatError):
    pass


class TruncatedStreamError(SpkFormatError):
    pass


class CorruptInputError(ValueError):
    """Compressed input the backend cannot decode."""


def write_spk(
    stream: SpikeStream,
    sink: BinaryIO | str | Path,
    *,
    pixel_major: bool = False,
) -> int:
    """Serialize ``stream``; returns the byte count written.

    ``pixel_major=True`` sets flag bit 0 and transposes the payload so each
    pixel's spike train is contiguous (better compression, see module
    docstring). Readers accept either ordering.
    """
    if isinstance(sink, (str, Path)):
        with open(sink, "wb") as handle:
            return write_spk(stream, handle, pixel_major=pixel_major)

    header = stream.header
    for name, value, limit in (
        ("width", header.width, 1 << 32),
        ("height", header.height, 1 << 32),
        ("omega", header.omega, 1 << 32),
        ("moment_count", header.moment_count, 1 << 64),
    ):
        if value >= limit:
            raise SpkFormatError(f"{name} {value} does not fit the container")

    flags = FLAG_PIXEL_MAJOR if pixel_major else 0
    sink.write(
        _HEADER.pack(
            MAGIC,
            VERSION,
            flags,
            header.width,
            header.height,
            header.omega,
            header.moment_count,
        )
    )
    payload = (
        _pixel_major_payload(stream) if pixel_major else stream.packed.tobytes()
    )
    sink.write(payload)
    return HEADER_SIZE + len(payload)


def read_spk(source: BinaryIO | str | Path | bytes) -> SpikeStream:
    """Parse a spike stream container.

    Raises ``BadMagicError``, ``VersionMismatchError`` or
    ``TruncatedStreamError`` for the corresponding defects; any other
    malformation raises ``SpkFormatError``. Trailing bytes past the payload
    are left unread.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as handle:
            return read_spk(handle)
    if isinstance(source, (bytes, bytearray)):
        return read_spk(io.BytesIO(source))

    raw = source.read(HEADER_SIZE)
    if len(raw) < HEADER_SIZE:
        raise TruncatedStreamError(
            f"header is {len(raw)} bytes, expected {HEADER_SIZE}"
        )
    magic, version, flags, width, height, omega, moments = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionMismatchError(f"unsupported version {version}")
    if flags & ~FLAG_PIXEL_MAJOR:
        raise SpkFormatError(f"unsupported flags 0x{flags:04x}")
    try:
        header = StreamHeader(width, height, omega, moments)
    except ValueError as exc:
        raise SpkFormatError(str(exc)) from exc

    pixel_major = bool(flags & FLAG_PIXEL_MAJOR)
    if pixel_major:
        expected = header.pixel_count * ((moments + 7) // 8)
    else:
        expected = moments * header.plane_nbytes
    payload = source.read(expected)
    if len(payload) < expected:
        raise TruncatedStreamError(
            f"payload is {len(payload)} bytes, expected {expected}"
        )

    if pixel_major:
        packed = _planes_from_pixel_major(payload, header)
    else:
        packed = np.frombuffer(payload, dtype=np.uint8).reshape(
            moments, header.plane_nbytes
        )
    return SpikeStream(header, packed.copy())


def _pixel_major_payload(stream: SpikeStream) -> bytes:
    header = stream.header
    if header.moment_count == 0:
        return b""
    bits = np.unpackbits(
        stream.packed, axis=1, count=header.pixel_count, bitorder="little"
    )
    return np.packbits(bits.T, axis=1, bitorder="little").tobytes()


def _planes_from_pixel_major(payload: bytes, header: StreamHeader) -> np.ndarray:
    moments = header.moment_count
    if moments == 0:
        return np.zeros((0, header.plane_nbytes), dtype=np.uint8)
    per_pixel = (moments + 7) // 8
    records = np.frombuffer(payload, dtype=np.uint8).reshape(
        header.pixel_count, per_pixel
    )
    bits = np.unpackbits(records, axis=1, count=moments, bitorder="little")
    return np.packbits(bits.T, axis=1, bitorder="little")


@dataclass(frozen=True)
class CompressionReport:
    raw_bytes: int
    compressed_bytes: int
    ratio: float
    backend: str


def _inflate(data: bytes) -> bytes:
    try:
        return zlib.decompress(data)
    except zlib.error as exc:
        raise CorruptInputError(f"lz77 payload is corrupt: {exc}") from exc


def _unxz(data: bytes) -> bytes:
    try:
        return lzma.decompress(data)
    except lzma.LZMAError as exc:
        raise CorruptInputError(f"lzma payload is corrupt: {exc}") from exc


BACKENDS: dict[str, tuple[Callable[[bytes], bytes], Callable[[bytes], bytes]]] = {
    "lz77": (lambda data: zlib.compress(data, 9), _inflate),
    "lzma": (lambda data: lzma.compress(data, preset=6), _unxz),
}


def _backend(name: str) -> tuple[Callable[[bytes], bytes], Callable[[bytes], bytes]]:
    try:
        return BACKENDS[name]
    except KeyError:
        known = ", ".join(sorted(BACKENDS))
        raise ValueError(f"unknown backend {name!r} (available: {known})") from None


def compress_stream(data: bytes, backend: str) -> tuple[bytes, CompressionReport]:
    """Losslessly compress ``data``; returns the payload and a size report."""
    if not data:
        raise ValueError("refusing to compress empty input")
    compress, _ = _backend(backend)
    compressed = compress(bytes(data))
    report = CompressionReport(
        raw_bytes=len(data),
        compressed_bytes=len(compressed),
        ratio=len(data) / len(compressed),
        backend=backend,
    )
    return compressed, report


def decompress_stream(data: bytes, backend: str) -> bytes:
    """Exact inverse of ``compress_stream`` for the same backend."""
    _, decompress = _backend(backend)
    return decompress(bytes(data))
