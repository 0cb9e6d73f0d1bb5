"""Core domain types for spike streams.

A sensor pixel integrates incoming intensity moment by moment; once the
running total reaches the dispatch threshold ``omega`` the pixel emits a
one-bit spike for that moment and the threshold is subtracted (a modulo).
Moments are 1-indexed: the stream starts at time 0 and plane ``t`` holds the
spikes dispatched at the end of moment ``t``. Bit planes pack pixels
row-major (pixel index ``p = y * width + x``), LSB-first within each byte.

Every operation here is a pure function of its inputs and pixels never
interact, so callers may partition frames spatially across workers and get
bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AccumulatorState",
    "BitPlane",
    "GrayFrame",
    "SpikeStream",
    "StreamHeader",
    "accumulate_step",
    "bit_at",
    "plane_nbytes",
]


def plane_nbytes(width: int, height: int) -> int:
    """Packed byte length of one width x height bit plane."""
    return (width * height + 7) // 8


def accumulate_step(residual: int, value: int, omega: int) -> tuple[int, int]:
    """Advance one pixel accumulator by one moment.

    Returns ``(next_residual, spike)``: the residual wraps modulo ``omega``
    and ``spike`` is 1 iff the running total reached ``omega``. At most one
    spike is emitted per moment; should the total reach ``2 * omega`` the
    excess wraps silently (the encoder counts such moments separately, see
    ``EncodeReport.overflow_moments``).
    """
    if omega < 1:
        raise ValueError("omega must be >= 1")
    if not 0 <= residual < omega:
        raise ValueError(f"residual {residual} outside [0, {omega})")
    if value < 0:
        raise ValueError("intensity must be non-negative")
    total = residual + value
    return total % omega, 1 if total >= omega else 0


@dataclass(frozen=True)
class StreamHeader:
    """Stream geometry plus the dispatch threshold it was captured with."""

    width: int
    height: int
    omega: int
    moment_count: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be >= 1")
        if self.omega < 1:
            raise ValueError("omega must be >= 1")
        if self.moment_count < 0:
            raise ValueError("moment_count must be >= 0")

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    @property
    def plane_nbytes(self) -> int:
        return plane_nbytes(self.width, self.height)


@dataclass
class BitPlane:
    """One moment's spike bits, bit-packed.

    ``data`` holds ``ceil(width * height / 8)`` bytes; pixel ``p = y * width
    + x`` lives in byte ``p // 8`` at bit position ``p % 8`` (LSB first).
    Padding bits past ``width * height`` are zero.
    """

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self) -> None:
        self.data = np.ascontiguousarray(self.data, dtype=np.uint8)
        expected = plane_nbytes(self.width, self.height)
        if self.data.shape != (expected,):
            raise ValueError(
                f"plane data holds {self.data.size} bytes, expected {expected}"
            )

    @classmethod
    def from_bool(cls, mask: np.ndarray) -> "BitPlane":
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2:
            raise ValueError("plane mask must be 2-D")
        height, width = mask.shape
        return cls(width, height, np.packbits(mask.ravel(), bitorder="little"))

    def to_bool(self) -> np.ndarray:
        flat = np.unpackbits(
            self.data, count=self.width * self.height, bitorder="little"
        )
        return flat.reshape(self.height, self.width).astype(bool)


def bit_at(plane: BitPlane, x: int, y: int) -> int:
    """Spike bit stored for pixel (x, y)."""
    if not (0 <= x < plane.width and 0 <= y < plane.height):
        raise IndexError(
            f"pixel ({x}, {y}) outside {plane.width}x{plane.height} plane"
        )
    p = y * plane.width + x
    return (int(plane.data[p >> 3]) >> (p & 7)) & 1


@dataclass(eq=False)
class SpikeStream:
    """Header plus one packed bit plane per moment (moment-major in memory)."""

    header: StreamHeader
    packed: np.ndarray

    def __post_init__(self) -> None:
        self.packed = np.ascontiguousarray(self.packed, dtype=np.uint8)
        expected = (self.header.moment_count, self.header.plane_nbytes)
        if self.packed.shape != expected:
            raise ValueError(
                f"packed planes have shape {self.packed.shape}, expected {expected}"
            )

    @classmethod
    def from_bool(cls, bits: np.ndarray, omega: int) -> "SpikeStream":
        """Build a stream from a (moments, height, width) boolean tensor."""
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 3:
            raise ValueError("spike tensor must be (moments, height, width)")
        moments, height, width = bits.shape
        header = StreamHeader(width, height, omega, moments)
        packed = np.packbits(
            bits.reshape(moments, height * width), axis=1, bitorder="little"
        )
        if moments == 0:
            packed = np.zeros((0, header.plane_nbytes), dtype=np.uint8)
        return cls(header, packed)

    def plane(self, t: int) -> BitPlane:
        """Bit plane for moment ``t`` (1-indexed)."""
        self._check_moment(t)
        return BitPlane(self.header.width, self.header.height, self.packed[t - 1])

    def plane_bool(self, t: int) -> np.ndarray:
        self._check_moment(t)
        flat = np.unpackbits(
            self.packed[t - 1], count=self.header.pixel_count, bitorder="little"
        )
        return flat.reshape(self.header.height, self.header.width).astype(bool)

    @property
    def planes(self) -> list[BitPlane]:
        return [self.plane(t) for t in range(1, self.header.moment_count + 1)]

    def to_bool(self) -> np.ndarray:
        """Whole stream as a (moments, height, width) boolean tensor.

        Materializes one byte per spike bit; fine for desk-scale streams.
        """
        h = self.header
        if h.moment_count == 0:
            return np.zeros((0, h.height, h.width), dtype=bool)
        flat = np.unpackbits(
            self.packed, axis=1, count=h.pixel_count, bitorder="little"
        )
        return flat.reshape(h.moment_count, h.height, h.width).astype(bool)

    def _check_moment(self, t: int) -> None:
        if not 1 <= t <= self.header.moment_count:
            raise ValueError(
                f"moment {t} outside 1..{self.header.moment_count}"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpikeStream):
            return NotImplemented
        return self.header == other.header and np.array_equal(
            self.packed, other.packed
        )


@dataclass
class AccumulatorState:
    """Per-pixel residual intensity, each value in [0, omega)."""

    omega: int
    residual: np.ndarray

    def __post_init__(self) -> None:
        if self.omega < 1:
            raise ValueError("omega must be >= 1")
        self.residual = np.ascontiguousarray(self.residual, dtype=np.int64)
        if self.residual.ndim != 2:
            raise ValueError("residual must be 2-D")
        if self.residual.size and (
            int(self.residual.min()) < 0 or int(self.residual.max()) >= self.omega
        ):
            raise ValueError(f"residuals must lie in [0, {self.omega})")

    @classmethod
    def zeros(cls, width: int, height: int, omega: int) -> "AccumulatorState":
        return cls(omega, np.zeros((height, width), dtype=np.int64))


@dataclass(eq=False)
class GrayFrame:
    """W x H integer intensity image.

    ``bit_depth`` is the nominal maximum value (255 for 8-bit input); every
    pixel satisfies ``0 <= value <= bit_depth``.
    """

    values: np.ndarray
    bit_depth: int = 255

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("frame values must be a non-empty 2-D array")
        if not np.issubdtype(values.dtype, np.integer):
            raise ValueError("frame values must be integers")
        if self.bit_depth < 1:
            raise ValueError("bit_depth must be >= 1")
        lo, hi = int(values.min()), int(values.max())
        if lo < 0:
            raise ValueError("frame values must be non-negative")
        if hi > self.bit_depth:
            raise ValueError(f"value {hi} exceeds bit depth {self.bit_depth}")
        self.values = values

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayFrame):
            return NotImplemented
        return self.bit_depth == other.bit_depth and np.array_equal(
            self.values, other.values
        )
