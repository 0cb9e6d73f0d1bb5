"""Grayscale frame sequences to spike streams.

Each input frame drives every pixel's accumulator for ``repeat`` consecutive
moments (a repeated frame is the zero-order hold of the scene between
frames, standing in for a native high-speed source). Accumulators start at
zero and persist across moments and across frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import AccumulatorState, GrayFrame, SpikeStream, StreamHeader

__all__ = ["EncodeReport", "EncoderConfig", "encode_sequence", "luma_convert"]


@dataclass(frozen=True)
class EncoderConfig:
    """Dispatch threshold and temporal upsampling factor."""

    omega: int = 256
    repeat: int = 1

    def __post_init__(self) -> None:
        if self.omega < 1:
            raise ValueError("omega must be >= 1")
        if self.repeat < 1:
            raise ValueError("repeat must be >= 1")


@dataclass(frozen=True)
class EncodeReport:
    """Spike totals for one encode call.

    ``overflow_moments`` counts (pixel, moment) pairs whose running total
    reached ``2 * omega``; those moments still emit a single spike, so some
    intensity is dropped. Cannot happen with 8-bit input and omega = 256.
    """

    total_spikes: int
    spikes_per_pixel_min: int
    spikes_per_pixel_max: int
    spikes_per_pixel_mean: float
    overflow_moments: int


def luma_convert(rgb: np.ndarray) -> GrayFrame:
    """Collapse an 8-bit RGB frame to BT.601 luma.

    ``value = round(0.299 R + 0.587 G + 0.114 B)`` with half-up rounding,
    computed in exact integer arithmetic.
    """
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("expected an (height, width, 3) RGB array")
    if not np.issubdtype(rgb.dtype, np.integer):
        raise ValueError("RGB samples must be integers")
    if rgb.size and (int(rgb.min()) < 0 or int(rgb.max()) > 255):
        raise ValueError("RGB samples must lie in [0, 255]")
    r, g, b = (rgb[..., c].astype(np.int64) for c in range(3))
    luma = (299 * r + 587 * g + 114 * b + 500) // 1000
    np.clip(luma, 0, 255, out=luma)
    return GrayFrame(luma.astype(np.uint8), bit_depth=255)


def encode_sequence(
    frames: Sequence[GrayFrame],
    config: EncoderConfig | None = None,
    state: AccumulatorState | None = None,
) -> tuple[SpikeStream, EncodeReport]:
    """Run every pixel's accumulator over the frame sequence.

    The stream gets ``len(frames) * repeat`` planes. Passing ``state``
    carries accumulators over from a previous call (it is updated in
    place), so encoding a split sequence chunk by chunk is bit-identical
    to one call over the whole sequence.
    """
    config = config or EncoderConfig()
    if not frames:
        raise ValueError("at least one frame is required")
    height, width = frames[0].values.shape
    for i, frame in enumerate(frames):
        if frame.values.shape != (height, width):
            raise ValueError(
                f"frame {i} is {frame.width}x{frame.height}, "
                f"expected {width}x{height}"
            )

    omega = config.omega
    if state is not None:
        if state.residual.shape != (height, width):
            raise ValueError("accumulator state does not match frame geometry")
        if state.omega != omega:
            raise ValueError(
                f"accumulator state was built for omega {state.omega}, "
                f"encoder uses {omega}"
            )
        residual = state.residual.astype(np.int64, copy=True)
    else:
        residual = np.zeros((height, width), dtype=np.int64)

    moments = len(frames) * config.repeat
    header = StreamHeader(width, height, omega, moments)
    packed = np.empty((moments, header.plane_nbytes), dtype=np.uint8)
    counts = np.zeros((height, width), dtype=np.int64)
    overflow = 0

    t = 0
    for frame in frames:
        values = frame.values.astype(np.int64)
        for _ in range(config.repeat):
            total = residual + values
            spikes = total >= omega
            overflow += int(np.count_nonzero(total >= 2 * omega))
            residual = total % omega
            packed[t] = np.packbits(spikes.ravel(), bitorder="little")
            counts += spikes
            t += 1

    if state is not None:
        state.residual[:] = residual

    report = EncodeReport(
        total_spikes=int(counts.sum()),
        spikes_per_pixel_min=int(counts.min()),
        spikes_per_pixel_max=int(counts.max()),
        spikes_per_pixel_mean=float(counts.mean()),
        overflow_moments=overflow,
    )
    return SpikeStream(header, packed), report
