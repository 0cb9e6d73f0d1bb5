"""Reconstruction quality metrics and stream statistics.

Quality reports serialize as line-delimited CSV, one record per frame plus
an ``aggregate`` footer row, so sweep scripts can diff runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .core import GrayFrame, SpikeStream

__all__ = [
    "FrameQuality",
    "QualityReport",
    "StreamStats",
    "compare_sequences",
    "mse",
    "psnr",
    "stream_stats",
    "write_quality_report",
    "write_stats_report",
]


def mse(a: GrayFrame, b: GrayFrame) -> float:
    if a.values.shape != b.values.shape:
        raise ValueError(
            f"frame sizes differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    diff = a.values.astype(np.int64) - b.values.astype(np.int64)
    return float(np.mean(diff * diff))


def psnr(a: GrayFrame, b: GrayFrame, peak: int) -> float:
    """Peak signal-to-noise ratio in dB; ``math.inf`` for identical frames."""
    if peak < 1:
        raise ValueError("peak must be >= 1")
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)


@dataclass(frozen=True)
class FrameQuality:
    index: int
    name: str
    mse: float
    psnr: float


@dataclass(frozen=True)
class QualityReport:
    """Per-frame quality records plus pooled aggregates."""

    frames: tuple[FrameQuality, ...]
    peak: int
    mse: float
    psnr: float


def compare_sequences(
    recon: Sequence[GrayFrame],
    reference: Sequence[GrayFrame],
    peak: int | None = None,
    names: Sequence[str] | None = None,
) -> QualityReport:
    """Score ``recon`` against ``reference``, frame by frame.

    ``peak`` defaults to the reference sequence's bit depth. The aggregate
    MSE pools squared error over all pixels of all frames.
    """
    if len(recon) != len(reference):
        raise ValueError(
            f"{len(recon)} reconstructed frames vs {len(reference)} references"
        )
    if not reference:
        raise ValueError("at least one frame pair is required")
    if peak is None:
        peak = reference[0].bit_depth
    if peak < 1:
        raise ValueError("peak must be >= 1")

    records = []
    for i, (r, ref) in enumerate(zip(recon, reference)):
        name = names[i] if names else f"frame{i + 1:06d}"
        records.append(FrameQuality(i + 1, name, mse(r, ref), psnr(r, ref, peak)))

    pooled = float(np.mean([rec.mse for rec in records]))
    agg_psnr = math.inf if pooled == 0.0 else 10.0 * math.log10(peak * peak / pooled)
    return QualityReport(tuple(records), peak, pooled, agg_psnr)


@dataclass(frozen=True)
class StreamStats:
    """Spike totals, per-pixel rates, and per-moment plane densities."""

    width: int
    height: int
    moment_count: int
    total_spikes: int
    rate_min: float
    rate_max: float
    rate_mean: float
    plane_density: np.ndarray


def stream_stats(stream: SpikeStream) -> StreamStats:
    header = stream.header
    moments = header.moment_count
    counts = np.zeros((header.height, header.width), dtype=np.int64)
    density = np.zeros(moments, dtype=np.float64)
    for t in range(1, moments + 1):
        bits = stream.plane_bool(t)
        counts += bits
        density[t - 1] = np.count_nonzero(bits) / header.pixel_count
    if moments:
        rates = counts / moments
        rate_min, rate_max = float(rates.min()), float(rates.max())
        rate_mean = float(rates.mean())
    else:
        rate_min = rate_max = rate_mean = 0.0
    return StreamStats(
        width=header.width,
        height=header.height,
        moment_count=moments,
        total_spikes=int(counts.sum()),
        rate_min=rate_min,
        rate_max=rate_max,
        rate_mean=rate_mean,
        plane_density=density,
    )


def _fmt(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.6f}"


def write_quality_report(report: QualityReport, sink: TextIO) -> None:
    sink.write("frame,name,mse,psnr_db\n")
    for rec in report.frames:
        sink.write(f"{rec.index},{rec.name},{_fmt(rec.mse)},{_fmt(rec.psnr)}\n")
    sink.write(f"aggregate,,{_fmt(report.mse)},{_fmt(report.psnr)}\n")


def write_stats_report(stats: StreamStats, sink: TextIO) -> None:
    sink.write("moment,density\n")
    for t, density in enumerate(stats.plane_density, start=1):
        sink.write(f"{t},{density:.6f}\n")
    mean_density = float(stats.plane_density.mean()) if stats.moment_count else 0.0
    sink.write(f"aggregate,{mean_density:.6f}\n")
