"""Figure rendering for CLI reports.

Kept separate from the metrics module so importing the library never pulls
in matplotlib. The Agg backend is forced before pyplot loads, which makes
rendering work in headless environments.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .core import GrayFrame
from .metrics import QualityReport, StreamStats

__all__ = [
    "save_density_figure",
    "save_quality_figure",
    "save_sweep_montage",
]


def _save_atomic(fig, path: Path) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=path.suffix)
    try:
        with os.fdopen(fd, "wb") as handle:
            fig.savefig(handle, format=path.suffix.lstrip(".") or "png")
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    finally:
        plt.close(fig)


def save_density_figure(stats: StreamStats, path: Path) -> None:
    """Plot per-moment spike density for a stream."""
    fig, ax = plt.subplots(figsize=(8, 4))
    moments = range(1, stats.moment_count + 1)
    ax.plot(moments, stats.plane_density, linewidth=1.0)
    ax.set_xlabel("moment")
    ax.set_ylabel("fraction of pixels firing")
    ax.set_title(
        f"{stats.width}x{stats.height}, {stats.moment_count} moments, "
        f"{stats.total_spikes} spikes"
    )
    ax.set_ylim(bottom=0.0)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save_atomic(fig, path)


def save_quality_figure(report: QualityReport, path: Path) -> None:
    """Plot per-frame PSNR; infinite values are drawn as gaps."""
    fig, ax = plt.subplots(figsize=(8, 4))
    xs = [rec.index for rec in report.frames]
    ys = [rec.psnr if rec.psnr != float("inf") else float("nan") for rec in report.frames]
    ax.plot(xs, ys, marker="o", linewidth=1.0)
    ax.set_xlabel("frame")
    ax.set_ylabel("PSNR (dB)")
    label = "inf" if report.psnr == float("inf") else f"{report.psnr:.2f} dB"
    ax.set_title(f"aggregate PSNR {label} (peak {report.peak})")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save_atomic(fig, path)


def save_sweep_montage(
    frames: Sequence[GrayFrame],
    labels: Sequence[str],
    path: Path,
) -> None:
    """Render reconstructed frames side by side for visual comparison."""
    if not frames:
        raise ValueError("montage needs at least one frame")
    if len(frames) != len(labels):
        raise ValueError("one label per frame is required")
    n = len(frames)
    fig, axes = plt.subplots(1, n, figsize=(3 * n, 3.4), squeeze=False)
    for ax, frame, label in zip(axes[0], frames, labels):
        ax.imshow(frame.values, cmap="gray", vmin=0, vmax=frame.bit_depth)
        ax.set_title(label, fontsize=9)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    _save_atomic(fig, path)
