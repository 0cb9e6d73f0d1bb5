"""Texture reconstruction from spike streams.

Two decoders:

* ``tfl_reconstruct`` (texture from latencies): the brightness estimate is
  the dispatch threshold divided by the latency of recent spikes. Fast,
  outline-quality, tracks motion closely.
* ``tfp_reconstruct`` (texture from playback): spikes are counted inside a
  trailing time window of ``w`` moments and scaled to ``C`` contrast
  levels. With ``w`` equal to the dispatch threshold the texture is
  recovered almost exactly; setting ``C = w`` turns the window count into
  the output value itself, extending the dynamic range with the window.

Latency rule: at moment ``t`` a pixel's latency is ``max(t - s, delta)``
where ``s`` is its most recent spike time and ``delta`` the interval
between its two latest spikes (for the first spike, the distance from time
0). At a spike moment the gap is zero, so the estimate equals the latest
inter-spike rate; once the gap outgrows ``delta`` the estimate decays,
which makes darkening pixels fade instead of freezing.

All outputs use half-up rounding and clamp to ``[0, C - 1]``. A query
earlier than the window start truncates the window to ``min(w, t)`` moments
and rescales proportionally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GrayFrame, SpikeStream

__all__ = [
    "TflState",
    "TfpConfig",
    "reconstruct_series",
    "tfl_reconstruct",
    "tfp_reconstruct",
]


def _div_round_half_up(numerator: np.ndarray | int, denominator: np.ndarray | int):
    # exact integer round-half-up of numerator / denominator (non-negative)
    return (2 * numerator + denominator) // (2 * denominator)


def _levels_dtype(contrast: int) -> np.dtype:
    if contrast <= 256:
        return np.dtype(np.uint8)
    if contrast <= 65536:
        return np.dtype(np.uint16)
    return np.dtype(np.uint32)


@dataclass(frozen=True)
class TfpConfig:
    """Playback window size (moments) and output contrast levels."""

    window: int
    contrast: int = 256

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.contrast < 2:
            raise ValueError("contrast must be >= 2")


@dataclass
class TflState:
    """Per-pixel latency tracking.

    ``last_spike`` holds the most recent spike moment (0 = none yet) and
    ``interval`` the gap between the two latest spikes; a pixel's first
    spike measures its interval from time 0. Planes must be observed in
    moment order.
    """

    last_spike: np.ndarray
    interval: np.ndarray
    moment: int = 0

    @classmethod
    def zeros(cls, width: int, height: int) -> "TflState":
        return cls(
            last_spike=np.zeros((height, width), dtype=np.int64),
            interval=np.zeros((height, width), dtype=np.int64),
        )

    def observe(self, spikes: np.ndarray, t: int) -> None:
        if t != self.moment + 1:
            raise ValueError(
                f"planes must be observed in order; got moment {t} "
                f"after {self.moment}"
            )
        self.interval[spikes] = t - self.last_spike[spikes]
        self.last_spike[spikes] = t
        self.moment = t

    def frame(self, t: int, omega: int, contrast: int) -> GrayFrame:
        """Latency-decoded texture at moment ``t >= self.moment``."""
        if t < self.moment:
            raise ValueError("cannot decode before the last observed moment")
        fired = self.last_spike > 0
        gap = t - self.last_spike
        latency = np.where(fired, np.maximum(gap, self.interval), 1)
        levels = _div_round_half_up(omega, latency)
        np.clip(levels, 0, contrast - 1, out=levels)
        levels[~fired] = 0
        return GrayFrame(levels.astype(_levels_dtype(contrast)), contrast - 1)


def tfl_reconstruct(stream: SpikeStream, t: int, contrast: int = 256) -> GrayFrame:
    """Latency decode of moment ``t`` (1-indexed)."""
    _check_moment(stream, t)
    if contrast < 2:
        raise ValueError("contrast must be >= 2")
    state = TflState.zeros(stream.header.width, stream.header.height)
    for ti in range(1, t + 1):
        state.observe(stream.plane_bool(ti), ti)
    return state.frame(t, stream.header.omega, contrast)


def tfp_reconstruct(stream: SpikeStream, t: int, config: TfpConfig) -> GrayFrame:
    """Window-count decode of moment ``t`` (1-indexed)."""
    _check_moment(stream, t)
    effective = min(config.window, t)
    counts = np.zeros((stream.header.height, stream.header.width), dtype=np.int64)
    for ti in range(t - effective + 1, t + 1):
        counts += stream.plane_bool(ti)
    return _counts_to_frame(counts, effective, config.contrast)


def reconstruct_series(
    stream: SpikeStream,
    method: str,
    *,
    start: int = 1,
    stride: int = 1,
    window: int | None = None,
    contrast: int = 256,
) -> list[GrayFrame]:
    """Decode frames at moments ``start, start + stride, ...``.

    Each frame equals the corresponding single-moment reconstruction; the
    implementation just shares decoder state across queries.
    """
    moments = stream.header.moment_count
    if start < 1 or start > moments:
        raise ValueError(f"start {start} beyond stream end ({moments} moments)")
    if stride < 1:
        raise ValueError("stride must be >= 1")

    targets = range(start, moments + 1, stride)
    last = targets[-1]
    out: list[GrayFrame] = []

    if method == "tfl":
        if contrast < 2:
            raise ValueError("contrast must be >= 2")
        state = TflState.zeros(stream.header.width, stream.header.height)
        for t in range(1, last + 1):
            state.observe(stream.plane_bool(t), t)
            if (t - start) % stride == 0 and t >= start:
                out.append(state.frame(t, stream.header.omega, contrast))
    elif method == "tfp":
        if window is None:
            raise ValueError("window is required for the tfp method")
        config = TfpConfig(window, contrast)
        counts = np.zeros(
            (stream.header.height, stream.header.width), dtype=np.int64
        )
        for t in range(1, last + 1):
            counts += stream.plane_bool(t)
            if t - config.window >= 1:
                counts -= stream.plane_bool(t - config.window)
            if (t - start) % stride == 0 and t >= start:
                out.append(
                    _counts_to_frame(counts, min(config.window, t), config.contrast)
                )
    else:
        raise ValueError(f"unknown reconstruction method {method!r}")
    return out


def _counts_to_frame(counts: np.ndarray, window: int, contrast: int) -> GrayFrame:
    levels = _div_round_half_up(counts * contrast, window)
    np.clip(levels, 0, contrast - 1, out=levels)
    return GrayFrame(levels.astype(_levels_dtype(contrast)), contrast - 1)


def _check_moment(stream: SpikeStream, t: int) -> None:
    if not 1 <= t <= stream.header.moment_count:
        raise ValueError(
            f"moment {t} outside 1..{stream.header.moment_count}"
        )
