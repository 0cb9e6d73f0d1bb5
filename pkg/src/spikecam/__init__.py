"""Integrate-and-fire spike stream toolkit.

Encode grayscale video into per-pixel binary spike streams, store them in
a compact container, reconstruct intensity frames from latency or window
counts, and measure how well the round trip went.
"""

from .codec import (
    BACKENDS,
    BadMagicError,
    CompressionReport,
    CorruptInputError,
    SpkFormatError,
    TruncatedStreamError,
    VersionMismatchError,
    compress_stream,
    decompress_stream,
    read_spk,
    write_spk,
)
from .core import (
    AccumulatorState,
    BitPlane,
    GrayFrame,
    SpikeStream,
    StreamHeader,
    accumulate_step,
    bit_at,
    plane_nbytes,
)
from .decoder import (
    TfpConfig,
    TflState,
    reconstruct_series,
    tfl_reconstruct,
    tfp_reconstruct,
)
from .encoder import EncodeReport, EncoderConfig, encode_sequence, luma_convert
from .metrics import (
    FrameQuality,
    QualityReport,
    StreamStats,
    compare_sequences,
    mse,
    psnr,
    stream_stats,
    write_quality_report,
    write_stats_report,
)
from .video_io import FrameSource, NetpbmError, load_frames, save_frame

__version__ = "0.1.0"

__all__ = [
    "AccumulatorState",
    "BACKENDS",
    "BadMagicError",
    "BitPlane",
    "CompressionReport",
    "CorruptInputError",
    "EncodeReport",
    "EncoderConfig",
    "FrameQuality",
    "FrameSource",
    "GrayFrame",
    "NetpbmError",
    "QualityReport",
    "SpikeStream",
    "SpkFormatError",
    "StreamHeader",
    "StreamStats",
    "TfpConfig",
    "TflState",
    "TruncatedStreamError",
    "VersionMismatchError",
    "accumulate_step",
    "bit_at",
    "compare_sequences",
    "compress_stream",
    "decompress_stream",
    "encode_sequence",
    "load_frames",
    "luma_convert",
    "mse",
    "plane_nbytes",
    "psnr",
    "read_spk",
    "reconstruct_series",
    "save_frame",
    "stream_stats",
    "tfl_reconstruct",
    "tfp_reconstruct",
    "write_quality_report",
    "write_spk",
    "write_stats_report",
]
