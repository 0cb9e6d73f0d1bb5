"""Command line front end.

One executable, ``spk``, with a flag namespace per subcommand:

* ``encode``     grayscale frames -> .spk spike stream
* ``decode``     .spk -> PGM reconstructions (latency or window-count)
* ``compress``   .spk -> smaller blob via a lossless backend
* ``decompress`` inverse of compress
* ``stats``      per-moment firing densities as CSV (+ plot)
* ``metrics``    reconstruction quality vs reference frames as CSV (+ plot)

Reports go to stdout as ``key=value`` lines. Exit codes: 0 success, 2 bad
usage, 1 I/O or data error. Output files are written to a temporary name
and renamed into place, so a failed run never leaves a partial file at the
destination. SPK_THREADS caps the worker pool used to save frames; it
never changes output bytes.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .codec import compress_stream, decompress_stream, read_spk, write_spk
from .decoder import TfpConfig, reconstruct_series, tfl_reconstruct, tfp_reconstruct
from .encoder import EncoderConfig, encode_sequence
from .metrics import (
    compare_sequences,
    stream_stats,
    write_quality_report,
    write_stats_report,
)
from .video_io import FrameSource, load_frames, save_frame

__all__ = ["build_parser", "entrypoint", "main"]


def _at_least(minimum: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
        if value < minimum:
            raise argparse.ArgumentTypeError(f"expected an integer >= {minimum}")
        return value

    return parse


def _size(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"{text!r} is not WIDTHxHEIGHT")
    try:
        width, height = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not WIDTHxHEIGHT")
    if width < 1 or height < 1:
        raise argparse.ArgumentTypeError("frame sides must be >= 1")
    return width, height


def _window_list(text: str) -> tuple[int, ...]:
    try:
        windows = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated int list")
    if not windows or any(w < 1 for w in windows):
        raise argparse.ArgumentTypeError("sweep windows must be integers >= 1")
    return windows


def _worker_count() -> int:
    raw = os.environ.get("SPK_THREADS", "")
    try:
        hint = int(raw)
    except ValueError:
        hint = 0
    if hint >= 1:
        return hint
    return os.cpu_count() or 1


def _write_bytes(path: Path, payload: bytes) -> None:
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _fmt(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.6f}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spk",
        description="Integrate-and-fire spike stream tools: encode grayscale "
        "video, reconstruct it, and measure the results.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    enc = sub.add_parser("encode", help="turn grayscale frames into a spike stream")
    src = enc.add_mutually_exclusive_group(required=True)
    src.add_argument("--frames", type=Path, help="directory of .pgm/.ppm frames")
    src.add_argument("--raw", type=Path, help="headerless 8-bit grayscale frames")
    enc.add_argument("--size", type=_size, metavar="WxH", help="geometry for --raw")
    enc.add_argument(
        "--count", type=_at_least(1), help="frame count in --raw (default: all)"
    )
    enc.add_argument(
        "--omega", type=_at_least(1), default=256, help="firing threshold (default 256)"
    )
    enc.add_argument(
        "--repeat", type=_at_least(1), default=1,
        help="moments each frame is held for (default 1)",
    )
    enc.add_argument(
        "--pixel-major", action="store_true",
        help="store one bit record per pixel instead of one plane per moment",
    )
    enc.add_argument("--out", type=Path, required=True, help="output .spk path")

    dec = sub.add_parser("decode", help="reconstruct grayscale frames from a stream")
    dec.add_argument("--in", dest="src", type=Path, required=True, help=".spk input")
    dec.add_argument("--method", choices=("tfl", "tfp"), required=True)
    dec.add_argument("--window", type=_at_least(1), help="tfp window in moments")
    dec.add_argument(
        "--sweep", type=_window_list, metavar="W1,W2,...",
        help="decode with several tfp windows in one run",
    )
    dec.add_argument(
        "--contrast", type=_at_least(2), default=256,
        help="grey levels in the output (default 256)",
    )
    when = dec.add_mutually_exclusive_group(required=True)
    when.add_argument("--at", type=_at_least(1), help="reconstruct at one moment")
    when.add_argument("--every", type=_at_least(1), help="reconstruct every K moments")
    dec.add_argument(
        "--start", type=_at_least(1), help="first moment for --every (default: K)"
    )
    dec.add_argument(
        "--depth", type=int, choices=(8, 16),
        help="PGM sample depth (default: smallest that fits the contrast)",
    )
    dec.add_argument("--out-dir", type=Path, required=True, help="PGM destination")
    dec.add_argument(
        "--figure", type=Path, help="also render the decoded frames side by side"
    )

    com = sub.add_parser("compress", help="losslessly compress a file")
    com.add_argument("--in", dest="src", type=Path, required=True)
    com.add_argument("--backend", choices=("lz77", "lzma"), required=True)
    com.add_argument("--out", type=Path, required=True)

    dcm = sub.add_parser("decompress", help="undo spk compress")
    dcm.add_argument("--in", dest="src", type=Path, required=True)
    dcm.add_argument("--backend", choices=("lz77", "lzma"), required=True)
    dcm.add_argument("--out", type=Path, required=True)

    sta = sub.add_parser("stats", help="firing statistics for a stream")
    sta.add_argument("--in", dest="src", type=Path, required=True, help=".spk input")
    sta.add_argument("--out", type=Path, required=True, help="density table (CSV)")
    sta.add_argument(
        "--no-figure", action="store_true", help="skip the plot written next to --out"
    )

    met = sub.add_parser("metrics", help="score reconstructions against references")
    met.add_argument("--recon", type=Path, required=True, help="reconstructed frames")
    met.add_argument("--ref", type=Path, required=True, help="reference frames")
    met.add_argument(
        "--peak", type=_at_least(1), help="PSNR peak (default: reference bit depth)"
    )
    met.add_argument("--out", type=Path, required=True, help="quality table (CSV)")
    met.add_argument(
        "--no-figure", action="store_true", help="skip the plot written next to --out"
    )
    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command == "encode":
        if args.raw is not None and args.size is None:
            parser.error("--raw requires --size WxH")
        if args.frames is not None and (args.size or args.count):
            parser.error("--size and --count apply only to --raw")
    elif args.command == "decode":
        if args.method == "tfp":
            if args.window is None and args.sweep is None:
                parser.error("--method tfp requires --window or --sweep")
            if args.window is not None and args.sweep is not None:
                parser.error("use either --window or --sweep, not both")
        else:
            if args.window is not None or args.sweep is not None:
                parser.error("--window and --sweep apply only to --method tfp")
        if args.start is not None and args.every is None:
            parser.error("--start applies only to --every")
        if args.figure is not None and args.every is not None:
            parser.error("--figure requires --at")
        if args.depth == 8 and args.contrast > 256:
            parser.error(f"--depth 8 cannot hold {args.contrast} grey levels")


def _run_encode(args: argparse.Namespace) -> int:
    if args.frames is not None:
        source = FrameSource.from_dir(args.frames)
    else:
        width, height = args.size
        source = FrameSource.from_raw(args.raw, width, height, count=args.count)
    frames = load_frames(source)
    stream, report = encode_sequence(
        frames, EncoderConfig(omega=args.omega, repeat=args.repeat)
    )
    buffer = io.BytesIO()
    written = write_spk(stream, buffer, pixel_major=args.pixel_major)
    _write_bytes(args.out, buffer.getvalue())

    header = stream.header
    print(f"out={args.out}")
    print(f"width={header.width}")
    print(f"height={header.height}")
    print(f"omega={header.omega}")
    print(f"moments={header.moment_count}")
    print(f"total_spikes={report.total_spikes}")
    print(f"spikes_per_pixel_min={report.spikes_per_pixel_min}")
    print(f"spikes_per_pixel_max={report.spikes_per_pixel_max}")
    print(f"spikes_per_pixel_mean={report.spikes_per_pixel_mean:.6f}")
    print(f"overflow_moments={report.overflow_moments}")
    print(f"bytes_written={written}")
    return 0


def _decode_jobs(args: argparse.Namespace, stream) -> list[tuple[str, object]]:
    """Build (filename, frame) pairs for every requested reconstruction."""
    jobs: list[tuple[str, object]] = []
    if args.method == "tfl":
        if args.at is not None:
            jobs.append(
                (f"tfl_t{args.at:06d}.pgm",
                 tfl_reconstruct(stream, args.at, contrast=args.contrast))
            )
        else:
            start = args.start if args.start is not None else args.every
            frames = reconstruct_series(
                stream, "tfl", start=start, stride=args.every, contrast=args.contrast
            )
            moments = range(start, stream.header.moment_count + 1, args.every)
            for t, frame in zip(moments, frames):
                jobs.append((f"tfl_t{t:06d}.pgm", frame))
        return jobs

    windows = args.sweep if args.sweep is not None else (args.window,)
    for window in windows:
        if args.at is not None:
            frame = tfp_reconstruct(
                stream, args.at, TfpConfig(window=window, contrast=args.contrast)
            )
            jobs.append((f"tfp_w{window:04d}_t{args.at:06d}.pgm", frame))
        else:
            start = args.start if args.start is not None else args.every
            frames = reconstruct_series(
                stream, "tfp", start=start, stride=args.every,
                window=window, contrast=args.contrast,
            )
            moments = range(start, stream.header.moment_count + 1, args.every)
            for t, frame in zip(moments, frames):
                jobs.append((f"tfp_w{window:04d}_t{t:06d}.pgm", frame))
    return jobs


def _run_decode(args: argparse.Namespace) -> int:
    stream = read_spk(args.src)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    jobs = _decode_jobs(args, stream)

    def save(job: tuple[str, object]) -> None:
        name, frame = job
        save_frame(frame, args.out_dir / name, depth=args.depth)

    workers = min(_worker_count(), len(jobs)) or 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(save, jobs))
    else:
        for job in jobs:
            save(job)

    print(f"out_dir={args.out_dir}")
    print(f"frames_written={len(jobs)}")
    if args.figure is not None:
        from .report import save_sweep_montage

        labels = [name[: -len(".pgm")] for name, _ in jobs]
        save_sweep_montage([frame for _, frame in jobs], labels, args.figure)
        print(f"figure={args.figure}")
    return 0


def _run_compress(args: argparse.Namespace) -> int:
    data = args.src.read_bytes()
    blob, report = compress_stream(data, args.backend)
    _write_bytes(args.out, blob)
    print(f"out={args.out}")
    print(f"backend={report.backend}")
    print(f"raw_bytes={report.raw_bytes}")
    print(f"compressed_bytes={report.compressed_bytes}")
    print(f"ratio={report.ratio:.6f}")
    return 0


def _run_decompress(args: argparse.Namespace) -> int:
    blob = args.src.read_bytes()
    data = decompress_stream(blob, args.backend)
    _write_bytes(args.out, data)
    print(f"out={args.out}")
    print(f"backend={args.backend}")
    print(f"compressed_bytes={len(blob)}")
    print(f"raw_bytes={len(data)}")
    return 0


def _figure_path(out: Path) -> Path:
    candidate = out.with_suffix(".png")
    if candidate == out:
        candidate = out.with_name(out.name + ".png")
    return candidate


def _run_stats(args: argparse.Namespace) -> int:
    stats = stream_stats(read_spk(args.src))
    table = io.StringIO()
    write_stats_report(stats, table)
    _write_bytes(args.out, table.getvalue().encode("ascii"))

    print(f"out={args.out}")
    print(f"width={stats.width}")
    print(f"height={stats.height}")
    print(f"moments={stats.moment_count}")
    print(f"total_spikes={stats.total_spikes}")
    print(f"rate_min={stats.rate_min:.6f}")
    print(f"rate_max={stats.rate_max:.6f}")
    print(f"rate_mean={stats.rate_mean:.6f}")
    if not args.no_figure:
        from .report import save_density_figure

        figure = _figure_path(args.out)
        save_density_figure(stats, figure)
        print(f"figure={figure}")
    return 0


def _run_metrics(args: argparse.Namespace) -> int:
    recon_source = FrameSource.from_dir(args.recon)
    ref_source = FrameSource.from_dir(args.ref)
    recon = load_frames(recon_source)
    reference = load_frames(ref_source)
    names = [Path(p).name for p in recon_source.paths]
    report = compare_sequences(recon, reference, peak=args.peak, names=names)

    table = io.StringIO()
    write_quality_report(report, table)
    _write_bytes(args.out, table.getvalue().encode("ascii"))

    print(f"out={args.out}")
    print(f"frames={len(report.frames)}")
    print(f"peak={report.peak}")
    print(f"mse={_fmt(report.mse)}")
    print(f"psnr_db={_fmt(report.psnr)}")
    if not args.no_figure:
        from .report import save_quality_figure

        figure = _figure_path(args.out)
        save_quality_figure(report, figure)
        print(f"figure={figure}")
    return 0


_COMMANDS = {
    "encode": _run_encode,
    "decode": _run_decode,
    "compress": _run_compress,
    "decompress": _run_decompress,
    "stats": _run_stats,
    "metrics": _run_metrics,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(parser, args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"spk: error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())
