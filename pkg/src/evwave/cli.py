"""Command-line front end.

Subcommands:
  convert     event file -> PGM frames + meta.txt + report.txt
  noise-eval  inject background noise, report PSNR with vs without pooling
  bench       run the pipeline and print the per-stage timing report
  dwt-dump    decompose a PGM image into its four subbands
  synth       write a deterministic synthetic event file

Exit codes: 0 success, 1 usage/config error, 2 malformed data, 3 file I/O.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, ValidationError
from .event_io import parse_events, serialize_events
from .pgm import read_pgm, write_pgm
from .pipeline import (
    NoiseModel,
    PipelineConfig,
    evaluate_denoising,
    run_pipeline,
)
from .representation import DecayParams
from .synthetic import moving_square_events
from .wavelet import dwt2d

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; this tool reserves 2 for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        dims = int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if dims[0] < 1 or dims[1] < 1:
        raise argparse.ArgumentTypeError("dims must be positive")
    return dims


def _add_io_flags(p: argparse.ArgumentParser, pool_default: int) -> None:
    p.add_argument("--input", required=True, help="event file to read")
    p.add_argument("--format", choices=("csv", "bin"), default="csv")
    p.add_argument("--dims", type=_dims, default=None,
                   help="sensor WxH (required for csv; checked against bin header)")
    p.add_argument("--dt-us", type=int, required=True, help="window length, microseconds")
    p.add_argument("--k", type=float, default=1e-6, help="decay rate, 1/us")
    p.add_argument("--b", type=float, default=1.0, help="decay exponent")
    p.add_argument("--c-thresh", type=float, default=0.2, help="contrast step per event")
    p.add_argument("--smin", type=float, default=-1.0)
    p.add_argument("--smax", type=float, default=1.0)
    p.add_argument("--pool-levels", type=int, default=pool_default)
    p.add_argument("--reset-every", type=int, default=0,
                   help="reinitialize the surface every N windows (0 = never)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true",
                   help="reject unsorted timestamps instead of assuming them")
    p.add_argument("--polarity01", action="store_true",
                   help="input encodes OFF events as 0 instead of -1")


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    try:
        decay = DecayParams(k=args.k, b=args.b, c_thresh=args.c_thresh,
                            s_min=args.smin, s_max=args.smax)
        return PipelineConfig(
            dt_us=args.dt_us,
            dims=args.dims,
            fmt=args.format,
            decay=decay,
            pool_levels=args.pool_levels,
            reset_every=args.reset_every,
            strict=args.strict,
            polarity01=args.polarity01,
            seed=args.seed,
        )
    except ValidationError as exc:  # bad flag values are usage errors here
        raise ConfigError(str(exc)) from None


def _cmd_convert(args: argparse.Namespace) -> int:
    if args.out is None and not args.no_write:
        raise ConfigError("convert needs --out DIR (or --no-write)")
    result = run_pipeline(args.input, _pipeline_config(args),
                          out_dir=args.out, no_write=args.no_write)
    where = args.out if (args.out and not args.no_write) else "(not written)"
    print(f"frames={len(result.frames)} out={where}")
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    result = run_pipeline(args.input, _pipeline_config(args),
                          out_dir=args.out, no_write=args.no_write)
    for line in result.report.lines():
        print(line)
    return EXIT_OK


def _cmd_noise_eval(args: argparse.Namespace) -> int:
    cfg = _pipeline_config(args)
    data = Path(args.input).read_bytes()
    stream, file_dims = parse_events(data, cfg.fmt, dims=cfg.dims,
                                     polarity01=cfg.polarity01, strict=cfg.strict)
    dims = file_dims if file_dims is not None else cfg.dims
    if dims is None:
        raise ConfigError("sensor dims are required for csv input (use --dims WxH)")
    report = evaluate_denoising(
        stream, dims, cfg, NoiseModel(rate=args.noise_rate, seed=args.seed)
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text("\n".join(report.lines()) + "\n", "ascii")
    print(f"mean_psnr_full={report.mean_psnr_full!r}")
    print(f"mean_psnr_pooled={report.mean_psnr_pooled!r}")
    return EXIT_OK


def _cmd_dwt_dump(args: argparse.Namespace) -> int:
    img = read_pgm(args.input).astype(np.float64)
    coeffs = dwt2d(img)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = []
    for name in ("ll", "lh", "hl", "hh"):
        band = getattr(coeffs, name)
        lo, hi = float(band.min()), float(band.max())
        scale = 255.0 / (hi - lo) if hi > lo else 0.0
        pix = np.clip(np.floor((band - lo) * scale), 0, 255).astype(np.uint8)
        write_pgm(out / f"{name}.pgm", pix)
        meta += [f"band.{name}.min={lo!r}", f"band.{name}.max={hi!r}"]
    (out / "meta.txt").write_text("\n".join(meta) + "\n", "ascii")
    print(f"subbands={out}")
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    stream = moving_square_events(
        dims=args.dims,
        n_windows=args.windows,
        dt_us=args.dt_us,
        side=args.side,
        events_per_pixel=args.events_per_pixel,
        seed=args.seed,
    )
    if args.format == "bin":
        payload = serialize_events(stream, args.dims)
    else:
        lines = [f"{e.t},{e.x},{e.y},{e.p}" for e in stream]
        payload = ("\n".join(lines) + "\n").encode("ascii")
    Path(args.out).write_bytes(payload)
    print(f"events={len(stream)} out={args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evwave",
                     description="Event streams to denoised 8-bit frames.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="events -> PGM frames + metadata")
    _add_io_flags(p, pool_default=0)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--no-write", action="store_true", help="skip all file output")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("noise-eval", help="PSNR with vs without wavelet pooling")
    _add_io_flags(p, pool_default=1)
    p.add_argument("--noise-rate", type=float, default=1.0,
                   help="background events per pixel per second")
    p.add_argument("--out", default=None, help="directory for the full report")
    p.set_defaults(func=_cmd_noise_eval)

    p = sub.add_parser("bench", help="print per-stage timings and throughput")
    _add_io_flags(p, pool_default=0)
    p.add_argument("--out", default=None, help="also write frames + reports here")
    p.add_argument("--no-write", action="store_true")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("dwt-dump", help="split a PGM image into wavelet subbands")
    p.add_argument("--input", required=True, help="PGM (P5) image")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_dwt_dump)

    p = sub.add_parser("synth", help="write a synthetic moving-square event file")
    p.add_argument("--dims", type=_dims, default=(128, 128))
    p.add_argument("--windows", type=int, default=100)
    p.add_argument("--dt-us", type=int, default=10_000)
    p.add_argument("--side", type=int, default=24)
    p.add_argument("--events-per-pixel", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "bin"), default="csv")
    p.add_argument("--out", required=True, help="output event file")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"evwave: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"evwave: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"evwave: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
