"""End-to-end frame production: parse, window, accumulate, quantize, pool, write.

Every stage is timed with perf_counter_ns so the benchmark subcommand can
report a per-stage breakdown. Throughput (fps) counts only the steady-state
per-window compute stages — accumulate, quantize, pool — after a short
warmup; parsing, windowing, and file writes are reported separately so disk
speed never flatters or penalizes the kernel numbers.

Outputs are binary PGM frames plus two key=value text files: meta.txt, which
is fully deterministic (same input + config => byte-identical), and
report.txt, which carries the timings and is allowed to vary run to run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ValidationError
from .event_io import EventStream, parse_events, polarity_matrix, slice_windows
from .kernels import BACKEND
from .pgm import write_pgm
from .representation import DecayParams, accumulate, new_surface, to_gray
from .wavelet import WaveletFilters, wavelet_pool

_FORMATS = ("csv", "bin")


@dataclass(frozen=True)
class PipelineConfig:
    dt_us: int
    dims: tuple[int, int] | None = None
    fmt: str = "csv"
    decay: DecayParams = field(default_factory=DecayParams)
    pool_levels: int = 0
    reset_every: int = 0
    strict: bool = False
    polarity01: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.fmt not in _FORMATS:
            raise ConfigError(f"format must be one of {_FORMATS}, got {self.fmt!r}")
        if self.dt_us <= 0:
            raise ConfigError("dt_us must be > 0")
        if self.pool_levels < 0 or self.reset_every < 0:
            raise ConfigError("pool_levels and reset_every must be >= 0")


@dataclass
class BenchmarkReport:
    """Stage totals (ns), steady-state throughput, and the config echo."""

    backend: str
    n_windows: int
    warmup_windows: int
    fps_frames: int
    fps_seconds: float
    fps: float
    stage_ns: dict[str, int]
    config: dict[str, object]

    def lines(self) -> list[str]:
        out = [f"backend={self.backend}",
               f"n_windows={self.n_windows}",
               f"warmup_windows={self.warmup_windows}",
               f"fps={_fmt(self.fps)}",
               f"fps_frames={self.fps_frames}",
               f"fps_seconds={_fmt(self.fps_seconds)}"]
        out += [f"{name}_ns={self.stage_ns[name]}" for name in sorted(self.stage_ns)]
        out += [f"config.{k}={_fmt(v)}" for k, v in sorted(self.config.items())]
        return out


@dataclass
class PipelineResult:
    frames: list[np.ndarray]
    report: BenchmarkReport
    frame_paths: list[Path]


def _fmt(v: object) -> str:
    # repr of a float is shortest-round-trip and stable across runs
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def pool_frame(
    gray: np.ndarray, levels: int, f: WaveletFilters | None = None
) -> np.ndarray:
    """Apply `levels` of low-pass pooling and rescale back to 8-bit range.

    Each 2D level scales the band's ceiling by 2, so dividing by 2**levels
    maps the theoretical range onto [0, 255]; round-to-nearest re-quantizes
    (floor would drop constant regions by one step on fp rounding jitter).
    """
    if levels < 0:
        raise ConfigError("pool levels must be >= 0")
    if levels == 0:
        return gray
    v = gray.astype(np.float64)
    for _ in range(levels):
        v = wavelet_pool(v, f)
    return np.clip(np.rint(v / float(2**levels)), 0.0, 255.0).astype(np.uint8)


def _config_echo(cfg: PipelineConfig, dims: tuple[int, int]) -> dict[str, object]:
    return {
        "format": cfg.fmt,
        "width": dims[0],
        "height": dims[1],
        "dt_us": cfg.dt_us,
        "k": cfg.decay.k,
        "b": cfg.decay.b,
        "c_thresh": cfg.decay.c_thresh,
        "s_min": cfg.decay.s_min,
        "s_max": cfg.decay.s_max,
        "pool_levels": cfg.pool_levels,
        "reset_every": cfg.reset_every,
        "strict": cfg.strict,
        "polarity01": cfg.polarity01,
    }


def process_stream(
    stream: EventStream, dims: tuple[int, int], cfg: PipelineConfig
) -> tuple[list[np.ndarray], BenchmarkReport]:
    """Window and fold a parsed stream into final frames, timing each stage.

    The returned report has parse_ns = write_ns = 0; run_pipeline fills those
    in when it owns the file I/O.
    """
    width, height = dims
    if cfg.pool_levels:
        div = 2**cfg.pool_levels
        if width % div or height % div:
            raise ConfigError(
                f"dims {width}x{height} not divisible by 2^{cfg.pool_levels}"
            )

    t0 = time.perf_counter_ns()
    windows = slice_windows(stream, cfg.dt_us, dims)
    window_ns = time.perf_counter_ns() - t0

    n = len(windows)
    acc = np.zeros(n, np.int64)
    qnt = np.zeros(n, np.int64)
    pol = np.zeros(n, np.int64)
    frames: list[np.ndarray] = []
    surface = None
    for i, w in enumerate(windows):
        if surface is None or (cfg.reset_every > 0 and i % cfg.reset_every == 0 and i > 0):
            surface = new_surface(dims, w.t_start)
        t = time.perf_counter_ns()
        pmat = polarity_matrix(w)
        surface = accumulate(surface, pmat, cfg.decay, w.t_end - w.t_start)
        acc[i] = time.perf_counter_ns() - t

        t = time.perf_counter_ns()
        gray = to_gray(surface, cfg.decay)
        qnt[i] = time.perf_counter_ns() - t

        if cfg.pool_levels:
            t = time.perf_counter_ns()
            gray = pool_frame(gray, cfg.pool_levels)
            pol[i] = time.perf_counter_ns() - t
        frames.append(gray)

    warmup = min(10, n // 10)
    fps_frames = n - warmup
    fps_seconds = float((acc[warmup:] + qnt[warmup:] + pol[warmup:]).sum()) / 1e9
    if fps_seconds > 0:
        fps = fps_frames / fps_seconds
    else:
        fps = math.inf if fps_frames else 0.0
    report = BenchmarkReport(
        backend=BACKEND,
        n_windows=n,
        warmup_windows=warmup,
        fps_frames=fps_frames,
        fps_seconds=fps_seconds,
        fps=fps,
        stage_ns={
            "parse": 0,
            "window": int(window_ns),
            "accumulate": int(acc.sum()),
            "quantize": int(qnt.sum()),
            "pool": int(pol.sum()),
            "write": 0,
        },
        config=_config_echo(cfg, dims),
    )
    return frames, report


def meta_lines(cfg: PipelineConfig, dims: tuple[int, int], n_frames: int) -> list[str]:
    """Deterministic run description: config echo + output geometry, no timings."""
    div = 2**cfg.pool_levels
    out = [f"{k}={_fmt(v)}" for k, v in sorted(_config_echo(cfg, dims).items())]
    out += [
        f"frame_width={dims[0] // div}",
        f"frame_height={dims[1] // div}",
        f"pool_divisor={div}",
        f"n_frames={n_frames}",
    ]
    return out


def _write_kv(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def run_pipeline(
    input_path: str | Path,
    cfg: PipelineConfig,
    out_dir: str | Path | None = None,
    no_write: bool = False,
) -> PipelineResult:
    """File-to-files pipeline: read events, produce frames, emit outputs.

    Writes frame_000000.pgm..., meta.txt, and report.txt under out_dir unless
    no_write is set. CSV input needs cfg.dims; binary input carries its own
    dims in the header.
    """
    t0 = time.perf_counter_ns()
    data = Path(input_path).read_bytes()
    stream, file_dims = parse_events(
        data, cfg.fmt, dims=cfg.dims, polarity01=cfg.polarity01, strict=cfg.strict
    )
    parse_ns = time.perf_counter_ns() - t0
    dims = file_dims if file_dims is not None else cfg.dims
    if dims is None:
        raise ConfigError("sensor dims are required for csv input (use --dims WxH)")

    frames, report = process_stream(stream, dims, cfg)
    report.stage_ns["parse"] = int(parse_ns)

    paths: list[Path] = []
    if out_dir is not None and not no_write:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter_ns()
        for i, frame in enumerate(frames):
            p = out / f"frame_{i:06d}.pgm"
            write_pgm(p, frame)
            paths.append(p)
        report.stage_ns["write"] = int(time.perf_counter_ns() - t0)
        _write_kv(out / "meta.txt", meta_lines(cfg, dims, len(frames)))
        _write_kv(out / "report.txt", report.lines())
    return PipelineResult(frames=frames, report=report, frame_paths=paths)


# ---------------------------------------------------------------------------
# noise model + denoising evaluation


@dataclass(frozen=True)
class NoiseModel:
    """Uniform background activity: `rate` events per pixel per second."""

    rate: float
    seed: int = 0

    def __post_init__(self):
        if self.rate < 0:
            raise ValidationError("noise rate must be >= 0")


def inject_noise(
    stream: EventStream,
    model: NoiseModel,
    dims: tuple[int, int],
    span: tuple[int, int],
) -> EventStream:
    """Merge Poisson background events (uniform in x, y, t, fair-coin polarity).

    The draw count is Poisson(rate * pixels * span_seconds) from a seeded
    PCG64 generator, so the result is reproducible. The merge is stable on
    timestamp: the clean events survive as a subsequence. rate = 0 returns
    the input stream unchanged.
    """
    width, height = dims
    t_lo, t_hi = span
    if t_hi <= t_lo:
        raise ValidationError("noise span must be non-empty")
    rng = np.random.Generator(np.random.PCG64(model.seed))
    expected = model.rate * width * height * (t_hi - t_lo) * 1e-6
    n = int(rng.poisson(expected))
    if n == 0:
        return stream
    t = np.concatenate([stream.t, np.sort(rng.integers(t_lo, t_hi, n))])
    x = np.concatenate([stream.x, rng.integers(0, width, n).astype(np.int32)])
    y = np.concatenate([stream.y, rng.integers(0, height, n).astype(np.int32)])
    p = np.concatenate([stream.p, (rng.integers(0, 2, n) * 2 - 1).astype(np.int8)])
    order = np.argsort(t, kind="stable")
    return EventStream(
        t=t[order].astype(np.int64), x=x[order], y=y[order], p=p[order]
    )


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak SNR in dB for 8-bit frames; equal frames give math.inf."""
    if a.shape != b.shape:
        raise ValidationError(f"frame shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


@dataclass
class DenoiseReport:
    psnr_full: np.ndarray
    psnr_pooled: np.ndarray
    mean_psnr_full: float
    mean_psnr_pooled: float
    n_windows: int
    noise: NoiseModel
    config: dict[str, object]

    def lines(self) -> list[str]:
        out = [
            "rng=pcg64",
            f"noise_rate={_fmt(self.noise.rate)}",
            f"noise_seed={self.noise.seed}",
            f"n_windows={self.n_windows}",
            f"mean_psnr_full={_fmt(self.mean_psnr_full)}",
            f"mean_psnr_pooled={_fmt(self.mean_psnr_pooled)}",
        ]
        out += [f"config.{k}={_fmt(v)}" for k, v in sorted(self.config.items())]
        out += [
            f"window.{i:06d}.psnr_full={_fmt(float(v))}"
            for i, v in enumerate(self.psnr_full)
        ]
        out += [
            f"window.{i:06d}.psnr_pooled={_fmt(float(v))}"
            for i, v in enumerate(self.psnr_pooled)
        ]
        return out


def evaluate_denoising(
    clean: EventStream,
    dims: tuple[int, int],
    cfg: PipelineConfig,
    model: NoiseModel,
) -> DenoiseReport:
    """Per-window PSNR of noisy-vs-clean frames, with and without pooling.

    Noise is injected over exactly the clean stream's window grid so both
    streams slice into the same number of windows. Pooling the frames should
    raise PSNR when the noise is unstructured — that comparison is the whole
    reason this function exists.
    """
    if cfg.pool_levels < 1:
        raise ConfigError("denoising evaluation needs pool_levels >= 1")
    windows = slice_windows(clean, cfg.dt_us, dims)
    if not windows:
        raise ValidationError("clean stream has no events")
    n = len(windows)
    t0 = windows[0].t_start
    noisy = inject_noise(clean, model, dims, (t0, t0 + n * cfg.dt_us))

    full_cfg = PipelineConfig(
        dt_us=cfg.dt_us, dims=dims, fmt=cfg.fmt, decay=cfg.decay,
        pool_levels=0, reset_every=cfg.reset_every,
        strict=cfg.strict, polarity01=cfg.polarity01, seed=cfg.seed,
    )
    clean_frames, _ = process_stream(clean, dims, full_cfg)
    noisy_frames, _ = process_stream(noisy, dims, full_cfg)
    if len(noisy_frames) != n:
        raise ValidationError("window grids diverged between clean and noisy runs")

    psnr_full = np.array(
        [psnr(c, m) for c, m in zip(clean_frames, noisy_frames)]
    )
    psnr_pooled = np.array(
        [
            psnr(pool_frame(c, cfg.pool_levels), pool_frame(m, cfg.pool_levels))
            for c, m in zip(clean_frames, noisy_frames)
        ]
    )
    return DenoiseReport(
        psnr_full=psnr_full,
        psnr_pooled=psnr_pooled,
        mean_psnr_full=float(np.mean(psnr_full)),
        mean_psnr_pooled=float(np.mean(psnr_pooled)),
        n_windows=n,
        noise=model,
        config=_config_echo(cfg, dims),
    )
