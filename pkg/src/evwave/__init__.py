"""Event-camera streams to denoised gray frames.

Signal path: parse events -> fixed time windows -> time-decay accumulation
into an intensity surface -> 8-bit quantization -> orthonormal wavelet
pooling. Alongside it: the inference-style conv blocks (reparameterizable
convs, channel shuffle, split-conv-shuffle) and score-consistency query
selection used downstream of such frames, plus a benchmarking CLI.

Hot kernels are numba-compiled when numba imports; set EVWAVE_NO_NUMBA=1 to
force the pure-numpy fallback (``evwave.kernels.BACKEND`` names the active
one).
"""

from .errors import (
    ConfigError,
    DataError,
    EvwaveError,
    ParseError,
    ValidationError,
)
from .event_io import (
    Event,
    EventStream,
    EventWindow,
    parse_binary_events,
    parse_csv_events,
    parse_events,
    polarity_matrix,
    serialize_events,
    slice_windows,
)
from .kernels import BACKEND
from .nn_blocks import (
    ConvParams,
    DrcbParams,
    RepConvParams,
    channel_concat,
    channel_shuffle,
    channel_split,
    conv2d,
    conv_from_manifest,
    conv_manifest_entries,
    dense_conv_param_count,
    drcb_forward,
    drcb_param_count,
    manifest_dumps,
    manifest_loads,
    read_manifest,
    repconv_forward_deploy,
    repconv_forward_train,
    repconv_from_manifest,
    repconv_fuse,
    repconv_manifest_entries,
    uniform_conv_params,
    uniform_drcb_params,
    uniform_repconv_params,
    wp_block_forward,
    write_manifest,
)
from .pgm import read_pgm, write_pgm
from .pipeline import (
    BenchmarkReport,
    DenoiseReport,
    NoiseModel,
    PipelineConfig,
    PipelineResult,
    evaluate_denoising,
    inject_noise,
    pool_frame,
    process_stream,
    psnr,
    run_pipeline,
)
from .query_select import QueryScore, select_queries, uncertainty
from .representation import (
    DecayParams,
    IntensitySurface,
    accumulate,
    decay_factor,
    new_surface,
    run_representation,
    to_gray,
)
from .synthetic import moving_square_events
from .wavelet import (
    WaveletCoeffs2D,
    WaveletFilters,
    dwt1d,
    dwt2d,
    haar_filters,
    idwt1d,
    idwt2d,
    wavelet_pool,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BenchmarkReport",
    "ConfigError",
    "ConvParams",
    "DataError",
    "DecayParams",
    "DenoiseReport",
    "DrcbParams",
    "Event",
    "EventStream",
    "EventWindow",
    "EvwaveError",
    "IntensitySurface",
    "NoiseModel",
    "ParseError",
    "PipelineConfig",
    "PipelineResult",
    "QueryScore",
    "RepConvParams",
    "ValidationError",
    "WaveletCoeffs2D",
    "WaveletFilters",
    "accumulate",
    "channel_concat",
    "channel_shuffle",
    "channel_split",
    "conv2d",
    "conv_from_manifest",
    "conv_manifest_entries",
    "decay_factor",
    "dense_conv_param_count",
    "drcb_forward",
    "drcb_param_count",
    "dwt1d",
    "dwt2d",
    "evaluate_denoising",
    "haar_filters",
    "idwt1d",
    "idwt2d",
    "inject_noise",
    "manifest_dumps",
    "manifest_loads",
    "moving_square_events",
    "new_surface",
    "parse_binary_events",
    "parse_csv_events",
    "parse_events",
    "polarity_matrix",
    "pool_frame",
    "process_stream",
    "psnr",
    "read_manifest",
    "read_pgm",
    "repconv_forward_deploy",
    "repconv_forward_train",
    "repconv_from_manifest",
    "repconv_fuse",
    "repconv_manifest_entries",
    "run_pipeline",
    "run_representation",
    "select_queries",
    "serialize_events",
    "slice_windows",
    "to_gray",
    "uncertainty",
    "uniform_conv_params",
    "uniform_drcb_params",
    "uniform_repconv_params",
    "wavelet_pool",
    "wp_block_forward",
    "write_manifest",
    "write_pgm",
]
