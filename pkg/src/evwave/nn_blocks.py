"""Inference-style tensor blocks on float64 NCHW arrays.

Covers grouped/strided/padded 2-D convolution, three-branch reparameterizable
convs (train form: 3x3 + 1x1 + scaled identity; deploy form: one fused 3x3),
channel split/shuffle plumbing, the split-conv-shuffle block built from them,
and a conv+pool block whose branch ordering is selectable so the orderings can
be compared. Weights travel through a plain-text manifest with exact float64
round-trip.

Everything here is straight numpy plus the shared conv kernel; there is no
autograd and no nonlinearity, which is all the downstream consumers need.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .kernels import conv2d_core
from .wavelet import WaveletFilters, wavelet_pool


def _as_pair(v: int | tuple[int, int], what: str, minimum: int) -> tuple[int, int]:
    pair = (v, v) if isinstance(v, int) else (int(v[0]), int(v[1]))
    if pair[0] < minimum or pair[1] < minimum:
        raise ValidationError(f"{what} must be >= {minimum}, got {pair}")
    return pair


@dataclass(frozen=True)
class ConvParams:
    """Weights (out_ch, in_ch/groups, kh, kw) + bias, stride, padding, groups.

    stride and padding accept an int or an (h, w) pair; they are normalized to
    pairs. A missing bias becomes zeros.
    """

    weights: np.ndarray
    bias: np.ndarray | None = None
    stride: int | tuple[int, int] = 1
    padding: int | tuple[int, int] = 0
    groups: int = 1

    def __post_init__(self):
        w = np.asarray(self.weights, np.float64)
        if w.ndim != 4:
            raise ValidationError("conv weights must be 4-D (out, in/g, kh, kw)")
        object.__setattr__(self, "weights", w)
        bias = self.bias
        bias = np.zeros(w.shape[0]) if bias is None else np.asarray(bias, np.float64)
        if bias.shape != (w.shape[0],):
            raise ValidationError("bias must be 1-D with one entry per out channel")
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "stride", _as_pair(self.stride, "stride", 1))
        object.__setattr__(self, "padding", _as_pair(self.padding, "padding", 0))
        if self.groups < 1:
            raise ValidationError("groups must be >= 1")
        if w.shape[0] % self.groups != 0:
            raise ValidationError("out channels must divide evenly into groups")

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1] * self.groups

    @property
    def kernel_size(self) -> tuple[int, int]:
        return self.weights.shape[2], self.weights.shape[3]


def conv2d(x: np.ndarray, p: ConvParams) -> np.ndarray:
    """Grouped cross-correlation with zero padding.

    Output spatial size is floor((dim + 2*pad - k) / stride) + 1 per axis.
    """
    x = np.asarray(x, np.float64)
    if x.ndim != 4:
        raise ValidationError("conv2d expects an (N, C, H, W) tensor")
    if x.shape[1] != p.in_channels:
        raise ValidationError(
            f"input has {x.shape[1]} channels, params expect {p.in_channels}"
        )
    ph, pw = p.padding
    if ph or pw:
        x = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    kh, kw = p.kernel_size
    if x.shape[2] < kh or x.shape[3] < kw:
        raise ValidationError("padded input is smaller than the kernel")
    out = conv2d_core(
        np.ascontiguousarray(x),
        np.ascontiguousarray(p.weights),
        p.stride[0],
        p.stride[1],
        p.groups,
    )
    return out + p.bias[None, :, None, None]


# ---------------------------------------------------------------------------
# reparameterizable three-branch conv


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


@dataclass(frozen=True)
class RepConvParams:
    """Train-time branches of a reparameterizable conv, plus an optional fused form.

    branch3x3 must be 3x3/stride 1/pad 1 and branch1x1 1x1/stride 1/pad 0 so
    the branch outputs align elementwise. identity_scale (per-channel, only
    when in == out) adds a scaled skip. `fused`, when present, is the single
    3x3 conv produced by repconv_fuse.
    """

    branch3x3: ConvParams
    branch1x1: ConvParams
    identity_scale: np.ndarray | None = None
    fused: ConvParams | None = None

    def __post_init__(self):
        b3, b1 = self.branch3x3, self.branch1x1
        _require(b3.kernel_size == (3, 3), "branch3x3 must have a 3x3 kernel")
        _require(b3.stride == (1, 1) and b3.padding == (1, 1),
                 "branch3x3 must use stride 1, padding 1")
        _require(b1.kernel_size == (1, 1), "branch1x1 must have a 1x1 kernel")
        _require(b1.stride == (1, 1) and b1.padding == (0, 0),
                 "branch1x1 must use stride 1, padding 0")
        _require(b3.groups == 1 and b1.groups == 1,
                 "reparameterizable convs support groups=1 only")
        _require(b3.in_channels == b1.in_channels
                 and b3.out_channels == b1.out_channels,
                 "branches must share channel counts")
        if self.identity_scale is not None:
            scale = np.asarray(self.identity_scale, np.float64)
            _require(b3.in_channels == b3.out_channels,
                     "identity branch needs in == out channels")
            _require(scale.shape == (b3.out_channels,),
                     "identity_scale must be per-channel")
            object.__setattr__(self, "identity_scale", scale)

    @property
    def channels(self) -> tuple[int, int]:
        return self.branch3x3.in_channels, self.branch3x3.out_channels


def repconv_forward_train(x: np.ndarray, p: RepConvParams) -> np.ndarray:
    """Sum of the 3x3, 1x1, and (optional) scaled-identity branches."""
    out = conv2d(x, p.branch3x3) + conv2d(x, p.branch1x1)
    if p.identity_scale is not None:
        out = out + p.identity_scale[None, :, None, None] * np.asarray(x, np.float64)
    return out


def repconv_fuse(p: RepConvParams) -> RepConvParams:
    """Collapse the branches into one 3x3 conv.

    The 1x1 kernel embeds at the 3x3 center tap; the identity branch is a
    center tap on each channel's own diagonal; biases add.
    """
    k = p.branch3x3.weights.copy()
    k[:, :, 1, 1] += p.branch1x1.weights[:, :, 0, 0]
    if p.identity_scale is not None:
        c = np.arange(k.shape[0])
        k[c, c, 1, 1] += p.identity_scale
    fused = ConvParams(k, p.branch3x3.bias + p.branch1x1.bias, stride=1, padding=1)
    return replace(p, fused=fused)


def repconv_forward_deploy(x: np.ndarray, p: RepConvParams) -> np.ndarray:
    if p.fused is None:
        raise ValidationError("call repconv_fuse before the deploy forward")
    return conv2d(x, p.fused)


# ---------------------------------------------------------------------------
# channel plumbing


def channel_split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Prefix 3:1 split along channels: (3C/4 main, C/4 side). Needs C % 4 == 0."""
    if x.ndim != 4:
        raise ValidationError("channel_split expects an (N, C, H, W) tensor")
    c = x.shape[1]
    if c % 4 != 0:
        raise ValidationError(f"channel count {c} not divisible by 4")
    cut = 3 * c // 4
    return x[:, :cut], x[:, cut:]


def channel_concat(main: np.ndarray, side: np.ndarray) -> np.ndarray:
    if main.shape[0] != side.shape[0] or main.shape[2:] != side.shape[2:]:
        raise ValidationError("concat parts disagree on batch or spatial dims")
    return np.concatenate([main, side], axis=1)


def channel_shuffle(x: np.ndarray, groups: int) -> np.ndarray:
    """Interleave channel groups: input channel c lands at (c % g)*(C/g) + c//g."""
    if x.ndim != 4:
        raise ValidationError("channel_shuffle expects an (N, C, H, W) tensor")
    n, c, h, w = x.shape
    if groups < 1 or c % groups != 0:
        raise ValidationError(f"channel count {c} not divisible by groups {groups}")
    return (
        x.reshape(n, c // groups, groups, h, w)
        .transpose(0, 2, 1, 3, 4)
        .reshape(n, c, h, w)
    )


# ---------------------------------------------------------------------------
# split + grouped conv + shuffle block


@dataclass(frozen=True)
class DrcbParams:
    """Split-transform-shuffle block parameters.

    The main (3C/4) path runs a shape-preserving grouped 3x3 then a 1x1 mixer;
    the side (C/4) path passes through untouched; concat + channel shuffle
    recombines. Cheaper in parameters than stacking dense 3x3 convs at the
    same width, which is the point.
    """

    group_conv: ConvParams
    pointwise_mix: ConvParams
    shuffle_groups: int = 2

    def __post_init__(self):
        gc, pw = self.group_conv, self.pointwise_mix
        _require(gc.groups >= 2, "group_conv must actually be grouped (groups >= 2)")
        _require(gc.kernel_size == (3, 3) and gc.stride == (1, 1)
                 and gc.padding == (1, 1),
                 "group_conv must be a shape-preserving 3x3")
        _require(gc.in_channels == gc.out_channels,
                 "group_conv must preserve channel count")
        _require(pw.kernel_size == (1, 1) and pw.stride == (1, 1)
                 and pw.padding == (0, 0) and pw.groups == 1,
                 "pointwise_mix must be a dense 1x1")
        _require(pw.in_channels == gc.out_channels
                 and pw.out_channels == gc.out_channels,
                 "pointwise_mix must preserve the main path width")
        _require(self.shuffle_groups >= 1, "shuffle_groups must be >= 1")

    @property
    def channels(self) -> int:
        # group_conv carries the 3C/4 main path
        return self.group_conv.in_channels * 4 // 3


def drcb_forward(x: np.ndarray, p: DrcbParams) -> np.ndarray:
    """Shape-preserving: split 3:1, transform main, concat side, shuffle."""
    if x.ndim != 4:
        raise ValidationError("drcb_forward expects an (N, C, H, W) tensor")
    c = x.shape[1]
    if c != p.channels:
        raise ValidationError(f"input has {c} channels, block expects {p.channels}")
    if c % p.shuffle_groups != 0:
        raise ValidationError("channel count not divisible by shuffle_groups")
    main, side = channel_split(np.asarray(x, np.float64))
    main = conv2d(conv2d(main, p.group_conv), p.pointwise_mix)
    return channel_shuffle(channel_concat(main, side), p.shuffle_groups)


def drcb_param_count(p: DrcbParams) -> int:
    return (p.group_conv.weights.size + p.group_conv.bias.size
            + p.pointwise_mix.weights.size + p.pointwise_mix.bias.size)


def dense_conv_param_count(channels: int, kernel: int = 3, layers: int = 2) -> int:
    """Parameters in `layers` stacked dense kxk convs at constant width."""
    return layers * (channels * channels * kernel * kernel + channels)


# ---------------------------------------------------------------------------
# conv + wavelet-pool block (branch ordering selectable)

WP_VARIANTS = ("pool_first", "conv_first", "mixed")


def wp_block_forward(
    x: np.ndarray,
    conv_a: ConvParams,
    conv_b: ConvParams,
    f: WaveletFilters | None = None,
    variant: str = "pool_first",
) -> np.ndarray:
    """Two-branch downsampling block: a 3x3 main branch plus a 1x1 shortcut.

    pool_first (the default): both branches consume the pooled input, i.e.
    conv_a(pool(x)) + conv_b(pool(x)). conv_first pools after each conv, and
    mixed pools after conv_a but before conv_b; those orderings exist so the
    difference is observable, not because they are recommended.
    """
    if variant not in WP_VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; one of {WP_VARIANTS}")
    _require(conv_a.kernel_size == (3, 3) and conv_a.stride == (1, 1)
             and conv_a.padding == (1, 1), "conv_a must be a shape-preserving 3x3")
    _require(conv_b.kernel_size == (1, 1) and conv_b.stride == (1, 1)
             and conv_b.padding == (0, 0), "conv_b must be a 1x1")
    _require(conv_a.out_channels == conv_b.out_channels,
             "branches must agree on output channels")
    x = np.asarray(x, np.float64)
    if variant == "pool_first":
        pooled = wavelet_pool(x, f)
        return conv2d(pooled, conv_a) + conv2d(pooled, conv_b)
    if variant == "conv_first":
        return wavelet_pool(conv2d(x, conv_a), f) + wavelet_pool(conv2d(x, conv_b), f)
    return wavelet_pool(conv2d(x, conv_a), f) + conv2d(wavelet_pool(x, f), conv_b)


# ---------------------------------------------------------------------------
# seeded initializers (uniform in [-scale, scale], test/bench fodder)


def uniform_conv_params(
    rng: np.random.Generator,
    in_ch: int,
    out_ch: int,
    kernel: int | tuple[int, int],
    stride: int | tuple[int, int] = 1,
    padding: int | tuple[int, int] = 0,
    groups: int = 1,
    scale: float = 0.1,
) -> ConvParams:
    kh, kw = _as_pair(kernel, "kernel", 1)
    if in_ch % groups != 0:
        raise ValidationError("in channels must divide evenly into groups")
    w = rng.uniform(-scale, scale, (out_ch, in_ch // groups, kh, kw))
    b = rng.uniform(-scale, scale, out_ch)
    return ConvParams(w, b, stride=stride, padding=padding, groups=groups)


def uniform_repconv_params(
    rng: np.random.Generator,
    in_ch: int,
    out_ch: int | None = None,
    identity: bool = True,
    scale: float = 0.1,
) -> RepConvParams:
    out_ch = in_ch if out_ch is None else out_ch
    ident = None
    if identity:
        if in_ch != out_ch:
            raise ValidationError("identity branch needs in == out channels")
        ident = rng.uniform(-scale, scale, out_ch)
    return RepConvParams(
        branch3x3=uniform_conv_params(rng, in_ch, out_ch, 3, padding=1, scale=scale),
        branch1x1=uniform_conv_params(rng, in_ch, out_ch, 1, scale=scale),
        identity_scale=ident,
    )


def uniform_drcb_params(
    rng: np.random.Generator,
    channels: int,
    groups: int = 4,
    shuffle_groups: int = 2,
    scale: float = 0.1,
) -> DrcbParams:
    if channels % 4 != 0:
        raise ValidationError("block width must be divisible by 4")
    main = 3 * channels // 4
    return DrcbParams(
        group_conv=uniform_conv_params(
            rng, main, main, 3, padding=1, groups=groups, scale=scale
        ),
        pointwise_mix=uniform_conv_params(rng, main, main, 1, scale=scale),
        shuffle_groups=shuffle_groups,
    )


# ---------------------------------------------------------------------------
# weight manifest: plain text, exact float64 round-trip
#
# Record layout, one array per record:
#   <name> <ndim> <dim0> <dim1> ...
#   <value> <value> ...          (row-major, %.17g)
# Blank lines and lines starting with '#' are ignored between records.


def manifest_dumps(arrays: dict[str, np.ndarray]) -> str:
    buf = io.StringIO()
    for name, arr in arrays.items():
        if not name or any(ch.isspace() for ch in name):
            raise ValidationError(f"manifest names cannot contain whitespace: {name!r}")
        a = np.asarray(arr, np.float64)
        dims = " ".join(str(d) for d in a.shape)
        buf.write(f"{name} {a.ndim}{' ' + dims if dims else ''}\n")
        buf.write(" ".join("%.17g" % v for v in a.reshape(-1)) + "\n")
    return buf.getvalue()


def manifest_loads(text: str) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        header = lines[i].strip()
        i += 1
        if not header or header.startswith("#"):
            continue
        parts = header.split()
        try:
            name, ndim = parts[0], int(parts[1])
            dims = tuple(int(d) for d in parts[2 : 2 + ndim])
        except (IndexError, ValueError):
            raise ParseError(f"bad manifest header: {header!r}", i - 1) from None
        if len(dims) != ndim or len(parts) != 2 + ndim:
            raise ParseError(f"bad manifest header: {header!r}", i - 1)
        if i >= len(lines):
            raise ParseError(f"manifest record {name!r} has no value line", i)
        try:
            values = np.array([float(t) for t in lines[i].split()], np.float64)
        except ValueError:
            raise ParseError(f"bad value in manifest record {name!r}", i) from None
        i += 1
        expected = int(np.prod(dims)) if dims else 1
        if values.size != expected:
            raise ParseError(
                f"record {name!r} expects {expected} values, got {values.size}", i - 1
            )
        arrays[name] = values.reshape(dims)
    return arrays


def write_manifest(path: str | Path, arrays: dict[str, np.ndarray]) -> None:
    Path(path).write_text(manifest_dumps(arrays), encoding="ascii")


def read_manifest(path: str | Path) -> dict[str, np.ndarray]:
    return manifest_loads(Path(path).read_text(encoding="ascii"))


def conv_manifest_entries(prefix: str, p: ConvParams) -> dict[str, np.ndarray]:
    return {
        f"{prefix}.weights": p.weights,
        f"{prefix}.bias": p.bias,
        f"{prefix}.stride": np.array(p.stride, np.float64),
        f"{prefix}.padding": np.array(p.padding, np.float64),
        f"{prefix}.groups": np.array([p.groups], np.float64),
    }


def conv_from_manifest(arrays: dict[str, np.ndarray], prefix: str) -> ConvParams:
    try:
        return ConvParams(
            weights=arrays[f"{prefix}.weights"],
            bias=arrays[f"{prefix}.bias"],
            stride=tuple(int(v) for v in arrays[f"{prefix}.stride"]),
            padding=tuple(int(v) for v in arrays[f"{prefix}.padding"]),
            groups=int(arrays[f"{prefix}.groups"][0]),
        )
    except KeyError as exc:
        raise ParseError(f"manifest is missing {exc.args[0]!r}", 0) from None


def repconv_manifest_entries(prefix: str, p: RepConvParams) -> dict[str, np.ndarray]:
    out = conv_manifest_entries(f"{prefix}.branch3x3", p.branch3x3)
    out.update(conv_manifest_entries(f"{prefix}.branch1x1", p.branch1x1))
    if p.identity_scale is not None:
        out[f"{prefix}.identity_scale"] = p.identity_scale
    if p.fused is not None:
        out.update(conv_manifest_entries(f"{prefix}.fused", p.fused))
    return out


def repconv_from_manifest(arrays: dict[str, np.ndarray], prefix: str) -> RepConvParams:
    ident = arrays.get(f"{prefix}.identity_scale")
    fused = None
    if f"{prefix}.fused.weights" in arrays:
        fused = conv_from_manifest(arrays, f"{prefix}.fused")
    return RepConvParams(
        branch3x3=conv_from_manifest(arrays, f"{prefix}.branch3x3"),
        branch1x1=conv_from_manifest(arrays, f"{prefix}.branch1x1"),
        identity_scale=ident,
        fused=fused,
    )
