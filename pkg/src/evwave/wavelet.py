"""Single-level orthonormal wavelet transforms and low-pass pooling.

Analysis convention for a length-2 filter: coefficient k mixes samples
(2k, 2k+1), so a length-2n signal yields n low-pass and n high-pass
coefficients with no boundary extension. The 2D transform is separable:
rows (axis -2) first, then columns (axis -1).

Filters longer than 2 taps type-check (orthonormality permitting) but the
transforms reject them: boundary handling for wider supports is deferred.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class WaveletFilters:
    """Orthonormal analysis pair: unit-norm low/high taps, mutually orthogonal."""

    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        low = np.asarray(self.low, np.float64)
        high = np.asarray(self.high, np.float64)
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)
        if low.ndim != 1 or high.ndim != 1 or low.shape != high.shape:
            raise ValidationError("filters must be 1-D and the same length")
        if abs(low @ low - 1.0) > _ORTHO_TOL or abs(high @ high - 1.0) > _ORTHO_TOL:
            raise ValidationError("filters must have unit norm")
        if abs(low @ high) > _ORTHO_TOL:
            raise ValidationError("low and high filters must be orthogonal")


def haar_filters() -> WaveletFilters:
    """The orthonormal Haar pair: (1, 1)/sqrt(2) and (1, -1)/sqrt(2)."""
    s = 1.0 / np.sqrt(2.0)
    return WaveletFilters(np.array([s, s]), np.array([s, -s]))


@dataclass(frozen=True)
class WaveletCoeffs2D:
    """One decomposition level: approximation ll and details lh, hl, hh."""

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def __post_init__(self):
        shapes = {self.ll.shape, self.lh.shape, self.hl.shape, self.hh.shape}
        if len(shapes) != 1:
            raise ValidationError("subbands must share one shape")


def _check_filters(f: WaveletFilters | None) -> WaveletFilters:
    if f is None:
        return haar_filters()
    if len(f.low) != 2:
        raise ValidationError("only 2-tap filters are supported")
    return f


def _check_even(n: int, what: str) -> None:
    if n % 2 != 0 or n == 0:
        raise ValidationError(f"{what} must be even and nonzero, got {n}")


def dwt1d(
    x: np.ndarray, f: WaveletFilters | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Split a length-2n vector into n low-pass and n high-pass coefficients."""
    f = _check_filters(f)
    x = np.asarray(x, np.float64)
    if x.ndim != 1:
        raise ValidationError("dwt1d expects a 1-D signal")
    _check_even(x.shape[0], "signal length")
    even, odd = x[0::2], x[1::2]
    return f.low[0] * even + f.low[1] * odd, f.high[0] * even + f.high[1] * odd


def idwt1d(
    low: np.ndarray, high: np.ndarray, f: WaveletFilters | None = None
) -> np.ndarray:
    """Exact inverse of dwt1d (the filter bank is orthonormal)."""
    f = _check_filters(f)
    low = np.asarray(low, np.float64)
    high = np.asarray(high, np.float64)
    if low.shape != high.shape or low.ndim != 1:
        raise ValidationError("low/high coefficient vectors must match")
    x = np.empty(2 * low.shape[0], np.float64)
    x[0::2] = f.low[0] * low + f.high[0] * high
    x[1::2] = f.low[1] * low + f.high[1] * high
    return x


def _analyze_rows(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    return taps[0] * x[..., 0::2, :] + taps[1] * x[..., 1::2, :]


def _analyze_cols(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    return taps[0] * x[..., 0::2] + taps[1] * x[..., 1::2]


def dwt2d(x: np.ndarray, f: WaveletFilters | None = None) -> WaveletCoeffs2D:
    """Separable single-level 2D analysis of an even-dimension matrix."""
    f = _check_filters(f)
    x = np.asarray(x, np.float64)
    if x.ndim != 2:
        raise ValidationError("dwt2d expects a 2-D matrix")
    _check_even(x.shape[0], "row count")
    _check_even(x.shape[1], "column count")
    lo = _analyze_rows(x, f.low)
    hi = _analyze_rows(x, f.high)
    return WaveletCoeffs2D(
        ll=_analyze_cols(lo, f.low),
        lh=_analyze_cols(hi, f.low),
        hl=_analyze_cols(lo, f.high),
        hh=_analyze_cols(hi, f.high),
    )


def idwt2d(c: WaveletCoeffs2D, f: WaveletFilters | None = None) -> np.ndarray:
    """Exact inverse of dwt2d: synthesize columns, then rows."""
    f = _check_filters(f)
    h2, w2 = c.ll.shape
    lo = np.empty((h2, 2 * w2), np.float64)  # row-lowpassed signal
    lo[..., 0::2] = f.low[0] * c.ll + f.high[0] * c.hl
    lo[..., 1::2] = f.low[1] * c.ll + f.high[1] * c.hl
    hi = np.empty((h2, 2 * w2), np.float64)
    hi[..., 0::2] = f.low[0] * c.lh + f.high[0] * c.hh
    hi[..., 1::2] = f.low[1] * c.lh + f.high[1] * c.hh
    x = np.empty((2 * h2, 2 * w2), np.float64)
    x[0::2, :] = f.low[0] * lo + f.high[0] * hi
    x[1::2, :] = f.low[1] * lo + f.high[1] * hi
    return x


def wavelet_pool(x: np.ndarray, f: WaveletFilters | None = None) -> np.ndarray:
    """Keep only the ll band: halves the two trailing (spatial) dims.

    Works on plain 2-D matrices and on (N, C, H, W) feature tensors alike;
    detail bands are discarded, which is what makes this a denoising
    downsample rather than a full transform.
    """
    f = _check_filters(f)
    x = np.asarray(x, np.float64)
    if x.ndim < 2:
        raise ValidationError("wavelet_pool needs at least 2 dims")
    _check_even(x.shape[-2], "height")
    _check_even(x.shape[-1], "width")
    return _analyze_cols(_analyze_rows(x, f.low), f.low)
