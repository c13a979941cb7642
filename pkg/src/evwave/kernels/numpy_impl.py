"""Vectorized numpy implementations of the hot kernels."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv2d_core(xp, w, stride_h, stride_w, groups):
    """Grouped cross-correlation on a pre-padded input.

    xp: (N, C, Hp, Wp) float64, already zero-padded.
    w:  (O, C // groups, kh, kw) float64.
    Returns (N, O, Ho, Wo) with Ho = (Hp - kh) // stride_h + 1.
    """
    n, cin, hp, wp = xp.shape
    out_ch, cg, kh, kw = w.shape
    ho = (hp - kh) // stride_h + 1
    wo = (wp - kw) // stride_w + 1
    og = out_ch // groups
    # (N, C, Ho, Wo, kh, kw) view, no copy
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride_h, ::stride_w]
    win = win[:, :, :ho, :wo]
    out = np.empty((n, out_ch, ho, wo), dtype=np.float64)
    for g in range(groups):
        out[:, g * og:(g + 1) * og] = np.einsum(
            "nchwij,ocij->nohw",
            win[:, g * cg:(g + 1) * cg],
            w[g * og:(g + 1) * og],
            optimize=True,
        )
    return out


def polarity_accumulate(xs, ys, ps, height, width):
    """Sum event polarities per pixel into an (height, width) int64 grid."""
    out = np.zeros((height, width), dtype=np.int64)
    np.add.at(out, (ys, xs), ps)
    return out
