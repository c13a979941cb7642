"""Numba JIT implementations of the hot kernels.

Same contracts as numpy_impl; explicit loops compile to tight machine code.
No fastmath: IEEE semantics keep both backends bit-comparable.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def conv2d_core(xp, w, stride_h, stride_w, groups):
    n, cin, hp, wp = xp.shape
    out_ch, cg, kh, kw = w.shape
    ho = (hp - kh) // stride_h + 1
    wo = (wp - kw) // stride_w + 1
    og = out_ch // groups
    out = np.zeros((n, out_ch, ho, wo), dtype=np.float64)
    for b in range(n):
        for g in range(groups):
            for ocl in range(og):
                oc = g * og + ocl
                for icl in range(cg):
                    ic = g * cg + icl
                    for oy in range(ho):
                        iy0 = oy * stride_h
                        for ox in range(wo):
                            ix0 = ox * stride_w
                            acc = 0.0
                            for ky in range(kh):
                                for kx in range(kw):
                                    acc += w[oc, icl, ky, kx] * xp[b, ic, iy0 + ky, ix0 + kx]
                            out[b, oc, oy, ox] += acc
    return out


@njit(cache=True)
def polarity_accumulate(xs, ys, ps, height, width):
    out = np.zeros((height, width), dtype=np.int64)
    for i in range(xs.size):
        out[ys[i], xs[i]] += ps[i]
    return out
