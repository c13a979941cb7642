"""Deterministic synthetic event scenes for evaluation and benchmarks.

A bright square slides horizontally over a dark background, bouncing at the
sensor borders. Window 0 draws the whole square (positive events on every
covered pixel); each later window emits positive events along the newly
covered edge column and negative events along the newly exposed one, which is
what a real contrast sensor would see. Timestamps within a window are sorted
uniform draws, so the stream is globally time-ordered and reproducible from
the seed.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .event_io import EventStream


def moving_square_events(
    dims: tuple[int, int] = (128, 128),
    n_windows: int = 100,
    dt_us: int = 10_000,
    side: int = 24,
    events_per_pixel: int = 5,
    seed: int = 0,
) -> EventStream:
    width, height = dims
    if side < 1 or side > min(width, height):
        raise ValidationError("square side must fit inside the sensor")
    if n_windows < 1 or dt_us < 1 or events_per_pixel < 1:
        raise ValidationError("n_windows, dt_us, events_per_pixel must be >= 1")

    rng = np.random.default_rng(seed)
    y0 = (height - side) // 2
    rows = np.arange(y0, y0 + side)
    x0, vel = 2 if width > side + 2 else 0, 1

    ts_all, xs_all, ys_all, ps_all = [], [], [], []
    for w in range(n_windows):
        if w == 0:
            xs = np.repeat(np.arange(x0, x0 + side), side)
            ys = np.tile(rows, side)
            ps = np.ones(xs.size, np.int64)
        else:
            if x0 + vel < 0 or x0 + vel + side > width:
                vel = -vel
            on_col = x0 + side if vel > 0 else x0 - 1
            off_col = x0 if vel > 0 else x0 + side - 1
            x0 += vel
            xs = np.concatenate([np.full(side, on_col), np.full(side, off_col)])
            ys = np.concatenate([rows, rows])
            ps = np.concatenate([np.ones(side, np.int64), -np.ones(side, np.int64)])
        xs = np.repeat(xs, events_per_pixel)
        ys = np.repeat(ys, events_per_pixel)
        ps = np.repeat(ps, events_per_pixel)
        ts = np.sort(rng.integers(w * dt_us, (w + 1) * dt_us, xs.size))
        if w == 0:
            ts[0] = 0  # pin the stream start so windows tile from t = 0
        ts_all.append(ts)
        xs_all.append(xs)
        ys_all.append(ys)
        ps_all.append(ps)

    return EventStream(
        t=np.concatenate(ts_all).astype(np.int64),
        x=np.concatenate(xs_all).astype(np.int32),
        y=np.concatenate(ys_all).astype(np.int32),
        p=np.concatenate(ps_all).astype(np.int8),
    )
