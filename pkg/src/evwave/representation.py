"""Time-decay accumulation of polarity mass into 8-bit gray frames.

Per window the surface update is ``S' = clip((S + P * C) * d, s_min, s_max)``
with decay weight ``d = max(0, 1 - k * dt) ** b``, then frames quantize as
``floor(255 * (S - s_min) / (s_max - s_min))``. The surface starts at 0 and
folds continuously across windows; ``reset_every`` reinitializes it every N
windows for recordings that should not carry state indefinitely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ValidationError
from .event_io import EventWindow, polarity_matrix


@dataclass(frozen=True)
class DecayParams:
    """Decay rate k (1/us), exponent b, contrast step C, and clip bounds.

    k = 0 disables decay. Defaults: C = 0.2 and symmetric unit bounds; only
    k has a published reference value (1e-6).
    """

    k: float = 1e-6
    b: float = 1.0
    c_thresh: float = 0.2
    s_min: float = -1.0
    s_max: float = 1.0

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError("decay rate k must be >= 0")
        if self.b <= 0:
            raise ValidationError("decay exponent b must be > 0")
        if self.c_thresh <= 0:
            raise ValidationError("contrast step must be > 0")
        if not self.s_min < self.s_max:
            raise ValidationError("clip bounds require s_min < s_max")


@dataclass(frozen=True)
class IntensitySurface:
    """Per-pixel real accumulator and the timestamp it is valid for."""

    values: np.ndarray  # float64 (height, width)
    last_t: int


def new_surface(dims: tuple[int, int], t_start: int = 0) -> IntensitySurface:
    """Zero-initialized surface for (width, height) sensor dims."""
    width, height = dims
    return IntensitySurface(np.zeros((height, width), np.float64), t_start)


def decay_factor(params: DecayParams, dt: int) -> float:
    """max(0, 1 - k*dt)^b; the base clamps at 0 so the weight stays in [0, 1]."""
    if dt < 0:
        raise ValidationError("dt must be >= 0")
    return max(0.0, 1.0 - params.k * dt) ** params.b


def accumulate(
    surface: IntensitySurface,
    pmat: np.ndarray,
    params: DecayParams,
    dt: int,
) -> IntensitySurface:
    """One window step: add polarity mass, decay, clip to [s_min, s_max]."""
    if surface.values.shape != pmat.shape:
        raise ValidationError(
            f"surface {surface.values.shape} and polarity matrix {pmat.shape} disagree"
        )
    d = decay_factor(params, dt)
    values = np.clip(
        (surface.values + pmat * params.c_thresh) * d, params.s_min, params.s_max
    )
    return IntensitySurface(values, surface.last_t + dt)


def to_gray(surface: IntensitySurface, params: DecayParams) -> np.ndarray:
    """Quantize to uint8: floor of the affine map sending s_min -> 0, s_max -> 255.

    Normalizing before the 255 multiply keeps both endpoints exact in floating
    point (s_max lands on u = 1.0 precisely).
    """
    u = (surface.values - params.s_min) / (params.s_max - params.s_min)
    return np.clip(np.floor(255.0 * u), 0.0, 255.0).astype(np.uint8)


def run_representation(
    windows: Iterable[EventWindow],
    params: DecayParams,
    reset_every: int = 0,
) -> list[np.ndarray]:
    """Fold accumulate over windows and emit one gray frame per window."""
    frames: list[np.ndarray] = []
    surface: IntensitySurface | None = None
    dims: tuple[int, int] | None = None
    for i, window in enumerate(windows):
        if dims is None:
            dims = window.sensor_dims
        elif window.sensor_dims != dims:
            raise ValidationError("windows disagree on sensor dims")
        if surface is None or (reset_every > 0 and i % reset_every == 0 and i > 0):
            surface = new_surface(dims, window.t_start)
        pmat = polarity_matrix(window)
        surface = accumulate(surface, pmat, params, window.t_end - window.t_start)
        frames.append(to_gray(surface, params))
    return frames
