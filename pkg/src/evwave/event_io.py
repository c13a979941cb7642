"""Event file parsing, stream validation, and time-window slicing.

An event is one asynchronous brightness-change sample ``(x, y, p, t)`` with
pixel coordinates ``x``/``y``, polarity ``p`` in {-1, +1} and timestamp ``t``
in microseconds. Streams are held columnar (one numpy array per field) so
windowing and accumulation stay vectorized.

Two on-disk formats are supported:

CSV
    One event per line, ``t,x,y,p``, ASCII decimal, LF-terminated.
    Polarity is {-1, 1}, or {0, 1} with ``polarity01`` (0 maps to -1).

Binary
    8-byte header: magic ``EVW1``, width u16 LE, height u16 LE. Then
    little-endian 16-byte records: t u64, x u16, y u16, p i8, 3 zero pad
    bytes. ``serialize_events(parse_events(data))`` is byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ConfigError, ParseError, ValidationError
from .kernels import polarity_accumulate

BINARY_MAGIC = b"EVW1"
_HEADER_SIZE = 8
_RECORD_SIZE = 16
_RECORD_DTYPE = np.dtype(
    [("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "<i1"), ("pad", "u1", (3,))]
)


class Event(NamedTuple):
    """One brightness-change sample."""

    x: int
    y: int
    p: int
    t: int


@dataclass(frozen=True)
class EventStream:
    """Columnar event sequence; arrays share one length and file order."""

    t: np.ndarray  # int64, microseconds
    x: np.ndarray  # int32
    y: np.ndarray  # int32
    p: np.ndarray  # int8, each -1 or +1

    def __post_init__(self):
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.p) == n):
            raise ValidationError("event field arrays disagree in length")

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> Event:
        return Event(int(self.x[i]), int(self.y[i]), int(self.p[i]), int(self.t[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def empty(cls) -> "EventStream":
        return cls(
            t=np.empty(0, np.int64),
            x=np.empty(0, np.int32),
            y=np.empty(0, np.int32),
            p=np.empty(0, np.int8),
        )

    @classmethod
    def from_events(cls, events) -> "EventStream":
        events = list(events)
        return cls(
            t=np.array([e.t for e in events], np.int64),
            x=np.array([e.x for e in events], np.int32),
            y=np.array([e.y for e in events], np.int32),
            p=np.array([e.p for e in events], np.int8),
        )

    def slice(self, lo: int, hi: int) -> "EventStream":
        return EventStream(self.t[lo:hi], self.x[lo:hi], self.y[lo:hi], self.p[lo:hi])


@dataclass(frozen=True)
class EventWindow:
    """Events of one half-open time interval [t_start, t_end)."""

    events: EventStream
    t_start: int
    t_end: int
    sensor_dims: tuple[int, int]  # (width, height)


def _map_polarity(p: np.ndarray, polarity01: bool) -> np.ndarray:
    """Apply the optional 0 -> -1 mapping, then enforce p in {-1, +1}."""
    p = p.astype(np.int64, copy=True)
    if polarity01:
        p[p == 0] = -1
    bad = (p != 1) & (p != -1)
    if bad.any():
        i = int(np.argmax(bad))
        raise ValidationError(f"event {i}: polarity {int(p[i])} not in {{-1, +1}} after mapping")
    return p.astype(np.int8)


def _check_coords(x: np.ndarray, y: np.ndarray, dims: tuple[int, int]) -> None:
    width, height = dims
    bad = (x < 0) | (x >= width) | (y < 0) | (y >= height)
    if bad.any():
        i = int(np.argmax(bad))
        raise ValidationError(
            f"event {i}: coordinate ({int(x[i])}, {int(y[i])}) outside sensor {width}x{height}"
        )


def _check_sorted(t: np.ndarray) -> None:
    if len(t) > 1:
        inv = np.flatnonzero(np.diff(t) < 0)
        if inv.size:
            i = int(inv[0]) + 1
            raise ValidationError(f"timestamps decrease at event index {i}")


def parse_csv_events(
    data: bytes,
    *,
    dims: tuple[int, int] | None = None,
    polarity01: bool = False,
    strict: bool = False,
) -> EventStream:
    """Parse ``t,x,y,p`` CSV bytes into an EventStream (file order kept)."""
    ts, xs, ys, ps = [], [], [], []
    offset = 0
    for raw in data.splitlines(keepends=True):
        line = raw.strip()
        if not line:
            offset += len(raw)
            continue
        fields = line.split(b",")
        if len(fields) != 4:
            raise ParseError(f"expected 4 comma-separated fields, got {len(fields)}", offset)
        try:
            t, x, y, p = (int(f) for f in fields)
        except ValueError:
            raise ParseError(f"non-integer field in line {line.decode(errors='replace')!r}", offset)
        if t < 0 or x < 0 or y < 0:
            raise ValidationError(f"event {len(ts)}: negative t/x/y in line at byte {offset}")
        ts.append(t)
        xs.append(x)
        ys.append(y)
        ps.append(p)
        offset += len(raw)
    stream = EventStream(
        t=np.array(ts, np.int64),
        x=np.array(xs, np.int32),
        y=np.array(ys, np.int32),
        p=_map_polarity(np.array(ps, np.int64), polarity01),
    )
    if dims is not None:
        _check_coords(stream.x, stream.y, dims)
    if strict:
        _check_sorted(stream.t)
    return stream


def parse_binary_events(
    data: bytes,
    *,
    dims: tuple[int, int] | None = None,
    polarity01: bool = False,
    strict: bool = False,
) -> tuple[EventStream, tuple[int, int]]:
    """Parse the binary format; returns the stream and the header (width, height)."""
    if len(data) < _HEADER_SIZE:
        raise ParseError("truncated header", 0)
    if data[:4] != BINARY_MAGIC:
        raise ParseError(f"bad magic {data[:4]!r}, expected {BINARY_MAGIC!r}", 0)
    width = int.from_bytes(data[4:6], "little")
    height = int.from_bytes(data[6:8], "little")
    body = data[_HEADER_SIZE:]
    n_full, rem = divmod(len(body), _RECORD_SIZE)
    if rem:
        raise ParseError("truncated record", _HEADER_SIZE + n_full * _RECORD_SIZE)
    records = np.frombuffer(body, dtype=_RECORD_DTYPE)
    pad_bad = records["pad"].any(axis=1) if n_full else np.empty(0, bool)
    if n_full and pad_bad.any():
        i = int(np.argmax(pad_bad))
        raise ParseError("nonzero padding bytes in record", _HEADER_SIZE + i * _RECORD_SIZE)
    header_dims = (width, height)
    if dims is not None and dims != header_dims:
        raise ValidationError(
            f"declared dims {dims[0]}x{dims[1]} do not match file header {width}x{height}"
        )
    stream = EventStream(
        t=records["t"].astype(np.int64),
        x=records["x"].astype(np.int32),
        y=records["y"].astype(np.int32),
        p=_map_polarity(records["p"], polarity01),
    )
    _check_coords(stream.x, stream.y, header_dims)
    if strict:
        _check_sorted(stream.t)
    return stream, header_dims


def parse_events(
    data: bytes,
    fmt: str,
    *,
    dims: tuple[int, int] | None = None,
    polarity01: bool = False,
    strict: bool = False,
) -> tuple[EventStream, tuple[int, int] | None]:
    """Parse ``csv`` or ``bin`` bytes; returns (stream, dims-or-None).

    For the binary format dims come from the file header; for CSV the caller's
    ``dims`` are echoed back (they gate coordinate validation).
    """
    if fmt == "csv":
        return parse_csv_events(data, dims=dims, polarity01=polarity01, strict=strict), dims
    if fmt == "bin":
        return parse_binary_events(data, dims=dims, polarity01=polarity01, strict=strict)
    raise ConfigError(f"unknown event format {fmt!r}")


def serialize_events(stream: EventStream, dims: tuple[int, int]) -> bytes:
    """Encode a stream in the binary format (exact inverse of parse)."""
    width, height = dims
    _check_coords(stream.x, stream.y, dims)
    records = np.zeros(len(stream), dtype=_RECORD_DTYPE)
    records["t"] = stream.t.astype(np.uint64)
    records["x"] = stream.x.astype(np.uint16)
    records["y"] = stream.y.astype(np.uint16)
    records["p"] = stream.p
    header = BINARY_MAGIC + width.to_bytes(2, "little") + height.to_bytes(2, "little")
    return header + records.tobytes()


def slice_windows(stream: EventStream, dt: int, dims: tuple[int, int]) -> list[EventWindow]:
    """Split a sorted stream into consecutive [start, start + dt) windows.

    Windows tile [t_first, t_last]; every event lands in exactly one window
    and a trailing partial window is emitted. Empty stream -> no windows.
    """
    if dt <= 0:
        raise ConfigError("window duration dt must be positive")
    if len(stream) == 0:
        return []
    _check_sorted(stream.t)
    t0 = int(stream.t[0])
    n_windows = int((int(stream.t[-1]) - t0) // dt) + 1
    bounds = t0 + dt * np.arange(1, n_windows, dtype=np.int64)
    splits = np.searchsorted(stream.t, bounds, side="left")
    edges = np.concatenate(([0], splits, [len(stream)]))
    return [
        EventWindow(
            events=stream.slice(int(edges[i]), int(edges[i + 1])),
            t_start=t0 + i * dt,
            t_end=t0 + (i + 1) * dt,
            sensor_dims=dims,
        )
        for i in range(n_windows)
    ]


def polarity_matrix(window: EventWindow) -> np.ndarray:
    """Per-pixel signed sum of polarities, shape (height, width) int64."""
    width, height = window.sensor_dims
    ev = window.events
    _check_coords(ev.x, ev.y, window.sensor_dims)
    return polarity_accumulate(
        ev.x.astype(np.int64), ev.y.astype(np.int64), ev.p.astype(np.int64), height, width
    )
