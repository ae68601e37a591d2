"""
Pulse-indexed detector event streams and start-stop histograms.

File format (UTF-8 text)::

    # phonon-herald timetag v1
    0,S
    0,D1
    17,D2
    ...

One record per line, ``pulse_index,channel`` with channel one of ``S``,
``D1``, ``D2``. Records are tagged with the laser repetition they belong to
rather than a wall-clock time.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .errors import TimeTagFormatError

__all__ = [
    "HEADER",
    "CHANNELS",
    "TimeTagRecord",
    "TimeTagStream",
    "StartStopHistogram",
    "write_stream",
    "read_stream",
    "build_histogram",
    "herald_filter",
]

HEADER = "# phonon-herald timetag v1"
CHANNELS = ("S", "D1", "D2")
_CODE = {name: i for i, name in enumerate(CHANNELS)}


class TimeTagRecord(NamedTuple):
    pulse_index: int
    channel: str


def _channel_code(name: str) -> int:
    try:
        return _CODE[name]
    except KeyError:
        raise ValueError(f"unknown channel {name!r}; expected one of {CHANNELS}") from None


class TimeTagStream:
    """Column-oriented sequence of :class:`TimeTagRecord`."""

    __slots__ = ("pulse_index", "channel")

    def __init__(self, pulse_index=(), channel=()):
        self.pulse_index = np.asarray(pulse_index, dtype=np.uint64)
        self.channel = np.asarray(channel, dtype=np.uint8)
        if self.pulse_index.shape != self.channel.shape or self.pulse_index.ndim != 1:
            raise ValueError("pulse_index and channel must be 1-d arrays of equal length")
        if self.channel.size and self.channel.max() >= len(CHANNELS):
            raise ValueError("channel codes out of range")

    @classmethod
    def from_records(cls, records: Iterable) -> "TimeTagStream":
        if isinstance(records, TimeTagStream):
            return records
        idx, ch = [], []
        for r in records:
            pi, c = r
            if int(pi) < 0:
                raise ValueError("pulse_index must be non-negative")
            idx.append(int(pi))
            ch.append(_channel_code(c))
        return cls(idx, ch)

    @classmethod
    def from_channels(cls, **indices) -> "TimeTagStream":
        """Build a stream ordered by (pulse_index, channel) from per-channel index arrays."""
        parts_i, parts_c = [], []
        for name, arr in indices.items():
            arr = np.asarray(arr, dtype=np.uint64)
            parts_i.append(arr)
            parts_c.append(np.full(arr.size, _channel_code(name), dtype=np.uint8))
        if not parts_i:
            return cls()
        idx = np.concatenate(parts_i)
        ch = np.concatenate(parts_c)
        order = np.lexsort((ch, idx))
        return cls(idx[order], ch[order])

    def __len__(self):
        return self.pulse_index.size

    def __iter__(self):
        for i, c in zip(self.pulse_index.tolist(), self.channel.tolist()):
            yield TimeTagRecord(i, CHANNELS[c])

    def __getitem__(self, k):
        if isinstance(k, slice):
            return TimeTagStream(self.pulse_index[k], self.channel[k])
        return TimeTagRecord(int(self.pulse_index[k]), CHANNELS[self.channel[k]])

    def __eq__(self, other):
        if not isinstance(other, TimeTagStream):
            other = TimeTagStream.from_records(other)
        return (np.array_equal(self.pulse_index, other.pulse_index)
                and np.array_equal(self.channel, other.channel))

    def __repr__(self):
        return f"TimeTagStream({len(self)} records)"

    def indices(self, channel: str) -> np.ndarray:
        """Pulse indices of all events on one channel, in stream order."""
        return self.pulse_index[self.channel == _channel_code(channel)]


def write_stream(records, path) -> None:
    stream = TimeTagStream.from_records(records)
    names = np.array(CHANNELS)[stream.channel]
    body = "".join(f"{i},{c}\n" for i, c in zip(stream.pulse_index.tolist(), names.tolist()))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(HEADER + "\n")
        fh.write(body)


def read_stream(path: str | os.PathLike) -> TimeTagStream:
    """Parse a v1 time-tag file.

    Malformed lines raise :class:`TimeTagFormatError` naming the line; a
    pulse index going backwards within a channel only warns.
    """
    idx, ch = [], []
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if first.rstrip("\n") != HEADER:
            raise TimeTagFormatError(f"{path}:1: missing header {HEADER!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            parts = line.split(",")
            if len(parts) != 2 or parts[1] not in _CODE or not parts[0].isdigit():
                raise TimeTagFormatError(f"{path}:{lineno}: malformed record {line!r}")
            idx.append(int(parts[0]))
            ch.append(_CODE[parts[1]])
    stream = TimeTagStream(idx, ch)
    for name in CHANNELS:
        sel = stream.indices(name)
        if sel.size > 1 and np.any(np.diff(sel.astype(np.int64)) < 0):
            warnings.warn(f"{path}: pulse_index not monotone on channel {name}", stacklevel=2)
    return stream


@dataclass
class StartStopHistogram:
    """Coincidence counts versus stop-minus-start pulse offset."""

    bins: dict
    start_channel: str
    stop_channel: str
    exclusion_window: frozenset = field(default_factory=frozenset)

    @property
    def offsets(self) -> np.ndarray:
        return np.array(sorted(self.bins))

    @property
    def counts(self) -> np.ndarray:
        return np.array([self.bins[k] for k in sorted(self.bins)])

    @property
    def total(self) -> int:
        return int(sum(self.bins.values()))

    def side_offsets(self):
        return [k for k in sorted(self.bins) if k != 0 and k not in self.exclusion_window]

    def __add__(self, other: "StartStopHistogram") -> "StartStopHistogram":
        if (self.start_channel, self.stop_channel) != (other.start_channel, other.stop_channel):
            raise ValueError("cannot merge histograms of different channel pairs")
        keys = set(self.bins) | set(other.bins)
        return StartStopHistogram(
            {k: self.bins.get(k, 0) + other.bins.get(k, 0) for k in keys},
            self.start_channel, self.stop_channel,
            self.exclusion_window | other.exclusion_window,
        )


def build_histogram(records, start_channel: str, stop_channel: str, max_offset: int,
                    exclusion_window: Iterable[int] = ()) -> StartStopHistogram:
    """Count (start, stop) pairs at every pulse offset in ``-max_offset..max_offset``."""
    if max_offset < 1:
        raise ValueError("max_offset must be >= 1")
    stream = TimeTagStream.from_records(records)
    starts = np.sort(stream.indices(start_channel).astype(np.int64))
    stops = np.sort(stream.indices(stop_channel).astype(np.int64))
    bins = {}
    for k in range(-max_offset, max_offset + 1):
        target = starts + k
        n = np.searchsorted(stops, target, side="right") - np.searchsorted(stops, target, side="left")
        bins[k] = int(n.sum())
    return StartStopHistogram(bins, start_channel, stop_channel, frozenset(exclusion_window))


def herald_filter(records, herald_channel: str = "S") -> TimeTagStream:
    """Keep only events in pulses where ``herald_channel`` fired, re-indexed by herald count.

    Pulse ``i`` becomes the ordinal of its herald, so a start-stop histogram
    of the result compares heralded pulses with each other.
    """
    stream = TimeTagStream.from_records(records)
    heralds = np.unique(stream.indices(herald_channel))
    if heralds.size == 0:
        return TimeTagStream()
    pos = np.minimum(np.searchsorted(heralds, stream.pulse_index), heralds.size - 1)
    keep = heralds[pos] == stream.pulse_index
    return TimeTagStream(pos[keep], stream.channel[keep])
