"""Value types shared by every stage: signals, decompositions and segments."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled single-lead signal.

    Parameters
    ----------
    samples : array_like
        Amplitudes in millivolts.
    fs : float
        Sampling rate in Hz.
    """

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        arr = _frozen_array(self.samples)
        if arr.size < 1:
            raise ValueError("signal must contain at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("signal contains non-finite samples")
        if not (np.isfinite(self.fs) and self.fs > 0):
            raise ValueError(f"sampling rate must be positive, got {self.fs}")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.fs

    def with_samples(self, samples) -> "Signal":
        """New signal at the same rate."""
        return Signal(samples, self.fs)

    def __add__(self, other: "Signal") -> "Signal":
        _check_compatible(self, other)
        return Signal(self.samples + other.samples, self.fs)

    def __sub__(self, other: "Signal") -> "Signal":
        _check_compatible(self, other)
        return Signal(self.samples - other.samples, self.fs)

    def __mul__(self, c: float) -> "Signal":
        return Signal(self.samples * float(c), self.fs)

    __rmul__ = __mul__


def _check_compatible(a: Signal, b: Signal) -> None:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if a.fs != b.fs:
        raise ValueError(f"sampling rate mismatch: {a.fs} vs {b.fs}")


def as_array(x) -> np.ndarray:
    """Samples of a Signal, or any array-like, as a float64 vector."""
    if isinstance(x, Signal):
        return x.samples
    return np.asarray(x, dtype=np.float64).ravel()


class DecompositionKind(str, Enum):
    WAVELET_MRA = "wavelet"
    VMD = "vmd"


@dataclass(frozen=True, order=True)
class Label:
    """Component label: ``D<level>``, ``A<level>`` or ``IMF<index>``."""

    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in ("D", "A", "IMF"):
            raise ValueError(f"unknown label kind {self.kind!r}")

    def __str__(self) -> str:
        return f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "Label":
        for kind in ("IMF", "D", "A"):
            if text.startswith(kind):
                return cls(kind, int(text[len(kind):]))
        raise ValueError(f"cannot parse component label {text!r}")


def detail(level: int) -> Label:
    return Label("D", level)


def approximation(level: int) -> Label:
    return Label("A", level)


def mode(index: int) -> Label:
    return Label("IMF", index)


@dataclass(frozen=True)
class Component:
    samples: np.ndarray
    label: Label
    center_freq: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen_array(self.samples))
        is_mode = self.label.kind == "IMF"
        if is_mode != (self.center_freq is not None):
            raise ValueError("center_freq is required for modes and forbidden otherwise")


@dataclass(frozen=True)
class Decomposition:
    """Ordered same-length components of one source signal.

    Wavelet decompositions are ordered finest detail first with the
    approximation last; VMD decompositions follow whatever order the
    producer chose (see ``vmd.sort_modes_by_freq``).
    """

    components: tuple[Component, ...]
    kind: DecompositionKind
    fs: float
    source_len: int = field(default=-1)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("decomposition has no components")
        n = comps[0].samples.size if self.source_len < 0 else self.source_len
        for c in comps:
            if c.samples.size != n:
                raise ValueError(
                    f"component {c.label} has {c.samples.size} samples, expected {n}"
                )
            if c.center_freq is not None and not (0.0 <= c.center_freq <= self.fs / 2):
                raise ValueError(f"center frequency {c.center_freq} outside [0, fs/2]")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "source_len", n)
        object.__setattr__(self, "kind", DecompositionKind(self.kind))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    @property
    def labels(self) -> list[Label]:
        return [c.label for c in self.components]

    def matrix(self) -> np.ndarray:
        """Components stacked as rows, shape ``(count, source_len)``."""
        return np.vstack([c.samples for c in self.components])

    def scaled(self, c: float) -> "Decomposition":
        comps = tuple(
            Component(comp.samples * c, comp.label, comp.center_freq) for comp in self.components
        )
        return Decomposition(comps, self.kind, self.fs, self.source_len)


@dataclass(frozen=True)
class SegmentSet:
    segments: tuple[Signal, ...]
    segment_len: int

    def __post_init__(self):
        segs = tuple(self.segments)
        if segs:
            fs = segs[0].fs
            for s in segs:
                if len(s) != self.segment_len or s.fs != fs:
                    raise ValueError("segments must share length and sampling rate")
        object.__setattr__(self, "segments", segs)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def __getitem__(self, i) -> Signal:
        return self.segments[i]

    def concatenate(self) -> Signal:
        if not self.segments:
            raise ValueError("empty segment set")
        return Signal(np.concatenate([s.samples for s in self.segments]), self.segments[0].fs)


def segment(signal: Signal, segment_len: int) -> SegmentSet:
    """Split into consecutive non-overlapping segments; the tail remainder is dropped."""
    if segment_len < 1:
        raise ValueError("segment_len must be >= 1")
    n = len(signal)
    if n < segment_len:
        raise ValueError(f"insufficient length: {n} samples < segment length {segment_len}")
    count = n // segment_len
    blocks = signal.samples[: count * segment_len].reshape(count, segment_len)
    return SegmentSet(tuple(Signal(b, signal.fs) for b in blocks), segment_len)


def recombine(decomp: Decomposition) -> Signal:
    """Element-wise sum of all components."""
    if len(decomp) == 0:
        raise ValueError("empty decomposition")
    total = np.zeros(decomp.source_len)
    for c in decomp.components:
        total = total + c.samples
    return Signal(total, decomp.fs)


def sum_components(components: Iterable[Component], n: int, fs: float) -> Signal:
    total = np.zeros(n)
    for c in components:
        total = total + c.samples
    return Signal(total, fs)


def labels_of(components: Sequence[Component]) -> list[str]:
    return [str(c.label) for c in components]
