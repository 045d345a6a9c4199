"""WFDB record reading (header + format-212 signal file), CSV import/export,
and an optional downloader for the public records."""

from __future__ import annotations

import csv
import logging
import math
import os
import re
import urllib.request
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .signal import Signal

logger = logging.getLogger(__name__)

MITDB_URL = "https://physionet.org/files/mitdb/1.0.0/"
NSTDB_URL = "https://physionet.org/files/nstdb/1.0.0/"
NOISE_RECORDS = ("bw", "ma", "em")
DEFAULT_GAIN = 200.0
SUPPORTED_FORMATS = (212,)


class ChecksumWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SignalSpec:
    file_name: str
    fmt: int
    gain: float  # adu per physical unit
    baseline: int
    units: str
    adc_res: int
    adc_zero: int
    init_value: int | None
    checksum: int | None
    byte_offset: int
    description: str


@dataclass(frozen=True)
class RecordHeader:
    record_name: str
    n_signals: int
    fs: float
    n_samples: int
    signals: tuple[SignalSpec, ...]

    def __post_init__(self):
        if self.n_signals < 1:
            raise ValueError("header declares no signals")
        if not self.fs > 0:
            raise ValueError(f"sampling frequency must be positive, got {self.fs}")
        if len(self.signals) != self.n_signals:
            raise ValueError(f"header declares {self.n_signals} signals but lists {len(self.signals)}")
        for s in self.signals:
            if not s.gain > 0:
                raise ValueError(f"gain must be positive for {s.description!r}")

    @property
    def lead_names(self) -> list[str]:
        return [s.description for s in self.signals]


_FMT_RE = re.compile(r"^(\d+)(?:x\d+)?(?::\d+)?(?:\+(\d+))?$")
_GAIN_RE = re.compile(r"^([-+0-9.eE]+)(?:\((-?\d+)\))?(?:/(\S+))?$")


def parse_header(text: str) -> RecordHeader:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty header")
    rec = lines[0].split()
    if len(rec) < 2:
        raise ValueError(f"malformed record line: {lines[0]!r}")
    name = rec[0]
    if "/" in name:
        raise ValueError("multi-segment records are not supported")
    n_sig = int(rec[1])
    fs = float(rec[2].split("/")[0].split("(")[0]) if len(rec) > 2 else 250.0
    n_samples = int(rec[3]) if len(rec) > 3 else 0

    specs = []
    for ln in lines[1 : 1 + n_sig]:
        parts = ln.split(maxsplit=8)
        if len(parts) < 2:
            raise ValueError(f"malformed signal line: {ln!r}")
        m = _FMT_RE.match(parts[1])
        if not m:
            raise ValueError(f"malformed format field {parts[1]!r}")
        fmt, offset = int(m.group(1)), int(m.group(2) or 0)
        gain, baseline, units = DEFAULT_GAIN, None, "mV"
        if len(parts) > 2:
            g = _GAIN_RE.match(parts[2])
            if not g:
                raise ValueError(f"malformed gain field {parts[2]!r}")
            gain = float(g.group(1)) or DEFAULT_GAIN
            baseline = int(g.group(2)) if g.group(2) is not None else None
            units = g.group(3) or units
        adc_res = int(parts[3]) if len(parts) > 3 else 12
        adc_zero = int(parts[4]) if len(parts) > 4 else 0
        init = int(parts[5]) if len(parts) > 5 else None
        checksum = int(parts[6]) if len(parts) > 6 else None
        desc = parts[8] if len(parts) > 8 else f"signal{len(specs)}"
        specs.append(
            SignalSpec(parts[0], fmt, gain, adc_zero if baseline is None else baseline, units,
                       adc_res, adc_zero, init, checksum, offset, desc)
        )
    return RecordHeader(name, n_sig, fs, n_samples, tuple(specs))


def read_header(path) -> RecordHeader:
    return parse_header(Path(path).read_text())


def decode_212(buf: bytes, count: int) -> np.ndarray:
    """Unpack ``count`` 12-bit two's-complement samples, two per three bytes."""
    need = math.ceil(count * 3 / 2)
    if len(buf) < need:
        raise ValueError(f"truncated signal data: ended at byte offset {len(buf)}, need {need} bytes")
    raw = np.frombuffer(buf[:need], dtype=np.uint8).astype(np.int32)
    if raw.size % 3:
        raw = np.concatenate([raw, np.zeros(3 - raw.size % 3, dtype=np.int32)])
    b = raw.reshape(-1, 3)
    first = b[:, 0] | ((b[:, 1] & 0x0F) << 8)
    second = b[:, 2] | ((b[:, 1] & 0xF0) << 4)
    out = np.empty(2 * b.shape[0], dtype=np.int32)
    out[0::2], out[1::2] = first, second
    out = out[:count]
    return np.where(out > 2047, out - 4096, out)


def pack_212(adu) -> bytes:
    """Inverse of :func:`decode_212`; values must fit in 12 bits."""
    a = np.asarray(adu, dtype=np.int64).ravel()
    if a.size and (a.min() < -2048 or a.max() > 2047):
        raise ValueError("sample out of 12-bit range")
    u = (a & 0xFFF).astype(np.int64)
    odd = u.size % 2
    if odd:
        u = np.append(u, 0)
    first, second = u[0::2], u[1::2]
    b = np.column_stack([first & 0xFF, ((first >> 8) & 0x0F) | ((second >> 4) & 0xF0), second & 0xFF])
    out = b.astype(np.uint8).tobytes()
    return out[:-1] if odd else out


def _decode(fmt: int, buf: bytes, count: int) -> np.ndarray:
    if fmt == 212:
        return decode_212(buf, count)
    raise ValueError(f"unsupported format {fmt}")


def read_adu(header_path) -> tuple[RecordHeader, np.ndarray]:
    """Raw digital samples, shape ``(n_samples, n_signals)``."""
    header_path = Path(header_path)
    hdr = read_header(header_path)
    by_file: dict[str, list[int]] = {}
    for i, s in enumerate(hdr.signals):
        if s.fmt not in SUPPORTED_FORMATS:
            raise ValueError(f"unsupported format {s.fmt} for signal {s.description!r}")
        by_file.setdefault(s.file_name, []).append(i)

    adu = np.empty((hdr.n_samples, hdr.n_signals), dtype=np.int32)
    for fname, idx in by_file.items():
        path = header_path.parent / fname
        data = path.read_bytes()
        spec = hdr.signals[idx[0]]
        frames = hdr.n_samples
        if frames == 0:
            frames = (len(data) - spec.byte_offset) * 2 // 3 // len(idx)
            adu = np.empty((frames, hdr.n_signals), dtype=np.int32)
            hdr = RecordHeader(hdr.record_name, hdr.n_signals, hdr.fs, frames, hdr.signals)
        try:
            flat = _decode(spec.fmt, data[spec.byte_offset :], frames * len(idx))
        except ValueError as e:
            raise ValueError(f"{path}: {e}") from e
        adu[:, idx] = flat.reshape(frames, len(idx))

    for i, s in enumerate(hdr.signals):
        if s.checksum is not None:
            got = int(adu[:, i].astype(np.int64).sum()) & 0xFFFF
            if got != s.checksum & 0xFFFF:
                msg = f"checksum mismatch in {hdr.record_name} signal {s.description!r}: {got} != {s.checksum & 0xFFFF}"
                logger.warning(msg)
                warnings.warn(msg, ChecksumWarning, stacklevel=2)
    return hdr, adu


def read_record(header_path) -> list[Signal]:
    """One Signal per lead in physical units, ``(adu - baseline) / gain``."""
    hdr, adu = read_adu(header_path)
    return [
        Signal((adu[:, i] - s.baseline) / s.gain, hdr.fs)
        for i, s in enumerate(hdr.signals)
    ]


def to_adu(signal: Signal, gain: float, baseline: int) -> np.ndarray:
    """Invert the physical conversion (rounding to the nearest level)."""
    return np.rint(signal.samples * gain + baseline).astype(np.int64)


def data_dir() -> Path | None:
    root = os.environ.get("ECGSCRUB_DATA_DIR")
    return Path(root) if root else None


def find_record(name: str, root=None) -> Path | None:
    """Header path for ``name`` under ``root`` (default ``$ECGSCRUB_DATA_DIR``)."""
    root = Path(root) if root is not None else data_dir()
    if root is None:
        return None
    for sub in ("", "mitdb", "nstdb"):
        p = root / sub / f"{name}.hea"
        if p.exists():
            return p
    return None


def read_csv(path, fs: float) -> Signal:
    """One value per line (first column if comma-separated).

    Lines starting with ``#`` are comments; a single non-numeric first line
    is taken as a column header.
    """
    values = []
    first = True
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                values.append(float(text.split(",")[0]))
            except ValueError:
                if not first:
                    raise ValueError(f"{path}:{lineno}: not a number: {text!r}") from None
            first = False
    if not values:
        raise ValueError(f"{path}: no samples")
    return Signal(values, fs)


def write_csv(signal: Signal, path, header: str | None = "value", comment: str | None = None) -> None:
    """Write one value per line with full round-trip precision."""
    with open(path, "w", newline="") as fh:
        if comment:
            for ln in comment.splitlines():
                fh.write(f"# {ln}\n")
        if header:
            fh.write(f"{header}\n")
        fh.writelines(f"{v!r}\n" for v in signal.samples.tolist())


def write_columns(path, columns: dict, comment: str | None = None) -> None:
    """Write several equal-length columns as CSV."""
    names = list(columns)
    with open(path, "w", newline="") as fh:
        if comment:
            for ln in comment.splitlines():
                fh.write(f"# {ln}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*(np.asarray(columns[k]).tolist() for k in names)):
            w.writerow([repr(v) for v in row])


def fetch(name: str, dest, base_url: str | None = None, timeout: float = 60.0) -> Path:
    """Download ``name``'s header and signal files into ``dest``.

    The signal file size is checked against what the header implies.  This
    is the only function in the package that touches the network.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    if base_url is None:
        base_url = NSTDB_URL if name in NOISE_RECORDS else MITDB_URL
    hea = dest / f"{name}.hea"
    _download(base_url + f"{name}.hea", hea, timeout)
    hdr = read_header(hea)
    for fname in sorted({s.file_name for s in hdr.signals}):
        target = dest / fname
        _download(base_url + fname, target, timeout)
        sigs = [s for s in hdr.signals if s.file_name == fname]
        expected = sigs[0].byte_offset + math.ceil(hdr.n_samples * len(sigs) * 3 / 2)
        size = target.stat().st_size
        if hdr.n_samples and size != expected:
            raise ValueError(f"{target}: size {size} bytes, header implies {expected}")
    return hea


def _download(url: str, target: Path, timeout: float) -> None:
    logger.info("fetching %s", url)
    tmp = target.with_suffix(target.suffix + ".part")
    with urllib.request.urlopen(url, timeout=timeout) as resp, open(tmp, "wb") as fh:
        length = resp.headers.get("Content-Length")
        data = resp.read()
        fh.write(data)
    if length is not None and int(length) != len(data):
        tmp.unlink()
        raise ValueError(f"{url}: received {len(data)} of {length} bytes")
    os.replace(tmp, target)
